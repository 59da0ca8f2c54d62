"""Pseudo-arclength continuation through simple folds, with conditioning bounds."""
from .bounds import RankOneBoundReport, rank_one_helper_bound, rank_one_lower_bound, weyl_interval
from .cluster import SplittingReport, bordered_splitting, split_low_rank, verify_jbound
from .continuation import (NewtonOptions, NormalizationEq, Path, PathPoint, PsarcOptions,
                           extended_residual, initial_tangent, paramc, psarc, secant_tangent)
from .fold import (BorderedJacobian, FoldDiagnostics, assemble_bordered, classify_point,
                   max_step_bound, sigma_min_actual, sigma_min_bound)
from .gmres import GmresTrace, LinearOperator, gmres_solve
from .linalg import lu_solve, svd, sym_eig
from .newton import NewtonResult, newton_direct, newton_gmres, q_order_estimate
from .problems import HEquation, ProblemDef, ToyFold, synthetic_cluster_operator, toy_fold_problem

__version__ = "0.1.0"
