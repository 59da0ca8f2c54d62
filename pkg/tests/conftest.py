import numpy as np
import pytest

from foldpath.continuation import NewtonOptions, PsarcOptions, psarc
from foldpath.problems import HEquation


def run_heq(nodes, ds, lambda_min=0.9, backend="direct", forcing=1e-4, diagnostics=True):
    prob = HEquation(nodes)
    u0, c0 = prob.initial_point()
    path = psarc(prob, 1e6, ds, np.append(u0, c0),
                 newton=NewtonOptions(backend=backend, forcing=forcing),
                 options=PsarcOptions(lambda_min=lambda_min, diagnostics=diagnostics))
    return prob, path


@pytest.fixture(scope="session")
def heq_path_fine():
    """N = 200, ds = 0.1, from c = 0 around the fold and back to c = 0.9."""
    return run_heq(200, 0.1)


@pytest.fixture(scope="session")
def heq_path_coarse():
    """N = 200, ds = 0.5 as in the sigma_min figure, down to c = 0.3 on the upper branch."""
    return run_heq(200, 0.5, lambda_min=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config.acceptance_lines[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.acceptance_lines
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
