import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "qconv",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qconv")


@pytest.fixture(scope="session")
def p9():
    from qconv import latin as L

    return L.perm_2unitary_from_mols(*L.mols(3)[:2])


@pytest.fixture(scope="session")
def u49_solution():
    """One non-permutation solution of the d = 7 cyclic search (shared, ~2 s)."""
    from qconv import families as F

    return F.u49_ansatz_search(seed=1, restarts=20)


def random_unitary(d, seed):
    from qconv import tensor as T

    return T.haar_unitary(d, seed)


def naive_reshuffle(U):
    d = int(round(np.sqrt(U.shape[0])))
    R = np.empty_like(U)
    for k in range(d):
        for i in range(d):
            for l in range(d):
                for j in range(d):
                    R[k * d + i, l * d + j] = U[k * d + l, i * d + j]
    return R


def naive_partial_transpose(U):
    d = int(round(np.sqrt(U.shape[0])))
    G = np.empty_like(U)
    for k in range(d):
        for i in range(d):
            for l in range(d):
                for j in range(d):
                    G[k * d + i, l * d + j] = U[l * d + i, k * d + j]
    return G


# one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_verdict(number, title, checks):
    """Print ``PASS``/``FAIL`` for a criterion and return the failed check names."""
    failed = [name for name, ok in checks.items() if not ok]
    verdict = "FAIL" if failed else "PASS"
    line = f"{verdict} criterion {number:2d}: {title}"
    if failed:
        line += " [failed: " + "; ".join(failed) + "]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return failed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
