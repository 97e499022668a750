import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def oracle_runs():
    """Full-size random matrix runs shared by the oracle invariants and the acceptance suite."""
    import time

    from freechaos.oracle import SimConfig, estimate_moments

    orders = (1, 2, 3, 4, 5, 6)
    start = time.perf_counter()
    cfgs = {
        "semicircle": SimConfig(N=400, trials=200, seed=11, model="semicircle", orders=orders, workers=4),
        "free_poisson": SimConfig(N=400, trials=200, seed=11, model="free_poisson", lam=1.0, orders=orders, workers=4),
    }
    est = {k: estimate_moments(c) for k, c in cfgs.items()}
    return cfgs, est, time.perf_counter() - start
