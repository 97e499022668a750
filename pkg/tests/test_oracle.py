import json

import numpy as np
import pytest

from freechaos.errors import DomainError, ResourceLimitError
from freechaos import oracle
from freechaos.oracle import SimConfig, estimate_moments, estimates_to_json, target_for


def test_targets():
    cfg = SimConfig(model="semicircle")
    assert [target_for(cfg, k) for k in range(1, 7)] == [0, 1, 0, 2, 0, 5]
    cfg = SimConfig(model="free_poisson", lam=2.0)
    # uncentered: 2, 2 + 4, ...
    assert [target_for(cfg, k) for k in (1, 2, 3)] == [2.0, 6.0, 22.0]


@pytest.mark.parametrize("model, lam", [("semicircle", 1.0), ("free_poisson", 0.5), ("free_poisson", 2.0)])
def test_small_simulation_is_close(model, lam):
    cfg = SimConfig(N=80, trials=30, seed=5, model=model, lam=lam, orders=(1, 2, 3, 4))
    for e in estimate_moments(cfg):
        # finite-N bias is O(1/N^2) for the complex ensembles; allow it on top of sampling noise
        assert abs(e.estimate - e.target) <= 5 * e.stderr + 0.05 * max(1.0, e.target), e


def test_reproducible_and_scheduling_free():
    base = dict(N=30, trials=12, seed=11, model="free_poisson", lam=1.5, orders=(1, 2, 5))
    a = estimates_to_json(estimate_moments(SimConfig(**base)))
    b = estimates_to_json(estimate_moments(SimConfig(**base)))
    c = estimates_to_json(estimate_moments(SimConfig(**base, workers=3)))
    assert a == b == c
    d = estimates_to_json(estimate_moments(SimConfig(**{**base, "seed": 12})))
    assert d != a


def test_semicircle_trace_identity():
    est = estimate_moments(SimConfig(N=60, trials=20, seed=1, orders=(1, 2)))
    assert abs(est[0].estimate) < 0.05
    assert est[1].estimate == pytest.approx(1.0, abs=0.05)


def test_wishart_rank_deficient():
    # lam < 1 leaves N - p zero eigenvalues
    cfg = SimConfig(N=20, trials=1, model="free_poisson", lam=0.5)
    ev = oracle._eigenvalues(cfg, np.random.default_rng(0))
    assert np.sum(ev == 0) == 10


def test_json_shape():
    est = estimate_moments(SimConfig(N=10, trials=3, orders=(2,)))
    d = json.loads(estimates_to_json(est))
    assert set(d[0]) == {"order", "estimate", "stderr", "target"}
    assert est[0].z() >= 0


def test_single_trial_has_infinite_stderr():
    est = estimate_moments(SimConfig(N=10, trials=1, orders=(2,)))
    assert est[0].stderr == float("inf")


@pytest.mark.parametrize(
    "kw",
    [
        {"model": "goe"},
        {"N": 1},
        {"trials": 0},
        {"model": "free_poisson", "lam": 0.0},
        {"orders": (0,)},
        {"model": "free_poisson", "lam": 0.001, "N": 10},
    ],
)
def test_validation(kw):
    with pytest.raises(DomainError):
        SimConfig(**kw)


def test_resource_guard(monkeypatch):
    monkeypatch.setattr(oracle, "MAX_ENTRIES", 100)
    with pytest.raises(ResourceLimitError) as exc:
        estimate_moments(SimConfig(N=10, trials=2))
    assert exc.value.cost["entries"] == 200


def test_full_size_orders_up_to_six(oracle_runs):
    _, est, _ = oracle_runs
    for model, rows in est.items():
        for e in rows:
            assert abs(e.estimate - e.target) <= 4 * e.stderr, (model, e)
