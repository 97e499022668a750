"""
Monte Carlo moments of random matrix models.

A sanity oracle for the target laws, independent of the chaos machinery:

* ``semicircle``: complex Hermitian Gaussian matrices ``X = H / sqrt(N)`` whose
  spectral law tends to the standard semicircle.
* ``free_poisson``: complex Wishart matrices ``W = G G^* / N`` with
  ``G`` of shape ``N x round(lam N)``, whose law tends to free Poisson(lam).

Each trial draws from its own stream spawned from ``seed``, so the result does
not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .distributions import free_poisson_moment_single, semicircle_moment
from .errors import DomainError, ResourceLimitError

__all__ = ["MODELS", "SimConfig", "MomentEstimate", "estimate_moments", "target_for", "estimates_to_json"]

MODELS = ("semicircle", "free_poisson")

#: Refuse simulations above this many matrix entries in total.
MAX_ENTRIES = 10**10


@dataclass(frozen=True)
class SimConfig:
    N: int = 400
    trials: int = 200
    seed: int = 0
    model: str = "semicircle"
    lam: float = 1.0
    orders: Tuple[int, ...] = (1, 2, 3, 4)
    workers: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.N < 2 or self.trials < 1:
            raise DomainError("need N >= 2 and trials >= 1")
        if self.model == "free_poisson" and not self.lam > 0:
            raise DomainError("lam must be positive")
        if any(k < 1 for k in self.orders):
            raise DomainError("orders must be positive")
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if self.model == "free_poisson" and self.p < 1:
            raise DomainError("round(lam * N) must be at least 1")

    @property
    def p(self) -> int:
        return int(round(self.lam * self.N))


@dataclass(frozen=True)
class MomentEstimate:
    order: int
    estimate: float
    stderr: float
    target: float

    def z(self) -> float:
        return abs(self.estimate - self.target) / self.stderr if self.stderr > 0 else float("inf")

    def to_dict(self) -> dict:
        return {"order": self.order, "estimate": self.estimate, "stderr": self.stderr, "target": self.target}


def target_for(cfg: SimConfig, k: int) -> float:
    if cfg.model == "semicircle":
        return float(semicircle_moment(1, k))
    return float(free_poisson_moment_single(cfg.lam, k, centered=False))


def _eigenvalues(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    N = cfg.N
    if cfg.model == "semicircle":
        g = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
        h = (g + g.conj().T) / np.sqrt(2.0)
        return np.linalg.eigvalsh(h) / np.sqrt(N)
    p = cfg.p
    g = (rng.standard_normal((N, p)) + 1j * rng.standard_normal((N, p))) / np.sqrt(2.0)
    s = np.linalg.svd(g, compute_uv=False)
    ev = np.zeros(N)
    ev[: s.size] = s**2 / N
    return ev


def _trial(cfg: SimConfig, seq: np.random.SeedSequence) -> np.ndarray:
    ev = _eigenvalues(cfg, np.random.default_rng(seq))
    return np.array([np.mean(ev**k) for k in cfg.orders])


def estimate_moments(cfg: SimConfig) -> List[MomentEstimate]:
    """Mean and standard error of ``N^{-1} tr(X^k)`` over independent trials."""
    cols = cfg.N * (cfg.p if cfg.model == "free_poisson" else cfg.N)
    if cfg.trials * cols > MAX_ENTRIES:
        raise ResourceLimitError("simulation too large", cost={"entries": cfg.trials * cols})
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            rows = list(ex.map(lambda s: _trial(cfg, s), seqs))
    else:
        rows = [_trial(cfg, s) for s in seqs]
    data = np.vstack(rows)
    mean = data.mean(axis=0)
    se = data.std(axis=0, ddof=1) / np.sqrt(cfg.trials) if cfg.trials > 1 else np.full(len(cfg.orders), np.inf)
    return [
        MomentEstimate(k, float(mean[c]), float(se[c]), target_for(cfg, k)) for c, k in enumerate(cfg.orders)
    ]


def estimates_to_json(estimates: Sequence[MomentEstimate]) -> str:
    return json.dumps([e.to_dict() for e in estimates], indent=1, sort_keys=True)

