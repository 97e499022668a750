"""
Target laws: free cumulants, moments over non-crossing partitions, and the
classical closed forms (semicircle, free Poisson, Charlier polynomials).

Two limit families are supported:

* :class:`FreeFamilySpec` -- free variables ``a_i`` with ``kappa_n(a_i) = lambda_i alpha_i^n``
  and vanishing mixed cumulants.
* :class:`EqualParamSpec` -- the equal-parameter family with
  ``kappa_n(b_{chi(1)}, ..., b_{chi(n)}) = lambda * prod alpha_{chi(k)}``.

``centered=True`` sets every first cumulant to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Sequence, Tuple, Union

from .errors import DomainError
from .partitions import catalan, count_R, enumerate_nc

__all__ = [
    "FreeFamilySpec",
    "EqualParamSpec",
    "LimitSpec",
    "cumulant",
    "target_moment",
    "equalparam_moment_closed",
    "semicircle_moment",
    "charlier",
    "charlier_power_expansion",
    "free_poisson_moment_single",
    "cumulants_from_moments",
    "limit_spec_to_dict",
    "limit_spec_from_dict",
]


def _check_params(lam, alpha):
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if alpha == 0:
        raise DomainError("alpha must be nonzero")


@dataclass(frozen=True)
class FreeFamilySpec:
    """Free family; ``params[label] = (lambda, alpha)``."""

    params: Mapping[Hashable, Tuple[float, float]]
    centered: bool = True

    def __post_init__(self):
        params = {k: (v[0], v[1]) for k, v in dict(self.params).items()}
        for lam, alpha in params.values():
            _check_params(lam, alpha)
        object.__setattr__(self, "params", params)

    @property
    def labels(self) -> List[Hashable]:
        return list(self.params)

    def __hash__(self):
        return hash((tuple(sorted(self.params.items(), key=repr)), self.centered))


@dataclass(frozen=True)
class EqualParamSpec:
    """Equal-parameter family with common ``lam`` and per-label scales ``alphas``."""

    lam: float
    alphas: Mapping[Hashable, float] = field(default_factory=dict)
    centered: bool = True

    def __post_init__(self):
        alphas = dict(self.alphas)
        for a in alphas.values():
            _check_params(self.lam, a)
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        object.__setattr__(self, "alphas", alphas)

    @property
    def labels(self) -> List[Hashable]:
        return list(self.alphas)

    def alpha(self, label) -> float:
        # labels without an explicit scale default to 1
        return self.alphas.get(label, 1)

    def __hash__(self):
        return hash((self.lam, tuple(sorted(self.alphas.items(), key=repr)), self.centered))


LimitSpec = Union[FreeFamilySpec, EqualParamSpec]


def cumulant(spec: LimitSpec, labels: Sequence[Hashable]):
    """Free cumulant ``kappa_n(a_{labels[0]}, ..., a_{labels[n-1]})``."""
    n = len(labels)
    if n < 1:
        raise DomainError("cumulants need at least one argument")
    if n == 1 and spec.centered:
        return 0
    if isinstance(spec, FreeFamilySpec):
        first = labels[0]
        if any(lab != first for lab in labels):
            return 0
        try:
            lam, alpha = spec.params[first]
        except KeyError:
            raise DomainError(f"unknown label {first!r}") from None
        return lam * alpha**n
    if isinstance(spec, EqualParamSpec):
        out = spec.lam
        for lab in labels:
            out = out * spec.alpha(lab)
        return out
    raise DomainError(f"unsupported spec {type(spec).__name__}")


def target_moment(spec: LimitSpec, chi: Sequence[Hashable]):
    """``phi(a_{chi(1)} ... a_{chi(n)})`` as a sum over non-crossing partitions of block cumulants."""
    n = len(chi)
    if n < 1:
        raise DomainError("moment of an empty word")
    total = 0
    for p in enumerate_nc(n):
        term = 1
        for b in p.blocks:
            k = cumulant(spec, [chi[x - 1] for x in b])
            if k == 0:
                term = 0
                break
            term = term * k
        total = total + term
    return total


def equalparam_moment_closed(lam, m: int):
    """``sum_j lam^j R_{m,j}`` with ``R_{m,j}`` the number of singleton-free NC partitions with ``j`` blocks."""
    if m < 1:
        raise DomainError("m must be >= 1")
    return sum(lam**j * count_R(m, j) for j in range(1, m // 2 + 1))


def semicircle_moment(t, n: int):
    """``n``-th moment of the centered semicircle law of variance ``t``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n % 2:
        return 0
    return catalan(n // 2) * t ** (n // 2)


def free_poisson_moment_single(lam, n: int, centered: bool = True):
    """Moments of a free Poisson law of rate ``lam`` and jump size 1."""
    if n == 0:
        return lam**0
    spec = FreeFamilySpec({0: (lam, 1)}, centered=centered)
    return target_moment(spec, [0] * n)


def charlier(m: int, lam) -> List:
    """
    Coefficients (lowest degree first) of the ``m``-th Charlier polynomial.

    Uses ``C_0 = 1``, ``C_1 = x`` and ``x C_k = C_{k+1} + C_k + lam C_{k-1}``.
    Arithmetic follows the type of ``lam``, so a :class:`fractions.Fraction`
    gives exact rational coefficients.
    """
    if m < 0:
        raise DomainError("m must be >= 0")
    one = lam**0
    prev, cur = [one], [0 * one, one]
    if m == 0:
        return prev
    for _ in range(1, m):
        nxt = [0 * one] + cur  # x * C_k
        for i, c in enumerate(cur):
            nxt[i] -= c
        for i, c in enumerate(prev):
            nxt[i] -= lam * c
        prev, cur = cur, nxt
    return cur


def charlier_power_expansion(k: int, lam) -> List:
    """
    Coefficients ``c_j`` with ``x^k = sum_j c_j C_j(x, lam)``.

    Obtained by iterating ``x C_0 = C_1`` and ``x C_j = C_{j+1} + C_j + lam C_{j-1}`` for ``j >= 1``.
    """
    if k < 0:
        raise DomainError("k must be >= 0")
    one = lam**0
    coeffs = [one]
    for _ in range(k):
        nxt = [0 * one] * (len(coeffs) + 1)
        nxt[1] += coeffs[0]  # x C_0 = C_1
        for j, c in enumerate(coeffs[1:], start=1):
            nxt[j + 1] += c
            nxt[j] += c
            nxt[j - 1] += lam * c
        coeffs = nxt
    return coeffs


def cumulants_from_moments(moments: Mapping[Tuple[Hashable, ...], object]) -> Dict[Tuple[Hashable, ...], object]:
    """
    Invert the moment-cumulant relation on a family of label words.

    ``moments`` must contain every sub-word (subsequence) needed by the
    recursion; all words over the labels up to some length always suffice.
    Words are processed by increasing length, and ``kappa_w`` is the moment
    minus the contributions of all non-crossing partitions with two or more
    blocks.
    """
    out: Dict[Tuple[Hashable, ...], object] = {}
    for word in sorted(moments, key=len):
        n = len(word)
        rest = 0
        for p in enumerate_nc(n):
            if len(p) == 1:
                continue
            term = 1
            for b in p.blocks:
                sub = tuple(word[x - 1] for x in b)
                if sub not in out:
                    raise DomainError(f"missing sub-word {sub} for the inversion of {word}")
                term = term * out[sub]
            rest = rest + term
        out[word] = moments[word] - rest
    return out


# -- JSON -------------------------------------------------------------------


def limit_spec_to_dict(spec: LimitSpec) -> dict:
    if isinstance(spec, FreeFamilySpec):
        return {
            "kind": "free_family",
            "centered": spec.centered,
            "lambda": {str(k): float(v[0]) for k, v in spec.params.items()},
            "alphas": {str(k): float(v[1]) for k, v in spec.params.items()},
        }
    return {
        "kind": "equal_param",
        "centered": spec.centered,
        "lambda": float(spec.lam),
        "alphas": {str(k): float(v) for k, v in spec.alphas.items()},
    }


def _label(key: str):
    try:
        return int(key)
    except ValueError:
        return key


def limit_spec_from_dict(d: Mapping) -> LimitSpec:
    try:
        kind = d["kind"]
        centered = bool(d.get("centered", True))
        if kind == "free_family":
            lams = d["lambda"]
            alphas = d.get("alphas", {})
            return FreeFamilySpec(
                {_label(k): (float(v), float(alphas.get(k, 1.0))) for k, v in lams.items()}, centered=centered
            )
        if kind == "equal_param":
            return EqualParamSpec(
                float(d["lambda"]), {_label(k): float(v) for k, v in d.get("alphas", {}).items()}, centered=centered
            )
    except (KeyError, TypeError, AttributeError) as exc:
        raise DomainError(f"malformed limit spec: {exc!r}") from exc
    raise DomainError(f"unknown limit spec kind {d.get('kind')!r}")


def dumps_limit_spec(spec: LimitSpec) -> str:
    return json.dumps(limit_spec_to_dict(spec), sort_keys=True)
