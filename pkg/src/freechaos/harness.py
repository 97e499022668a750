"""
Kernel-sequence families and convergence certification.

A :class:`KernelFamily` produces, for every sequence index ``n`` and label
``i``, a symmetric kernel ``f_n^(i)``.  The harness evaluates

* the low-order moment conditions of the four-moment theorems
  (:func:`check_fmt_conditions`),
* the equivalent contraction-norm conditions (:func:`check_contraction_conditions`),
* the vanishing of non-partition words (:func:`check_em_vanishing`),
* joint moments over every label word up to a given length against the
  target law (:func:`verify`).

Theorem identifiers
-------------------
``wigner-free``
    Wigner integrals, even ``q``, free-family target.
``poisson-free``
    Poisson integrals, free-family target (bounded kernels with bounded support
    are assumed by the theorem; the harness records but does not enforce this).
``wigner-equal``
    Wigner integrals, even ``q``, equal-parameter target.
``poisson-equal``
    Poisson integrals, equal-parameter target.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .chaos import count_arc_words, count_star_words, eval_arc_word, moment
from .distributions import (
    EqualParamSpec,
    FreeFamilySpec,
    LimitSpec,
    limit_spec_to_dict,
    target_moment,
)
from .errors import DomainError, ResourceLimitError
from .kernels import Grid, StepKernel, arc_contract, bounds, inner, norm, star_contract
from .partitions import enumerate_words

__all__ = [
    "THEOREMS",
    "KernelFamily",
    "FamilyConfig",
    "family_exact_wigner",
    "family_perturbed_wigner",
    "family_poisson_spread",
    "family_counterexample",
    "family_from_config",
    "ConditionRecord",
    "check_fmt_conditions",
    "check_contraction_conditions",
    "check_em_vanishing",
    "ConvergenceReport",
    "verify",
    "label_words",
    "exact_wigner_moment",
]

log = logging.getLogger(__name__)

#: theorem id -> (flavor, needs even q, target kind)
THEOREMS = {
    "wigner-free": ("wigner", True, "free"),
    "poisson-free": ("poisson", False, "free"),
    "wigner-equal": ("wigner", True, "equal"),
    "poisson-equal": ("poisson", False, "equal"),
}

#: Default cap on the number of contraction words evaluated by one verify call.
DEFAULT_WORD_CAP = 5_000_000


@dataclass
class KernelFamily:
    """
    A deterministic sequence of labelled kernels ``f_n^(i)``.

    Attributes
    ----------
    name : str
    flavor : {"wigner", "poisson"}
    q : int
    labels : list
    generator : callable
        ``generator(n, label) -> StepKernel``; kernels for one ``n`` share a grid.
    target : FreeFamilySpec or EqualParamSpec
    uniform_support : bool
        Whether the support measures stay bounded in ``n``.
    exact : bool
        ``True`` when every moment equals its target at every ``n``; such
        families are certified against an absolute tolerance, the others by
        a decay-rate test.
    """

    name: str
    flavor: str
    q: int
    labels: List[Hashable]
    generator: Callable[[int, Hashable], StepKernel]
    target: LimitSpec
    uniform_support: bool = True
    exact: bool = False
    seed: int = 0
    _cache: Dict[int, Dict[Hashable, StepKernel]] = field(default_factory=dict, repr=False, compare=False)

    def kernels(self, n: int) -> Dict[Hashable, StepKernel]:
        if n not in self._cache:
            self._cache[n] = {lab: self.generator(n, lab) for lab in self.labels}
        return self._cache[n]

    def kernel(self, n: int, label: Hashable) -> StepKernel:
        return self.kernels(n)[label]

    def alpha(self, label) -> float:
        t = self.target
        return t.params[label][1] if isinstance(t, FreeFamilySpec) else t.alpha(label)


def _as_mapping(x, labels=None) -> Dict[Hashable, float]:
    if isinstance(x, Mapping):
        return dict(x)
    if isinstance(x, (list, tuple)):
        return {k + 1: v for k, v in enumerate(x)}
    return {lab: x for lab in (labels or [1])}


def _target(lams, alphas, equal: bool) -> LimitSpec:
    if equal:
        lam = set(lams.values())
        if len(lam) != 1:
            raise DomainError("an equal-parameter target needs one common lambda")
        return EqualParamSpec(lam.pop(), alphas, centered=True)
    return FreeFamilySpec({k: (lams[k], alphas[k]) for k in lams}, centered=True)


def _integer_ranks(lams: Mapping) -> Dict[Hashable, int]:
    out = {}
    for k, v in lams.items():
        if float(v) != int(v) or int(v) < 1:
            raise DomainError(f"lambda for label {k!r} must be a positive integer here, got {v!r}")
        out[k] = int(v)
    return out


def _diagonal_kernel(grid: Grid, q: int, cells: Sequence[int], value: float) -> StepKernel:
    return StepKernel.from_entries(grid, q, [((k,) * q, value) for k in cells])


def family_exact_wigner(
    lambdas,
    q: int = 2,
    alphas=None,
    equal_param: bool = False,
    flavor: str = "wigner",
) -> KernelFamily:
    """
    Exact Wigner family: ``f^(i) = alpha_i sum_k e_k^{⊗q}`` over ``lambda_i`` unit cells.

    Labels own disjoint cells (free-family target) or, with ``equal_param``,
    all share the first ``lambda`` cells.  The grid has unit width so that
    ``e_k`` is a plain cell indicator.  For ``q = 2`` every moment equals the
    target exactly; for larger even ``q`` the fixed-point and cross-label
    conditions hold exactly while the off-middle self contractions do not
    vanish.
    """
    if q < 2 or q % 2:
        raise DomainError("the exact Wigner family needs an even q >= 2")
    lams = _integer_ranks(_as_mapping(lambdas))
    alphas = _as_mapping(alphas if alphas is not None else 1.0, list(lams))
    labels = list(lams)
    if equal_param:
        width = lams[labels[0]]
        cells = {lab: list(range(width)) for lab in labels}
        total = width
    else:
        cells, total = {}, 0
        for lab in labels:
            cells[lab] = list(range(total, total + lams[lab]))
            total += lams[lab]
    grid = Grid(float(total), total)

    def gen(n, lab):
        return _diagonal_kernel(grid, q, cells[lab], alphas[lab])

    return KernelFamily(
        name="exact_wigner",
        flavor=flavor,
        q=q,
        labels=labels,
        generator=gen,
        target=_target(lams, alphas, equal_param),
        uniform_support=True,
        exact=(q == 2),
    )


def family_perturbed_wigner(
    lambdas,
    alphas=None,
    equal_param: bool = False,
    seed: int = 0,
    strength: float = 1.0,
) -> KernelFamily:
    """
    ``q = 2`` family converging to the exact one at rate ``1/n``.

    ``f_n^(i) = alpha_i ((1 + eps) P_i + eps A_i)`` with ``eps = strength / n``,
    ``P_i`` the projection onto the label's cells and ``A_i`` a seeded symmetric
    zero-diagonal matrix on those cells with spectral radius 1/2.  The
    eigenvalues of ``(1 + eps) P + eps A`` all exceed 1 on the range of ``P``,
    so every cumulant, and therefore every moment error, is a polynomial in
    ``eps`` with nonnegative coefficients.  With ``equal_param`` all labels
    share cells and one perturbation.
    """
    lams = _integer_ranks(_as_mapping(lambdas))
    alphas = _as_mapping(alphas if alphas is not None else 1.0, list(lams))
    base = family_exact_wigner(lams, 2, alphas, equal_param)
    labels = base.labels
    grid = base.kernel(1, labels[0]).grid

    offsets, shared = {}, equal_param
    pos = 0
    for lab in labels:
        offsets[lab] = 0 if shared else pos
        pos += 0 if shared else lams[lab]

    def perturbation(k: int, stream: int) -> np.ndarray:
        rng = np.random.default_rng([seed, stream])
        a = rng.uniform(-1.0, 1.0, size=(k, k))
        a = (a + a.T) / 2.0
        np.fill_diagonal(a, 0.0)
        if k > 1:
            rad = np.max(np.abs(np.linalg.eigvalsh(a)))
            if rad > 0:
                a *= 0.5 / rad
        return a

    pert = {lab: perturbation(lams[lab], 0 if shared else idx) for idx, lab in enumerate(labels)}

    def gen(n, lab):
        eps = strength / n
        k = lams[lab]
        block = (1.0 + eps) * np.eye(k) + eps * pert[lab]
        o = offsets[lab]
        entries = [((o + a, o + b), alphas[lab] * block[a, b]) for a in range(k) for b in range(k) if block[a, b] != 0]
        return StepKernel.from_entries(grid, 2, entries)

    return KernelFamily(
        name="perturbed_wigner",
        flavor="wigner",
        q=2,
        labels=labels,
        generator=gen,
        target=base.target,
        uniform_support=True,
        exact=False,
        seed=seed,
    )


def _common_width(lams: Mapping) -> Fraction:
    """Largest width dividing every lambda (as exact decimals)."""
    fr = [Fraction(str(v)) for v in lams.values()]
    num = reduce(math.gcd, (f.numerator * (math.lcm(*(g.denominator for g in fr)) // f.denominator) for f in fr))
    return Fraction(num, math.lcm(*(g.denominator for g in fr)))


def family_poisson_spread(
    lambdas,
    q: int = 1,
    alphas=None,
    equal_param: bool = False,
    cells_per_block: int = 1,
) -> KernelFamily:
    """
    Poisson families for ``q = 1`` (exact) and ``q = 2`` (spreading support).

    ``q = 1``: ``f^(i) = alpha_i 1_{A_i}`` with ``|A_i| = lambda_i``; the sets are
    disjoint, or shared with ``equal_param``.  Independent of ``n``.

    ``q = 2``: integer ``lambda_i``; ``f_n^(i) = alpha_i sum_b n^{-1} 1_{B_b x B_b}``
    over ``lambda_i`` blocks ``B_b`` of length ``n``.  Then ``f ⌢_1 f = f`` and
    ``<f, f> = lambda`` exactly, while ``‖f ⋆_2^1 f‖^2 = lambda / n``.  Each block
    is split into ``cells_per_block`` grid cells; the represented function does
    not depend on this choice.
    """
    lams = _as_mapping(lambdas)
    alphas = _as_mapping(alphas if alphas is not None else 1.0, list(lams))
    labels = list(lams)
    if q == 1:
        width = _common_width(lams)
        units = {lab: int(Fraction(str(lams[lab])) / width) for lab in labels}
        if equal_param:
            cells = {lab: list(range(units[lab])) for lab in labels}
            total = max(units.values())
        else:
            cells, total = {}, 0
            for lab in labels:
                cells[lab] = list(range(total, total + units[lab]))
                total += units[lab]
        cells = {lab: [c * cells_per_block + s for c in cl for s in range(cells_per_block)] for lab, cl in cells.items()}
        grid = Grid(float(width * total), total * cells_per_block)

        def gen(n, lab):
            return StepKernel.from_entries(grid, 1, [((c,), alphas[lab]) for c in cells[lab]])

        return KernelFamily(
            name="poisson_spread",
            flavor="poisson",
            q=1,
            labels=labels,
            generator=gen,
            target=_target(lams, alphas, equal_param),
            uniform_support=True,
            exact=True,
        )
    if q != 2:
        raise DomainError("the spread Poisson family supports q in {1, 2}")
    ranks = _integer_ranks(lams)
    if equal_param:
        blocks = {lab: list(range(ranks[lab])) for lab in labels}
        total = max(ranks.values())
    else:
        blocks, total = {}, 0
        for lab in labels:
            blocks[lab] = list(range(total, total + ranks[lab]))
            total += ranks[lab]
    c = cells_per_block

    def gen(n, lab):
        grid = Grid(float(n * total), total * c)
        entries = []
        for b in blocks[lab]:
            cl = range(b * c, (b + 1) * c)
            entries.extend(((x, y), alphas[lab] / n) for x in cl for y in cl)
        return StepKernel.from_entries(grid, 2, entries)

    return KernelFamily(
        name="poisson_spread",
        flavor="poisson",
        q=2,
        labels=labels,
        generator=gen,
        target=_target(ranks, alphas, equal_param),
        uniform_support=False,
        exact=False,
    )


def family_counterexample(lam: float = 1.0, alpha: float = 1.0, label: Hashable = 1) -> KernelFamily:
    """
    Matched covariance, wrong higher moments.

    ``f_n = alpha sqrt(lam / n) sum_{k<n} e_k ⊗ e_k``: ``<f_n, f_n> = alpha^2 lam`` for
    every ``n``, yet ``I(f_n)`` tends to a semicircle, so the third and fourth
    moments miss their free Poisson targets.
    """

    def gen(n, lab):
        grid = Grid(float(n), n)
        return _diagonal_kernel(grid, 2, range(n), alpha * math.sqrt(lam / n))

    return KernelFamily(
        name="counterexample",
        flavor="wigner",
        q=2,
        labels=[label],
        generator=gen,
        target=FreeFamilySpec({label: (lam, alpha)}, centered=True),
        uniform_support=False,
        exact=False,
    )


# -- configs ---------------------------------------------------------------------


@dataclass
class FamilyConfig:
    """Parsed family configuration (the ``verify`` input document)."""

    builder: str
    q: int = 2
    lam: Dict[Hashable, float] = field(default_factory=lambda: {1: 1.0})
    alpha: Dict[Hashable, float] = field(default_factory=dict)
    n_list: Tuple[int, ...] = (8, 64)
    max_order: int = 6
    seed: int = 0
    equal_param: bool = False
    cells_per_block: int = 1
    theorem: Optional[str] = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "FamilyConfig":
        def labels(m):
            return {_label(k): float(v) for k, v in (m or {}).items()}

        try:
            lam = d["lambda"]
            lam = labels(lam) if isinstance(lam, Mapping) else {1: float(lam)}
            return cls(
                builder=str(d["builder"]),
                q=int(d.get("q", 2)),
                lam=lam,
                alpha=labels(d.get("alpha")),
                n_list=tuple(int(n) for n in d.get("n_list", (8, 64))),
                max_order=int(d.get("max_order", 6)),
                seed=int(d.get("seed", 0)),
                equal_param=bool(d.get("equal_param", False)),
                cells_per_block=int(d.get("cells_per_block", 1)),
                theorem=d.get("theorem"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DomainError(f"malformed family config: {exc!r}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = {str(k): v for k, v in d.pop("lam").items()}
        d["alpha"] = {str(k): v for k, v in d["alpha"].items()}
        d["n_list"] = list(self.n_list)
        return d


def _label(key):
    try:
        return int(key)
    except (TypeError, ValueError):
        return key


def family_from_config(cfg: FamilyConfig) -> KernelFamily:
    alphas = {k: cfg.alpha.get(k, 1.0) for k in cfg.lam}
    if cfg.builder == "exact_wigner":
        return family_exact_wigner(cfg.lam, cfg.q, alphas, cfg.equal_param)
    if cfg.builder == "perturbed_wigner":
        if cfg.q != 2:
            raise DomainError("the perturbed family is built for q = 2")
        return family_perturbed_wigner(cfg.lam, alphas, cfg.equal_param, seed=cfg.seed)
    if cfg.builder == "poisson_spread":
        return family_poisson_spread(cfg.lam, cfg.q, alphas, cfg.equal_param, cfg.cells_per_block)
    if cfg.builder == "counterexample":
        if len(cfg.lam) != 1:
            raise DomainError("the counterexample family has one label")
        (lab, lam), = cfg.lam.items()
        return family_counterexample(lam, alphas[lab], lab)
    raise DomainError(f"unknown builder {cfg.builder!r}")


# -- condition checks -------------------------------------------------------------


@dataclass
class ConditionRecord:
    """Named nonnegative quantities for one ``(i, j, n)``."""

    kind: str
    i: Hashable
    j: Hashable
    n: int
    values: Dict[str, float]
    targets: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "i": self.i,
            "j": self.j,
            "n": self.n,
            "values": self.values,
            "targets": self.targets,
        }


def default_theorem(family: KernelFamily) -> str:
    kind = "equal" if isinstance(family.target, EqualParamSpec) else "free"
    return f"{family.flavor}-{kind}"


def _check_theorem(family: KernelFamily, theorem: str):
    if theorem not in THEOREMS:
        raise DomainError(f"unknown theorem id {theorem!r}; expected one of {sorted(THEOREMS)}")
    flavor, even, kind = THEOREMS[theorem]
    if family.flavor != flavor:
        raise DomainError(f"{theorem} concerns {flavor} integrals, family is {family.flavor}")
    if even and family.q % 2:
        raise DomainError(f"{theorem} needs an even order q, family has q={family.q}")
    want = EqualParamSpec if kind == "equal" else FreeFamilySpec
    if not isinstance(family.target, want):
        raise DomainError(f"{theorem} needs a {kind} target")


def _m(kernels, flavor) -> float:
    return moment(kernels, flavor, "words").value


def check_fmt_conditions(family: KernelFamily, i, j, n: int, theorem: Optional[str] = None) -> ConditionRecord:
    """
    Residuals of the second-, third- and fourth-order moment conditions.

    Keys: ``covariance`` (``|<f_i, f_j> - target|``), and either ``fourth`` /
    ``third`` (pure moments, ``i == j`` for free targets) or ``mixed_fourth`` /
    ``mixed_third`` (``phi(I_i^2 I_j^2)`` and ``phi(I_i I_j^2)``).
    """
    theorem = theorem or default_theorem(family)
    _check_theorem(family, theorem)
    t = family.target
    fi, fj = family.kernel(n, i), family.kernel(n, j)
    cov = inner(fi, fj)
    targets: Dict[str, float] = {"covariance": float(target_moment(t, [i, j]))}
    computed: Dict[str, float] = {"covariance": cov}
    fl = family.flavor
    if isinstance(t, FreeFamilySpec) and i == j:
        computed["fourth"] = _m([fi] * 4, fl)
        targets["fourth"] = float(target_moment(t, [i] * 4))
        computed["third"] = _m([fi] * 3, fl)
        targets["third"] = float(target_moment(t, [i] * 3))
    else:
        computed["mixed_fourth"] = _m([fi, fi, fj, fj], fl)
        targets["mixed_fourth"] = float(target_moment(t, [i, i, j, j]))
        computed["mixed_third"] = _m([fi, fj, fj], fl)
        targets["mixed_third"] = float(target_moment(t, [i, j, j]))
    residuals = {k: abs(computed[k] - targets[k]) for k in computed}
    return ConditionRecord("moments", i, j, n, residuals, targets)


def check_contraction_conditions(family: KernelFamily, i, j, n: int) -> ConditionRecord:
    """
    Contraction norms whose vanishing characterizes the moment conditions.

    Kernels are divided by their ``alpha`` first.  Keys are ``arc[r]`` for
    ``‖f_i ⌢_r f_j‖``, ``star[r]`` for ``‖f_i ⋆_r^{r-1} f_j‖`` (Poisson only),
    and ``arc_fixed[q/2]`` / ``star_fixed[(q+1)/2]`` for the distance of the
    middle contraction from ``f_j``.  The fixed-point key replaces the plain
    one whenever it applies: on the diagonal for free targets, for every pair
    for equal-parameter targets.
    """
    q = family.q
    fi = family.kernel(n, i) / family.alpha(i)
    fj = family.kernel(n, j) / family.alpha(j)
    fixed = i == j or isinstance(family.target, EqualParamSpec)
    poisson = family.flavor == "poisson"
    out: Dict[str, float] = {}
    for r in range(1, q):
        h = arc_contract(fi, fj, r)
        if fixed and q % 2 == 0 and 2 * r == q:
            out[f"arc_fixed[{r}]"] = norm(h - fj)
        else:
            out[f"arc[{r}]"] = norm(h)
    if poisson:
        for r in range(1, q + 1):
            h = star_contract(fi, fj, r)
            if fixed and q % 2 == 1 and 2 * r == q + 1:
                out[f"star_fixed[{r}]"] = norm(h - fj)
            else:
                out[f"star[{r}]"] = norm(h)
    return ConditionRecord("contractions", i, j, n, out)


def check_em_vanishing(family: KernelFamily, chi: Sequence[Hashable], n: int) -> float:
    """Largest ``|word value|`` over balanced words outside the partition alphabet."""
    if family.flavor != "wigner" or family.q % 2:
        raise DomainError("E_m words are defined for Wigner families of even order")
    m = len(chi)
    kernels = [family.kernel(n, c) for c in chi]
    best = 0.0
    for w in enumerate_words(family.q, m, "E"):
        g = eval_arc_word(kernels, w)
        best = max(best, abs(g.value))
    return best


# -- verification -----------------------------------------------------------------


def label_words(labels: Sequence[Hashable], max_order: int, min_order: int = 1) -> List[Tuple[Hashable, ...]]:
    return [w for m in range(min_order, max_order + 1) for w in product(labels, repeat=m)]


@dataclass
class MomentRow:
    n: int
    word: Tuple[Hashable, ...]
    computed: float
    target: float

    @property
    def error(self) -> float:
        return abs(self.computed - self.target)


@dataclass
class ConvergenceReport:
    """Outcome of :func:`verify`; serializes deterministically."""

    family: str
    flavor: str
    q: int
    theorem: str
    target: dict
    n_list: List[int]
    max_order: int
    tolerance: float
    exact: bool
    verdict: bool
    moments: List[MomentRow]
    conditions: List[ConditionRecord]
    contractions: List[ConditionRecord]
    hypotheses: Dict[str, object]
    failures: List[str]
    runtime: Optional[float] = None

    def max_error(self, n: Optional[int] = None) -> float:
        rows = [r for r in self.moments if n is None or r.n == n]
        return max((r.error for r in rows), default=0.0)

    def to_dict(self) -> dict:
        d = {
            "family": self.family,
            "flavor": self.flavor,
            "q": self.q,
            "theorem": self.theorem,
            "target": self.target,
            "n_list": self.n_list,
            "max_order": self.max_order,
            "tolerance": self.tolerance,
            "exact_family": self.exact,
            "verdict": "pass" if self.verdict else "fail",
            "failures": self.failures,
            "hypotheses": self.hypotheses,
            "max_moment_error": {str(n): self.max_error(n) for n in self.n_list},
            "conditions": [c.to_dict() for c in self.conditions],
            "contractions": [c.to_dict() for c in self.contractions],
            "moments": [
                {"n": r.n, "word": list(r.word), "computed": r.computed, "target": r.target, "error": r.error}
                for r in self.moments
            ],
        }
        if self.runtime is not None:
            d["runtime_seconds"] = self.runtime
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=str)

    def moment_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "word", "computed", "target", "error"])
        for r in self.moments:
            w.writerow([r.n, " ".join(map(str, r.word)), repr(r.computed), repr(r.target), repr(r.error)])
        return buf.getvalue()


def estimate_word_count(family: KernelFamily, max_order: int, n_count: int) -> int:
    per = count_arc_words if family.flavor == "wigner" else count_star_words
    L = len(family.labels)
    return n_count * sum(L**m * per(family.q, m) for m in range(2, max_order + 1))


def _rate_ok(e_a: float, e_b: float, n_a: int, n_b: int, floor: float) -> bool:
    return e_b <= e_a * (n_a / n_b) ** (2.0 / 3.0) + floor


def verify(
    family: KernelFamily,
    max_order: int = 6,
    n_list: Sequence[int] = (8, 64),
    tolerance: float = 1e-9,
    theorem: Optional[str] = None,
    word_cap: int = DEFAULT_WORD_CAP,
    workers: int = 1,
    timing: bool = False,
) -> ConvergenceReport:
    """
    Certify joint-moment convergence of ``family`` to its target.

    Every label word of length ``<= max_order`` is evaluated at every ``n`` in
    ``n_list``.  Exact families pass when every error is within
    ``tolerance * max(1, |target|)`` at every ``n``.  Other families pass when
    each moment error, moment-condition residual and contraction norm shrinks
    between consecutive ``n`` at least like ``n^{-2/3}`` (a factor 4 per
    eightfold increase of ``n``), up to an additive ``tolerance``.

    Raises
    ------
    ResourceLimitError
        If the estimated number of contraction words exceeds ``word_cap``.
    """
    if max_order < 2:
        raise DomainError("max_order must be >= 2")
    n_list = sorted(int(n) for n in n_list)
    if not n_list or n_list[0] < 1:
        raise DomainError("n_list must contain positive integers")
    theorem = theorem or default_theorem(family)
    _check_theorem(family, theorem)
    est = estimate_word_count(family, max_order, len(n_list))
    if est > word_cap:
        raise ResourceLimitError(
            f"verify would evaluate about {est} contraction words (cap {word_cap})",
            cost={"words": est, "cap": word_cap, "labels": len(family.labels), "max_order": max_order},
        )
    start = time.perf_counter()
    words = label_words(family.labels, max_order)
    targets = {w: float(target_moment(family.target, w)) for w in words}

    rows: List[MomentRow] = []
    conditions: List[ConditionRecord] = []
    contractions: List[ConditionRecord] = []
    symmetric = True
    sup_bound, support = 0.0, 0.0
    pairs = [(i, j) for i in family.labels for j in family.labels]
    for n in n_list:
        ks = family.kernels(n)
        for f in ks.values():
            symmetric &= f.is_symmetric(atol=1e-12 * max(1.0, bounds(f).sup_bound))
            b = bounds(f)
            sup_bound, support = max(sup_bound, b.sup_bound), max(support, b.support_measure)

        def job(w, ks=ks):
            if len(w) < 2:
                return 0.0
            return _m([ks[c] for c in w], family.flavor)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                values = list(ex.map(job, words))
        else:
            values = [job(w) for w in words]
        rows.extend(MomentRow(n, w, v, targets[w]) for w, v in zip(words, values))
        conditions.extend(check_fmt_conditions(family, i, j, n, theorem) for i, j in pairs)
        contractions.extend(check_contraction_conditions(family, i, j, n) for i, j in pairs)
        log.info("verified n=%d (%d words)", n, len(words))

    failures: List[str] = []
    if family.exact:
        for r in rows:
            if r.error > tolerance * max(1.0, abs(r.target)):
                failures.append(f"moment {list(r.word)} at n={r.n}: error {r.error:.3e}")
        for c in conditions:
            for k, v in c.values.items():
                if v > tolerance * max(1.0, abs(c.targets.get(k, 0.0))):
                    failures.append(f"{k} residual ({c.i},{c.j}) at n={c.n}: {v:.3e}")
    else:
        by_n = {n: {r.word: r.error for r in rows if r.n == n} for n in n_list}
        cond = {(c.n, c.i, c.j): c.values for c in conditions}
        for a, b in zip(n_list, n_list[1:]):
            for w in words:
                if not _rate_ok(by_n[a][w], by_n[b][w], a, b, tolerance):
                    failures.append(f"moment {list(w)}: error {by_n[a][w]:.3e} at n={a} -> {by_n[b][w]:.3e} at n={b}")
            for i, j in pairs:
                for k, va in cond[(a, i, j)].items():
                    vb = cond[(b, i, j)][k]
                    if not _rate_ok(va, vb, a, b, tolerance):
                        failures.append(f"{k} residual ({i},{j}): {va:.3e} at n={a} -> {vb:.3e} at n={b}")
        if len(n_list) < 2:
            failures.append("a decay check needs at least two values of n")

    hypotheses = {
        "uniform_support_declared": family.uniform_support,
        "symmetric_kernels": bool(symmetric),
        "max_sup_bound": sup_bound,
        "max_support_measure": support,
    }
    if family.flavor == "poisson" and not family.uniform_support:
        hypotheses["note"] = "support grows with n; the bounded-support hypothesis is not met"
    return ConvergenceReport(
        family=family.name,
        flavor=family.flavor,
        q=family.q,
        theorem=theorem,
        target=limit_spec_to_dict(family.target),
        n_list=list(n_list),
        max_order=max_order,
        tolerance=tolerance,
        exact=family.exact,
        verdict=not failures,
        moments=rows,
        conditions=conditions,
        contractions=contractions,
        hypotheses=hypotheses,
        failures=failures,
        runtime=(time.perf_counter() - start) if timing else None,
    )


# -- exact moments at non-integer rank --------------------------------------------


def _lagrange_at(xs: Sequence[int], ys: Sequence[Fraction], x: Fraction) -> Fraction:
    total = Fraction(0)
    for k, (xk, yk) in enumerate(zip(xs, ys)):
        term = Fraction(yk)
        for l, xl in enumerate(xs):
            if l != k:
                term *= Fraction(x - xl, xk - xl)
        total += term
    return total


def exact_wigner_moment(lam, chi: Sequence[Hashable], alphas=None) -> float:
    """
    Moment of the ``q = 2`` exact Wigner family at a common rank ``lam``.

    For integer ranks the moment is a polynomial in the rank of degree at most
    ``len(chi) // 2`` (one factor per block of a singleton-free partition).
    Non-integer ``lam`` is handled by evaluating the family at the integer
    ranks ``1 .. len(chi)//2 + 1`` and interpolating exactly in rationals.
    """
    labels = sorted(set(chi), key=repr)
    m = len(chi)
    alphas = {lab: 1.0 for lab in labels} if alphas is None else alphas

    def at(rank: int) -> float:
        fam = family_exact_wigner({lab: rank for lab in labels}, 2, {lab: alphas[lab] for lab in labels})
        if m < 2:
            return 0.0
        return _m([fam.kernel(1, c) for c in chi], "wigner")

    lam_f = Fraction(str(lam))
    if lam_f.denominator == 1:
        return at(int(lam_f))
    xs = list(range(1, m // 2 + 2))
    ys = [Fraction(at(x)) for x in xs]
    return float(_lagrange_at(xs, ys, lam_f))
