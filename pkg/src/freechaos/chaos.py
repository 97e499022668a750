"""
Wigner and Poisson chaos algebras over step kernels.

A :class:`ChaosElement` is a finite sum ``sum_q I(f_q)`` of multiple integrals
tagged with a flavor: ``"wigner"`` (integrals against a free Brownian motion)
or ``"poisson"`` (integrals against a centered free Poisson random measure).
Products follow the two product formulas; the state is the order-0 part.

Mixed moments ``phi(I(f_1) ... I(f_m))`` are computed either by repeated
multiplication (``path="product"``) or by summing iterated contractions over
balanced contraction words (``path="words"``).  The word path walks words as a
depth-first tree so that common prefixes are contracted once; the final sum
uses :func:`math.fsum`, whose result does not depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from .errors import DomainError, ShapeError
from .kernels import Grid, StepKernel, arc_contract, mirror_adjoint, star_contract
from .partitions import ContractionWord

__all__ = [
    "FLAVORS",
    "ChaosElement",
    "integral",
    "wigner_multiply",
    "poisson_multiply",
    "multiply",
    "adjoint",
    "expectation",
    "StarWord",
    "eval_arc_word",
    "eval_star_fold",
    "eval_star_word",
    "MomentResult",
    "wigner_moment",
    "poisson_moment",
    "moment",
    "wigner_word_values",
    "poisson_word_values",
    "enumerate_star_words",
    "count_arc_words",
    "count_star_words",
]

FLAVORS = ("wigner", "poisson")


def _check_flavor(flavor: str) -> str:
    flavor = flavor.lower()
    if flavor not in FLAVORS:
        raise DomainError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    return flavor


class ChaosElement:
    """
    Finite chaos expansion ``sum_q I(parts[q])``.

    Parameters
    ----------
    flavor : {"wigner", "poisson"}
    grid : Grid
        Shared grid of every part.
    parts : mapping of int to StepKernel, optional
        Zero kernels are dropped.
    """

    __slots__ = ("flavor", "grid", "parts")

    def __init__(self, flavor: str, grid: Grid, parts: Mapping[int, StepKernel] | None = None):
        self.flavor = _check_flavor(flavor)
        self.grid = grid
        clean: Dict[int, StepKernel] = {}
        for q, f in (parts or {}).items():
            if f.grid != grid:
                raise ShapeError("all parts of a chaos element must share one grid")
            if f.order != q:
                raise ShapeError(f"part stored under order {q} has order {f.order}")
            if not f.is_zero:
                clean[q] = f
        self.parts = dict(sorted(clean.items()))

    @classmethod
    def scalar(cls, flavor: str, grid: Grid, value: float) -> "ChaosElement":
        return cls(flavor, grid, {0: StepKernel.scalar(grid, value)})

    @property
    def orders(self) -> List[int]:
        return list(self.parts)

    def _check(self, other: "ChaosElement"):
        if not isinstance(other, ChaosElement):
            raise ShapeError(f"cannot combine a chaos element with {type(other).__name__}")
        if other.flavor != self.flavor:
            raise ShapeError(f"flavor mismatch: {self.flavor} vs {other.flavor}")
        if other.grid != self.grid:
            raise ShapeError("grid mismatch between chaos elements")

    def __add__(self, other: "ChaosElement") -> "ChaosElement":
        self._check(other)
        parts = dict(self.parts)
        for q, f in other.parts.items():
            parts[q] = parts[q] + f if q in parts else f
        return ChaosElement(self.flavor, self.grid, parts)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: float) -> "ChaosElement":
        return ChaosElement(self.flavor, self.grid, {q: f * c for q, f in self.parts.items()})

    def __mul__(self, other):
        if isinstance(other, ChaosElement):
            return multiply(self, other)
        return self.scale(float(other))

    def __rmul__(self, c):
        return self.scale(float(c))

    def allclose(self, other: "ChaosElement", rtol: float = 1e-9, atol: float = 1e-12) -> bool:
        if self.flavor != other.flavor or self.grid != other.grid:
            return False
        zero = lambda q: StepKernel.zeros(self.grid, q)  # noqa: E731
        return all(
            self.parts.get(q, zero(q)).allclose(other.parts.get(q, zero(q)), rtol=rtol, atol=atol)
            for q in set(self.parts) | set(other.parts)
        )

    def __repr__(self):
        return f"ChaosElement({self.flavor}, orders={self.orders})"


def integral(f: StepKernel, flavor: str = "wigner") -> ChaosElement:
    """The multiple integral ``I(f)`` as a one-part chaos element."""
    return ChaosElement(flavor, f.grid, {f.order: f})


def _product(a: ChaosElement, b: ChaosElement, with_star: bool) -> ChaosElement:
    a._check(b)
    acc: Dict[int, StepKernel] = {}

    def add(h: StepKernel):
        if h.is_zero:
            return
        acc[h.order] = acc[h.order] + h if h.order in acc else h

    for f in a.parts.values():
        for g in b.parts.values():
            top = min(f.order, g.order)
            for k in range(top + 1):
                add(arc_contract(f, g, k))
            if with_star:
                for k in range(1, top + 1):
                    add(star_contract(f, g, k))
    return ChaosElement(a.flavor, a.grid, acc)


def wigner_multiply(a: ChaosElement, b: ChaosElement) -> ChaosElement:
    """Product in the Wigner chaos: ``I(f) I(g) = sum_k I(f ⌢_k g)``."""
    if a.flavor != "wigner" or b.flavor != "wigner":
        raise ShapeError("wigner_multiply needs two Wigner elements")
    return _product(a, b, with_star=False)


def poisson_multiply(a: ChaosElement, b: ChaosElement) -> ChaosElement:
    """Product in the Poisson chaos: the Wigner terms plus ``sum_{k>=1} I(f ⋆_k^{k-1} g)``."""
    if a.flavor != "poisson" or b.flavor != "poisson":
        raise ShapeError("poisson_multiply needs two Poisson elements")
    return _product(a, b, with_star=True)


def multiply(a: ChaosElement, b: ChaosElement) -> ChaosElement:
    a._check(b)
    return _product(a, b, with_star=a.flavor == "poisson")


def adjoint(a: ChaosElement) -> ChaosElement:
    return ChaosElement(a.flavor, a.grid, {q: mirror_adjoint(f) for q, f in a.parts.items()})


def expectation(a: ChaosElement) -> float:
    f = a.parts.get(0)
    return f.value if f is not None else 0.0


# -- words --------------------------------------------------------------------


@dataclass(frozen=True)
class StarWord:
    """
    A mixed contraction word: step ``p`` applies ``⋆_{r_p}^{r_p - sigma_p}``.

    ``sigma_p = 0`` is the arc contraction ``⌢_{r_p}`` and ``sigma_p = 1`` the
    star contraction ``⋆_{r_p}^{r_p - 1}``.  A word of length ``k`` folds
    ``k + 1`` kernels.
    """

    q: int
    sigma: Tuple[int, ...]
    r: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(s) for s in self.sigma))
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if len(self.sigma) != len(self.r):
            raise DomainError("sigma and r must have equal length")
        if any(s not in (0, 1) for s in self.sigma):
            raise DomainError("sigma entries must be 0 or 1")

    def orders(self) -> List[int]:
        o = [self.q]
        for s, x in zip(self.sigma, self.r):
            o.append(o[-1] + self.q - 2 * x + s)
        return o

    def in_A(self) -> bool:
        """Every step is a legal contraction of the running fold with an order-``q`` kernel."""
        o = self.q
        for s, x in zip(self.sigma, self.r):
            if not s <= x <= min(self.q, o):
                return False
            o += self.q - 2 * x + s
        return True

    def in_moment_set(self) -> bool:
        """Legal and leaves a fold of order ``q``, ready for the closing full arc contraction."""
        return self.in_A() and self.orders()[-1] == self.q

    def in_D(self) -> bool:
        """
        Words that survive in the limit of an exact family.

        Odd ``q``: letters in ``{0, (q+1)/2, q}``, with ``(q+1)/2`` exactly at
        the star steps.  Even ``q``: no star steps and letters in ``{0, q/2, q}``.
        """
        if not self.in_moment_set():
            return False
        q = self.q
        if q % 2:
            h = (q + 1) // 2
            return all((s == 0 and x in (0, q)) or (s == 1 and x == h) for s, x in zip(self.sigma, self.r))
        return all(s == 0 and x in (0, q // 2, q) for s, x in zip(self.sigma, self.r))

    def in_E(self) -> bool:
        return self.in_moment_set() and not self.in_D()

    @property
    def q_count(self) -> int:
        """Number of full arc contractions (letters ``r = q`` with ``sigma = 0``)."""
        return sum(1 for s, x in zip(self.sigma, self.r) if s == 0 and x == self.q)


def _check_kernels(kernels: Sequence[StepKernel], need: int | None = None):
    if need is not None and len(kernels) != need:
        raise ShapeError(f"expected {need} kernels, got {len(kernels)}")
    if not kernels:
        raise ShapeError("no kernels given")
    g = kernels[0].grid
    for f in kernels:
        if f.grid != g:
            raise ShapeError("kernels live on different grids")


def eval_arc_word(kernels: Sequence[StepKernel], w) -> StepKernel:
    """Left fold ``(..((f_1 ⌢_{r_1} f_2) ⌢_{r_2} f_3)..) ⌢_{r_{m-1}} f_m``."""
    r = w.r if isinstance(w, ContractionWord) else tuple(w)
    _check_kernels(kernels, len(r) + 1)
    g = kernels[0]
    for x, f in zip(r, kernels[1:]):
        if not 0 <= x <= min(g.order, f.order):
            raise DomainError(f"illegal word {r}: cannot contract {x} variables of orders {g.order}, {f.order}")
        g = arc_contract(g, f, x)
    return g


def _star_step(g: StepKernel, f: StepKernel, s: int, x: int) -> StepKernel:
    if s == 0:
        return arc_contract(g, f, x)
    return star_contract(g, f, x)


def eval_star_fold(kernels: Sequence[StepKernel], sw: StarWord) -> StepKernel:
    """Left fold of ``len(sw.r) + 1`` kernels with mixed arc/star steps."""
    _check_kernels(kernels, len(sw.r) + 1)
    g = kernels[0]
    for s, x, f in zip(sw.sigma, sw.r, kernels[1:]):
        lo = s
        if not lo <= x <= min(g.order, f.order):
            raise DomainError(f"illegal star word: step ({s}, {x}) on orders {g.order}, {f.order}")
        g = _star_step(g, f, s, x)
    return g


def eval_star_word(kernels: Sequence[StepKernel], sw: StarWord) -> float:
    """Fold the first ``m - 1`` kernels by ``sw`` and close with a full arc contraction against ``f_m``."""
    _check_kernels(kernels, len(sw.r) + 2)
    g = eval_star_fold(kernels[:-1], sw)
    last = kernels[-1]
    if g.order != last.order:
        raise DomainError(f"fold has order {g.order}; the closing contraction needs order {last.order}")
    return arc_contract(g, last, last.order).value


# -- moment evaluation --------------------------------------------------------


@dataclass(frozen=True)
class MomentResult:
    value: float
    path: str
    word_count: int


def _tail_orders(kernels: Sequence[StepKernel]) -> List[int]:
    """``tail[p]`` = total order of kernels ``p..m-1``."""
    tail = [0] * (len(kernels) + 1)
    for p in range(len(kernels) - 1, -1, -1):
        tail[p] = tail[p + 1] + kernels[p].order
    return tail


def _arc_dfs(kernels: Sequence[StepKernel], visit: Callable[[Tuple[int, ...], float], None]):
    """Depth-first walk over balanced arc words; calls ``visit(word, value)`` on nonzero leaves."""
    m = len(kernels)
    tail = _tail_orders(kernels)
    word: List[int] = []

    def rec(p: int, g: StepKernel):
        # g folds kernels[0..p]
        if p == m - 1:
            if g.order == 0:
                visit(tuple(word), g.value)
            return
        f = kernels[p + 1]
        for x in range(min(g.order, f.order) + 1):
            o = g.order + f.order - 2 * x
            if o > tail[p + 2]:
                continue
            h = arc_contract(g, f, x)
            if h.is_zero:
                continue
            word.append(x)
            rec(p + 1, h)
            word.pop()

    rec(0, kernels[0])


def _star_dfs(kernels: Sequence[StepKernel], visit: Callable[[Tuple[int, ...], Tuple[int, ...], float], None]):
    """Depth-first walk over mixed words whose fold of ``f_1..f_{m-1}`` has the order of ``f_m``."""
    m = len(kernels)
    last = kernels[-1]
    tail = _tail_orders(kernels)
    sig: List[int] = []
    word: List[int] = []

    def rec(p: int, g: StepKernel):
        if p == m - 2:
            if g.order == last.order:
                visit(tuple(sig), tuple(word), arc_contract(g, last, last.order).value)
            return
        f = kernels[p + 1]
        for s in (0, 1):
            for x in range(s, min(g.order, f.order) + 1):
                o = g.order + f.order - 2 * x + s
                # kernels p+2..m-2 can lower the order by at most their total order
                if o > tail[p + 2]:
                    continue
                h = _star_step(g, f, s, x)
                if h.is_zero:
                    continue
                sig.append(s)
                word.append(x)
                rec(p + 1, h)
                sig.pop()
                word.pop()

    rec(0, kernels[0])


def _common_order(kernels: Sequence[StepKernel]) -> int:
    qs = {f.order for f in kernels}
    if len(qs) != 1:
        raise ShapeError(f"kernels must share one order, got {sorted(qs)}")
    q = qs.pop()
    if q < 1:
        raise ShapeError("moment kernels must have order >= 1")
    return q


def count_arc_words(q: int, m: int) -> int:
    """``|B_m|`` by dynamic programming over the running order."""
    ways = {q: 1}
    for step in range(m - 1):
        nxt: Dict[int, int] = {}
        for o, c in ways.items():
            for x in range(min(q, o) + 1):
                no = o + q - 2 * x
                nxt[no] = nxt.get(no, 0) + c
        ways = nxt
    return ways.get(0, 0)


def count_star_words(q: int, m: int) -> int:
    """Number of mixed words of length ``m - 2`` whose fold has order ``q``."""
    ways = {q: 1}
    for step in range(m - 2):
        nxt: Dict[int, int] = {}
        for o, c in ways.items():
            for s in (0, 1):
                for x in range(s, min(q, o) + 1):
                    no = o + q - 2 * x + s
                    nxt[no] = nxt.get(no, 0) + c
        ways = nxt
    return ways.get(q, 0)


def enumerate_star_words(q: int, m: int, which: str = "B") -> List[StarWord]:
    """
    Mixed words indexing the Poisson moment of ``m`` kernels.

    Sorted by number of star steps, then ``sigma``, then ``r``.

    Parameters
    ----------
    which : {"A", "B", "D", "E"}
        ``A``: all legal words of length ``m - 1``; ``B``: words of length
        ``m - 2`` whose fold has order ``q``; ``D``/``E``: the split of ``B``
        by :meth:`StarWord.in_D`.
    """
    if q < 1 or m < 2:
        raise DomainError("need q >= 1 and m >= 2")
    which = which.upper()
    length = m - 1 if which == "A" else m - 2
    out: List[StarWord] = []

    def rec(o, sig, word):
        if len(word) == length:
            if which == "A" or o == q:
                out.append(StarWord(q, tuple(sig), tuple(word)))
            return
        for s in (0, 1):
            for x in range(s, min(q, o) + 1):
                sig.append(s)
                word.append(x)
                rec(o + q - 2 * x + s, sig, word)
                sig.pop()
                word.pop()

    rec(q, [], [])
    if which in ("D", "E"):
        out = [w for w in out if w.in_D() == (which == "D")]
    elif which not in ("A", "B"):
        raise DomainError(f"unknown word set {which!r}")
    out.sort(key=lambda w: (sum(w.sigma), w.sigma, w.r))
    return out


def wigner_word_values(kernels: Sequence[StepKernel]) -> Dict[Tuple[int, ...], float]:
    """Nonzero word contributions to the Wigner moment, keyed by word."""
    _check_kernels(kernels)
    _common_order(kernels)
    out: Dict[Tuple[int, ...], float] = {}
    _arc_dfs(kernels, lambda w, v: out.__setitem__(w, v))
    return dict(sorted(out.items()))


def poisson_word_values(kernels: Sequence[StepKernel]) -> Dict[StarWord, float]:
    """Nonzero word contributions to the Poisson moment, keyed by :class:`StarWord`."""
    _check_kernels(kernels)
    q = _common_order(kernels)
    out: Dict[StarWord, float] = {}
    _star_dfs(kernels, lambda s, w, v: out.__setitem__(StarWord(q, s, w), v))
    return dict(sorted(out.items(), key=lambda kv: (sum(kv[0].sigma), kv[0].sigma, kv[0].r)))


def _product_moment(kernels: Sequence[StepKernel], flavor: str) -> float:
    # Parts of order above what the remaining factors can contract away never
    # reach the order-0 chaos, so they are dropped after every product.
    tail = _tail_orders(kernels)
    acc = integral(kernels[0], flavor)
    for p, f in enumerate(kernels[1:], start=1):
        acc = multiply(acc, integral(f, flavor))
        keep = {q: g for q, g in acc.parts.items() if q <= tail[p + 1]}
        acc = ChaosElement(flavor, acc.grid, keep)
    return expectation(acc)


def moment(kernels: Sequence[StepKernel], flavor: str, path: str = "words") -> MomentResult:
    """``phi(I(f_1) ... I(f_m))`` for kernels of a common order."""
    flavor = _check_flavor(flavor)
    _check_kernels(kernels)
    q = _common_order(kernels)
    m = len(kernels)
    if m < 1:
        raise ShapeError("need at least one kernel")
    if m == 1:
        return MomentResult(0.0, path, 0)
    count = count_arc_words(q, m) if flavor == "wigner" else count_star_words(q, m)
    if path == "product":
        return MomentResult(_product_moment(kernels, flavor), path, count)
    if path != "words":
        raise DomainError(f"unknown moment path {path!r}")
    vals: List[float] = []
    if flavor == "wigner":
        _arc_dfs(kernels, lambda w, v: vals.append(v))
    else:
        _star_dfs(kernels, lambda s, w, v: vals.append(v))
    return MomentResult(math.fsum(vals), path, count)


def wigner_moment(kernels: Sequence[StepKernel], path: str = "words") -> float:
    return moment(kernels, "wigner", path).value


def poisson_moment(kernels: Sequence[StepKernel], path: str = "words") -> float:
    return moment(kernels, "poisson", path).value
