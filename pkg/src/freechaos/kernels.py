"""
Step-function kernels on a uniform grid and their contraction calculus.

A kernel of order ``q`` is a function on ``[0, t_max)^q`` that is constant on
the cells of a uniform grid.  Step functions are closed under tensor products,
arc contractions and star contractions, so every identity of the calculus holds
up to floating-point rounding only (there is no quadrature error).

Coefficients are stored sparsely (a dict from index tuples to values) and
switch to a dense ``numpy`` array once the fill ratio exceeds
:data:`DENSE_FILL_THRESHOLD`.  The switch is invisible to callers.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "DENSE_FILL_THRESHOLD",
    "Grid",
    "StepKernel",
    "KernelBounds",
    "mirror_adjoint",
    "inner",
    "norm",
    "tensor",
    "arc_contract",
    "star_contract",
    "bounds",
    "check_arc_cauchy_schwarz",
    "check_star_bound",
    "refine",
    "kernel_to_dict",
    "kernel_from_dict",
    "dump_kernel",
    "load_kernel",
]

#: Fill ratio above which coefficients are held in a dense array.
DENSE_FILL_THRESHOLD = 0.25
#: Dense storage is never used above this many grid cells.
DENSE_MAX_SIZE = 1 << 20

Index = Tuple[int, ...]


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[0, t_max)`` into ``cells`` equal subintervals."""

    t_max: float
    cells: int

    def __post_init__(self):
        if not (isinstance(self.cells, (int, np.integer)) and self.cells >= 1):
            raise DomainError(f"cells must be a positive integer, got {self.cells!r}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise DomainError(f"t_max must be positive, got {self.t_max!r}")
        object.__setattr__(self, "cells", int(self.cells))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def width(self) -> float:
        return self.t_max / self.cells


class StepKernel:
    """
    Piecewise-constant kernel of a given order on a :class:`Grid`.

    Instances are immutable.  Use the ``from_*`` constructors rather than
    calling ``__init__`` with raw storage.

    Parameters
    ----------
    grid : Grid
    order : int
        Number of variables ``q``; ``0`` means a scalar.
    data : dict or numpy.ndarray
        Either a mapping ``index tuple -> value`` or a dense array of shape
        ``(cells,) * order``.
    """

    __slots__ = ("grid", "order", "_sparse", "_dense", "_prefix_cache")

    def __init__(self, grid: Grid, order: int, data):
        if order < 0:
            raise DomainError("order must be nonnegative")
        self.grid = grid
        self.order = int(order)
        self._prefix_cache = {}
        if isinstance(data, np.ndarray):
            if data.shape != (grid.cells,) * order:
                raise ShapeError(f"dense data has shape {data.shape}, expected {(grid.cells,) * order}")
            self._sparse = None
            self._dense = data
        else:
            self._sparse = data
            self._dense = None
        self._normalize()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_entries(cls, grid: Grid, order: int, entries) -> "StepKernel":
        """Build from a mapping or iterable of ``(index, value)``; repeated indices add up."""
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: Dict[Index, float] = defaultdict(float)
        for idx, val in items:
            idx = tuple(int(i) for i in idx)
            if len(idx) != order:
                raise ShapeError(f"index {idx} does not have length {order}")
            if any(i < 0 or i >= grid.cells for i in idx):
                raise ShapeError(f"index {idx} lies outside a grid with {grid.cells} cells")
            acc[idx] += float(val)
        return cls(grid, order, {k: v for k, v in acc.items() if v != 0.0})

    @classmethod
    def from_dense(cls, grid: Grid, array) -> "StepKernel":
        arr = np.array(array, dtype=float)
        return cls(grid, arr.ndim, arr)

    @classmethod
    def scalar(cls, grid: Grid, value: float) -> "StepKernel":
        value = float(value)
        return cls(grid, 0, {(): value} if value != 0.0 else {})

    @classmethod
    def zeros(cls, grid: Grid, order: int) -> "StepKernel":
        return cls(grid, order, {})

    @classmethod
    def cell_indicator(cls, grid: Grid, cells: Index, value: float = 1.0) -> "StepKernel":
        """``value`` times the indicator of the single grid cell ``cells``."""
        return cls.from_entries(grid, len(cells), [(cells, value)])

    @classmethod
    def unit_cell(cls, grid: Grid, k: int) -> "StepKernel":
        """Order-1 indicator of cell ``k`` normalized to unit L2 norm."""
        return cls.cell_indicator(grid, (k,), grid.width ** -0.5)

    # -- storage ----------------------------------------------------------

    def _normalize(self):
        size = self.grid.cells ** self.order
        if self.order == 0:
            if self._dense is not None:
                v = float(self._dense)
                self._sparse, self._dense = ({(): v} if v != 0.0 else {}), None
            return
        if self._dense is not None:
            nnz = int(np.count_nonzero(self._dense))
            if nnz <= DENSE_FILL_THRESHOLD * size:
                nz = np.nonzero(self._dense)
                vals = self._dense[nz]
                self._sparse = {tuple(int(c) for c in col): float(v) for col, v in zip(zip(*nz), vals)}
                self._dense = None
            else:
                self._dense = np.ascontiguousarray(self._dense, dtype=float)
                self._dense.flags.writeable = False
        elif len(self._sparse) > DENSE_FILL_THRESHOLD * size and size <= DENSE_MAX_SIZE:
            arr = np.zeros((self.grid.cells,) * self.order)
            for idx, v in self._sparse.items():
                arr[idx] = v
            arr.flags.writeable = False
            self._sparse, self._dense = None, arr

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    @property
    def nnz(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return len(self._sparse)

    def items(self) -> Iterator[Tuple[Index, float]]:
        """Nonzero ``(index, value)`` pairs."""
        if self._dense is None:
            yield from self._sparse.items()
        else:
            nz = np.nonzero(self._dense)
            for col, v in zip(zip(*nz), self._dense[nz]):
                yield tuple(int(c) for c in col), float(v)

    def to_dict(self) -> Dict[Index, float]:
        if self._dense is None:
            return dict(self._sparse)
        return dict(self.items())

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return np.array(self._dense)
        if self.grid.cells ** self.order > DENSE_MAX_SIZE:
            raise ShapeError("kernel too large for a dense view")
        arr = np.zeros((self.grid.cells,) * self.order)
        for idx, v in self._sparse.items():
            arr[idx] = v
        return arr

    def __getitem__(self, idx) -> float:
        idx = tuple(idx)
        if self._dense is not None:
            return float(self._dense[idx])
        return self._sparse.get(idx, 0.0)

    def _by_prefix(self, length: int):
        """Group entries by their first ``length`` indices (cached)."""
        table = self._prefix_cache.get(length)
        if table is None:
            table = defaultdict(list)
            for idx, v in self.items():
                table[idx[:length]].append((idx[length:], v))
            table = dict(table)
            self._prefix_cache[length] = table
        return table

    # -- value semantics --------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.nnz == 0

    @property
    def value(self) -> float:
        """The scalar carried by an order-0 kernel."""
        if self.order != 0:
            raise ShapeError("only order-0 kernels carry a scalar value")
        return self._sparse.get((), 0.0)

    def is_symmetric(self, atol: float = 0.0) -> bool:
        return self.allclose(mirror_adjoint(self), rtol=0.0, atol=atol)

    def allclose(self, other: "StepKernel", rtol: float = 1e-9, atol: float = 1e-12) -> bool:
        if self.grid != other.grid or self.order != other.order:
            return False
        a, b = self.to_dict(), other.to_dict()
        for idx in a.keys() | b.keys():
            x, y = a.get(idx, 0.0), b.get(idx, 0.0)
            if abs(x - y) > atol + rtol * max(abs(x), abs(y)):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, StepKernel):
            return NotImplemented
        return self.grid == other.grid and self.order == other.order and self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self):
        kind = "dense" if self.is_dense else "sparse"
        return f"StepKernel(order={self.order}, cells={self.grid.cells}, t_max={self.grid.t_max}, nnz={self.nnz}, {kind})"

    # -- linear structure -------------------------------------------------

    def _check_compatible(self, other: "StepKernel"):
        if self.grid != other.grid:
            raise ShapeError(f"grid mismatch: {self.grid} vs {other.grid}")
        if self.order != other.order:
            raise ShapeError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "StepKernel") -> "StepKernel":
        self._check_compatible(other)
        if self.is_dense and other.is_dense:
            return StepKernel(self.grid, self.order, self._dense + other._dense)
        acc = self.to_dict()
        for idx, v in other.items():
            acc[idx] = acc.get(idx, 0.0) + v
        return StepKernel(self.grid, self.order, {k: v for k, v in acc.items() if v != 0.0})

    def __neg__(self) -> "StepKernel":
        return self * -1.0

    def __sub__(self, other: "StepKernel") -> "StepKernel":
        return self + (-other)

    def __mul__(self, c) -> "StepKernel":
        if isinstance(c, StepKernel):
            return NotImplemented
        c = float(c)
        if c == 0.0:
            return StepKernel.zeros(self.grid, self.order)
        if self.is_dense:
            return StepKernel(self.grid, self.order, self._dense * c)
        return StepKernel(self.grid, self.order, {k: v * c for k, v in self._sparse.items() if v * c != 0.0})

    __rmul__ = __mul__

    def __truediv__(self, c) -> "StepKernel":
        return self * (1.0 / float(c))


@dataclass(frozen=True)
class KernelBounds:
    """Sup bound, measure of the support and measure of the enclosing grid box."""

    sup_bound: float
    support_measure: float
    box_measure: float


def _same_grid(f: StepKernel, g: StepKernel):
    if f.grid != g.grid:
        raise ShapeError(f"grid mismatch: {f.grid} vs {g.grid}")


def mirror_adjoint(f: StepKernel) -> StepKernel:
    """Index reversal ``f*(t_1..t_q) = f(t_q..t_1)`` (real coefficients)."""
    if f.order <= 1:
        return f
    if f.is_dense:
        return StepKernel(f.grid, f.order, np.transpose(f._dense, tuple(range(f.order - 1, -1, -1))))
    return StepKernel(f.grid, f.order, {idx[::-1]: v for idx, v in f.items()})


def inner(f: StepKernel, g: StepKernel) -> float:
    """L2 pairing ``sum f(idx) g(idx) * width**q``."""
    f._check_compatible(g)
    w = f.grid.width ** f.order
    if f.is_dense and g.is_dense:
        return float(np.sum(f._dense * g._dense)) * w
    if f.nnz > g.nnz:
        f, g = g, f
    return sum(v * g[idx] for idx, v in f.items()) * w


def norm(f: StepKernel) -> float:
    if f.is_dense:
        return math.sqrt(float(np.sum(f._dense * f._dense)) * f.grid.width ** f.order)
    return math.sqrt(sum(v * v for _, v in f.items()) * f.grid.width ** f.order)


def tensor(f: StepKernel, g: StepKernel) -> StepKernel:
    """``(f ⊗ g)(u, v) = f(u) g(v)``."""
    _same_grid(f, g)
    if f.order == 0:
        return g * f.value
    if g.order == 0:
        return f * g.value
    size = f.grid.cells ** (f.order + g.order)
    if f.is_dense and g.is_dense and size <= DENSE_MAX_SIZE:
        return StepKernel(f.grid, f.order + g.order, np.multiply.outer(f._dense, g._dense))
    gi = list(g.items())
    return StepKernel(f.grid, f.order + g.order, {u + v: a * b for u, a in f.items() for v, b in gi})


def _einsum_letters(n):
    import string

    letters = string.ascii_letters
    if n > len(letters):
        raise ShapeError("too many tensor axes for a dense contraction")
    return letters[:n]


def arc_contract(f: StepKernel, g: StepKernel, r: int) -> StepKernel:
    """
    Arc contraction of index ``r``.

    Integrates the last ``r`` variables of ``f`` (in reverse order) against the
    first ``r`` variables of ``g``; the result has order ``p_f + p_g - 2r``.
    ``r = 0`` is the tensor product and ``r = p_f = p_g`` the scalar
    ``inner(g, mirror_adjoint(f))``.
    """
    _same_grid(f, g)
    if not 0 <= r <= min(f.order, g.order):
        raise DomainError(f"arc contraction index {r} out of range for orders {f.order}, {g.order}")
    if r == 0:
        return tensor(f, g)
    out_order = f.order + g.order - 2 * r
    scale = f.grid.width ** r
    if f.is_dense and g.is_dense and f.grid.cells ** out_order <= DENSE_MAX_SIZE:
        axes_f = list(range(f.order - 1, f.order - r - 1, -1))
        res = np.tensordot(f._dense, g._dense, axes=(axes_f, list(range(r)))) * scale
        return StepKernel(f.grid, out_order, np.asarray(res, dtype=float))
    split = f.order - r
    table = g._by_prefix(r)
    acc: Dict[Index, float] = defaultdict(float)
    for idx, a in f.items():
        bucket = table.get(idx[split:][::-1])
        if bucket:
            u = idx[:split]
            for v, b in bucket:
                acc[u + v] += a * b
    return StepKernel(f.grid, out_order, {k: v * scale for k, v in acc.items() if v != 0.0})


def star_contract(f: StepKernel, g: StepKernel, p: int) -> StepKernel:
    """
    Star contraction of index ``(p, p - 1)``.

    The variable at position ``order(f) - p`` of ``f`` is identified with the
    variable at position ``p - 1`` of ``g`` (kept, not integrated) and the
    ``p - 1`` variables beyond it are integrated in reverse order.  The result
    has order ``m + n - 2p + 1``.
    """
    _same_grid(f, g)
    if not 1 <= p <= min(f.order, g.order):
        raise DomainError(f"star contraction index {p} out of range for orders {f.order}, {g.order}")
    out_order = f.order + g.order - 2 * p + 1
    scale = f.grid.width ** (p - 1)
    m, n = f.order, g.order
    if f.is_dense and g.is_dense and f.grid.cells ** out_order <= DENSE_MAX_SIZE:
        letters = _einsum_letters(out_order + p - 1)
        t, a, s, v = letters[: m - p], letters[m - p], letters[m - p + 1 : m], letters[m : m + n - p]
        spec = f"{t}{a}{s},{s[::-1]}{a}{v}->{t}{a}{v}"
        res = np.einsum(spec, f._dense, g._dense) * scale
        return StepKernel(f.grid, out_order, np.asarray(res, dtype=float))
    # f(t, a, s_{p-1}..s_1) g(s_1..s_{p-1}, a, v): the reversed tail of f of
    # length p is exactly the length-p prefix of g.
    split = m - p
    table = g._by_prefix(p)
    acc: Dict[Index, float] = defaultdict(float)
    for idx, x in f.items():
        bucket = table.get(idx[split:][::-1])
        if bucket:
            ua = idx[: split + 1]
            for v, y in bucket:
                acc[ua + v] += x * y
    return StepKernel(f.grid, out_order, {k: v * scale for k, v in acc.items() if v != 0.0})


def bounds(f: StepKernel) -> KernelBounds:
    sup = max((abs(v) for _, v in f.items()), default=0.0)
    return KernelBounds(
        sup_bound=sup,
        support_measure=f.nnz * f.grid.width ** f.order,
        box_measure=f.grid.t_max ** f.order,
    )


def check_arc_cauchy_schwarz(f: StepKernel, g: StepKernel, r: int, rtol: float = 1e-9):
    """Return ``(‖f ⌢_r g‖, ‖f‖‖g‖, holds)``."""
    lhs = norm(arc_contract(f, g, r))
    rhs = norm(f) * norm(g)
    return lhs, rhs, lhs <= rhs * (1.0 + rtol) + 1e-300


def check_star_bound(f: StepKernel, g: StepKernel, r: int, rtol: float = 1e-9):
    """
    Return ``(lhs, rhs, holds)`` for the bounded-support star estimate

    ``‖f ⋆_r^{r-1} g‖ <= sqrt(M(f) M(g) (μ(S_f) μ(S_g))^{(q-1)/(2q)} ‖f‖ ‖g‖)``

    with ``S_f = S_g`` the full grid box, which is a cube containing both
    supports.
    """
    if f.order != g.order:
        raise ShapeError("star bound needs kernels of a common order")
    q = f.order
    lhs = norm(star_contract(f, g, r))
    bf, bg = bounds(f), bounds(g)
    rhs = math.sqrt(
        bf.sup_bound * bg.sup_bound * (bf.box_measure * bg.box_measure) ** ((q - 1) / (2 * q)) * norm(f) * norm(g)
    )
    return lhs, rhs, lhs <= rhs * (1.0 + rtol) + 1e-300


def refine(f: StepKernel, factor: int) -> StepKernel:
    """Same step function on a grid with ``factor`` times as many cells."""
    if factor < 1:
        raise DomainError("refinement factor must be >= 1")
    grid = Grid(f.grid.t_max, f.grid.cells * factor)
    if f.order == 0:
        return StepKernel.scalar(grid, f.value)
    subs = list(product(range(factor), repeat=f.order))
    entries = {}
    for idx, v in f.items():
        base = tuple(i * factor for i in idx)
        for off in subs:
            entries[tuple(b + o for b, o in zip(base, off))] = v
    return StepKernel(grid, f.order, entries)


# -- JSON -------------------------------------------------------------------


def kernel_to_dict(f: StepKernel) -> dict:
    return {
        "t_max": f.grid.t_max,
        "cells": f.grid.cells,
        "order": f.order,
        "entries": [{"idx": list(idx), "val": v} for idx, v in sorted(f.items())],
    }


def kernel_from_dict(d: Mapping) -> StepKernel:
    try:
        grid = Grid(float(d["t_max"]), int(d["cells"]))
        order = int(d["order"])
        entries = [(tuple(e["idx"]), float(e["val"])) for e in d["entries"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed kernel document: {exc!r}") from exc
    return StepKernel.from_entries(grid, order, entries)


def dump_kernel(f: StepKernel, path) -> None:
    with open(path, "w") as fh:
        json.dump(kernel_to_dict(f), fh, indent=1)


def load_kernel(path) -> StepKernel:
    with open(path) as fh:
        return kernel_from_dict(json.load(fh))

