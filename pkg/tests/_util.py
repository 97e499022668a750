"""Shared helpers for the test suite: random kernels and independent reference formulas."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from freechaos.kernels import Grid, StepKernel
from freechaos.partitions import enumerate_nc2, enumerate_nc_ge2


def rand_kernel(rng, q, cells=4, nnz=6, t_max=1.0, symmetric=True, grid=None, bound=1.0):
    """Sparse random kernel; ``symmetric`` makes it invariant under index reversal."""
    grid = grid or Grid(t_max, cells)
    ent = {}
    for _ in range(nnz):
        idx = tuple(int(x) for x in rng.integers(0, grid.cells, q))
        v = float(rng.uniform(-bound, bound))
        ent[idx] = v
        if symmetric:
            ent[idx[::-1]] = v
    return StepKernel.from_entries(grid, q, ent)


def rand_dense(rng, q, grid, symmetric=True):
    a = rng.normal(size=(grid.cells,) * q)
    if symmetric and q > 1:
        a = (a + np.transpose(a, tuple(range(q - 1, -1, -1)))) / 2
    return StepKernel.from_dense(grid, a)


@st.composite
def kernels_st(draw, q=None, grid=None, max_cells=4, symmetric=False, max_nnz=8):
    """Hypothesis strategy for small sparse kernels on a shared grid."""
    q = draw(st.integers(0, 3)) if q is None else q
    if grid is None:
        grid = Grid(draw(st.sampled_from([0.5, 1.0, 2.0, 3.0])), draw(st.integers(1, max_cells)))
    idx = st.tuples(*[st.integers(0, grid.cells - 1) for _ in range(q)])
    entries = draw(st.lists(st.tuples(idx, st.floats(-4, 4, allow_nan=False)), max_size=max_nnz))
    ent = {}
    for i, v in entries:
        ent[i] = v
        if symmetric:
            ent[i[::-1]] = v
    return StepKernel.from_entries(grid, q, ent)


def dense_arc(f, g, r):
    """Arc contraction by ``einsum`` straight from the defining sum."""
    F, G = f.to_dense(), g.to_dense()
    letters = "abcdefghijklmnopqrstuvwxyz"
    pf, pg = f.order, g.order
    u = letters[: pf - r]
    s = letters[pf - r : pf]
    v = letters[pf : pf + pg - r]
    out = np.einsum(f"{u}{s[::-1]},{s}{v}->{u}{v}", F, G) * f.grid.width**r
    return out


def dense_star(f, g, p):
    F, G = f.to_dense(), g.to_dense()
    letters = "abcdefghijklmnopqrstuvwxyz"
    m, n = f.order, g.order
    t = letters[: m - p]
    a = letters[m - p]
    s = letters[m - p + 1 : m]
    v = letters[m : m + n - p]
    return np.einsum(f"{t}{a}{s[::-1]},{s}{a}{v}->{t}{a}{v}", F, G) * f.grid.width ** (p - 1)


def trace_moment_q2(kernels):
    """Wigner moment of order-2 kernels via cumulants ``tr(F_1 ... F_k)`` over singleton-free NC partitions."""
    w = kernels[0].grid.width
    mats = [w * k.to_dense() for k in kernels]
    total = 0.0
    for p in enumerate_nc_ge2(len(kernels)):
        term = 1.0
        for b in p.blocks:
            acc = np.eye(mats[0].shape[0])
            for x in b:
                acc = acc @ mats[x - 1]
            term *= np.trace(acc)
        total += term
    return total


def semicircular_moment_q1(kernels):
    """Wigner moment of order-1 kernels: a semicircular family with covariance ``<f_i, f_j>``."""
    w = kernels[0].grid.width
    vecs = [k.to_dense() for k in kernels]
    total = 0.0
    for p in enumerate_nc2(len(kernels)):
        term = 1.0
        for a, b in p.blocks:
            term *= w * float(vecs[a - 1] @ vecs[b - 1])
        total += term
    return total


def poisson_moment_q1(kernels):
    """Poisson moment of order-1 kernels: cumulants ``int f_1 ... f_k`` for ``k >= 2``."""
    w = kernels[0].grid.width
    vecs = [k.to_dense() for k in kernels]
    total = 0.0
    for p in enumerate_nc_ge2(len(kernels)):
        term = 1.0
        for b in p.blocks:
            term *= w * float(np.prod([vecs[x - 1] for x in b], axis=0).sum())
        total += term
    return total


def close(a, b, rtol=1e-9, scale=1.0):
    return abs(a - b) <= rtol * max(abs(a), abs(b), scale)
