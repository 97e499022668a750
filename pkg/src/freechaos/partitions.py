"""
Set partitions, the non-crossing lattice, and contraction words.

Ground sets are ``{1, ..., n}``.  Partitions are stored canonically: each block
is a sorted tuple and blocks are ordered by their least element.  The text
form is ``"1,5|2,3"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, Hashable, Iterable, List, Sequence, Tuple

from .errors import DomainError, InconsistencyError

__all__ = [
    "Partition",
    "is_noncrossing",
    "enumerate_set_partitions",
    "enumerate_nc",
    "enumerate_nc2",
    "enumerate_nc_ge2",
    "leq_refinement",
    "kernel_partition",
    "ContractionWord",
    "enumerate_words",
    "word_to_partition",
    "partition_to_word",
    "count_R",
    "catalan",
]

Block = Tuple[int, ...]


@dataclass(frozen=True)
class Partition:
    """A partition of ``{1, ..., n}`` in canonical block order."""

    n: int
    blocks: Tuple[Block, ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(int(x) for x in b)) for b in self.blocks), key=lambda b: b[0] if b else 0))
        seen = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks):
            raise DomainError("partition blocks must be nonempty")
        if sorted(seen) != list(range(1, self.n + 1)):
            raise DomainError(f"blocks {blocks} do not partition 1..{self.n}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        blocks = [tuple(b) for b in blocks]
        if n is None:
            n = sum(len(b) for b in blocks)
        return cls(n, tuple(blocks))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse ``"1,5|2,3"``; the empty string is the partition of the empty set."""
        text = text.strip()
        if not text:
            return cls(0, ())
        try:
            blocks = [tuple(int(x) for x in part.split(",")) for part in text.split("|")]
        except ValueError as exc:
            raise DomainError(f"cannot parse partition {text!r}") from exc
        return cls.from_blocks(blocks)

    @classmethod
    def from_labels(cls, labels: Sequence[Hashable]) -> "Partition":
        groups: Dict[Hashable, List[int]] = {}
        for pos, lab in enumerate(labels, start=1):
            groups.setdefault(lab, []).append(pos)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def block_of(self) -> List[int]:
        """``out[x]`` is the block number of element ``x`` (index 0 unused)."""
        out = [-1] * (self.n + 1)
        for k, b in enumerate(self.blocks):
            for x in b:
                out[x] = k
        return out

    @property
    def is_noncrossing(self) -> bool:
        return is_noncrossing(self)

    @property
    def min_block_size(self) -> int:
        return min((len(b) for b in self.blocks), default=0)


#: Alias kept for readability where only non-crossing values appear.
NCPartition = Partition


def is_noncrossing(p: Partition) -> bool:
    """Linear-time stack test for crossings."""
    owner = p.block_of()
    last = {k: b[-1] for k, b in enumerate(p.blocks)}
    first = {k: b[0] for k, b in enumerate(p.blocks)}
    stack: List[int] = []
    for x in range(1, p.n + 1):
        k = owner[x]
        if x == first[k]:
            if x != last[k]:
                stack.append(k)
            continue
        if not stack or stack[-1] != k:
            return False
        if x == last[k]:
            stack.pop()
    return True


def _restricted_growth(n: int):
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i, mx):
        if i == n:
            yield tuple(a)
            return
        for v in range(mx + 2):
            a[i] = v
            yield from rec(i + 1, max(mx, v))

    a[0] = 0
    yield from rec(1, 0)


def enumerate_set_partitions(n: int) -> List[Partition]:
    """All set partitions of ``{1..n}`` (Bell-many), via restricted-growth strings."""
    out = []
    for rgs in _restricted_growth(n):
        blocks: Dict[int, List[int]] = {}
        for pos, b in enumerate(rgs, start=1):
            blocks.setdefault(b, []).append(pos)
        out.append(Partition(n, tuple(tuple(v) for v in blocks.values())))
    return out


@lru_cache(maxsize=None)
def _nc(n: int) -> Tuple[Partition, ...]:
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > 12:
        # Bell(13) is about 2.8e7; filtering beyond that is not desk scale
        raise DomainError("enumeration by filtering is limited to n <= 12")
    return tuple(p for p in enumerate_set_partitions(n) if is_noncrossing(p))


def enumerate_nc(n: int) -> List[Partition]:
    """Non-crossing partitions of ``{1..n}`` (Catalan-many)."""
    return list(_nc(n))


def enumerate_nc2(n: int) -> List[Partition]:
    """Non-crossing pair partitions; empty for odd ``n``."""
    if n % 2:
        return []
    return [p for p in _nc(n) if all(len(b) == 2 for b in p.blocks)]


def enumerate_nc_ge2(n: int) -> List[Partition]:
    """Non-crossing partitions without singleton blocks."""
    return [p for p in _nc(n) if all(len(b) >= 2 for b in p.blocks)]


def leq_refinement(p: Partition, s: Partition) -> bool:
    """True iff every block of ``s`` is a union of blocks of ``p``."""
    if p.n != s.n:
        raise DomainError(f"partitions of different sizes: {p.n} vs {s.n}")
    owner = s.block_of()
    return all(len({owner[x] for x in b}) == 1 for b in p.blocks)


def kernel_partition(chi: Sequence[Hashable]) -> Partition:
    """Positions grouped by equal label."""
    return Partition.from_labels(chi)


def catalan(n: int) -> int:
    from math import comb

    return comb(2 * n, n) // (n + 1)


# -- contraction words --------------------------------------------------------


@dataclass(frozen=True)
class ContractionWord:
    """A word ``(r_1, ..., r_{m-1})`` prescribing an iterated arc contraction of ``m`` order-``q`` kernels."""

    q: int
    r: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if self.q < 1:
            raise DomainError("q must be >= 1")

    @property
    def m(self) -> int:
        return len(self.r) + 1

    def orders(self) -> List[int]:
        """Orders of the partial folds ``G_0, ..., G_{m-1}``."""
        o = [self.q]
        for x in self.r:
            o.append(o[-1] + self.q - 2 * x)
        return o

    def in_A(self) -> bool:
        o = self.q
        for x in self.r:
            if not 0 <= x <= min(self.q, o):
                return False
            o += self.q - 2 * x
        return True

    def in_B(self) -> bool:
        return self.in_A() and 2 * sum(self.r) == self.m * self.q

    def in_D(self) -> bool:
        alphabet = {0, self.q}
        if self.q % 2 == 0:
            alphabet.add(self.q // 2)
        return self.in_B() and all(x in alphabet for x in self.r)

    def in_E(self) -> bool:
        return self.in_B() and not self.in_D()

    def __str__(self):
        return ",".join(map(str, self.r))


def _words(q: int, m: int, balanced: bool):
    """DFS over A_m in lexicographic order, optionally keeping only B_m."""
    out = []
    r = [0] * (m - 1)

    def rec(p, o):
        if p == m - 1:
            if not balanced or o == 0:
                out.append(ContractionWord(q, tuple(r)))
            return
        remaining = m - 1 - p
        for x in range(0, min(q, o) + 1):
            no = o + q - 2 * x
            # the remaining kernels can remove at most q each
            if balanced and (no > q * (remaining - 1) or no < 0):
                continue
            r[p] = x
            rec(p + 1, no)

    rec(0, q)
    return out


def enumerate_words(q: int, m: int, which: str = "B") -> List[ContractionWord]:
    """
    Contraction words of ``m`` order-``q`` kernels in lexicographic order.

    Parameters
    ----------
    which : {"A", "B", "D", "E"}
        ``A``: all legal words; ``B``: words with a scalar result;
        ``D``: words of ``B`` over the alphabet ``{0, q/2, q}``; ``E``: ``B`` minus ``D``.
    """
    if q < 1 or m < 2:
        raise DomainError("need q >= 1 and m >= 2")
    which = which.upper()
    if which == "A":
        return _words(q, m, balanced=False)
    words = _words(q, m, balanced=True)
    if which == "B":
        return words
    if which == "D":
        return [w for w in words if w.in_D()]
    if which == "E":
        return [w for w in words if not w.in_D()]
    raise DomainError(f"unknown word set {which!r}")


def word_to_partition(w: ContractionWord) -> Partition:
    """Stack reading of a word in ``D_m`` as a non-crossing partition without singletons."""
    if w.q % 2 or not w.in_D():
        raise DomainError(f"word {w.r} is not in D_m for q={w.q}")
    half = w.q // 2
    closed: List[List[int]] = []
    stack: List[List[int]] = [[1]]
    for j, x in enumerate(w.r, start=1):
        if x == 0:
            stack.append([j + 1])
            continue
        if not stack:
            raise InconsistencyError(f"word {w.r} contracts against an empty stack")
        stack[-1].append(j + 1)
        if x == w.q:
            closed.append(stack.pop())
        elif x != half:
            raise InconsistencyError("letter outside {0, q/2, q}")
    if stack:
        raise InconsistencyError(f"word {w.r} leaves blocks open")
    p = Partition.from_blocks(closed, n=w.m)
    if p.min_block_size < 2 or not is_noncrossing(p):
        raise InconsistencyError(f"word {w.r} produced {p}")
    return p


def partition_to_word(p: Partition, q: int) -> ContractionWord:
    """Inverse of :func:`word_to_partition` on non-crossing partitions without singletons."""
    if q % 2 or q < 2:
        raise DomainError("partition_to_word needs an even q >= 2")
    if p.n < 2 or p.min_block_size < 2:
        raise DomainError(f"{p} has a singleton block")
    if not is_noncrossing(p):
        raise DomainError(f"{p} is crossing")
    r = [None] * (p.n - 1)
    for b in p.blocks:
        if b[0] > 1:
            r[b[0] - 2] = 0
        for x in b[1:-1]:
            r[x - 2] = q // 2
        r[b[-1] - 2] = q
    w = ContractionWord(q, tuple(r))
    if not w.in_D():
        raise InconsistencyError(f"{p} mapped to {w.r}, which is not in D_m")
    return w


def count_R(m: int, j: int) -> int:
    """Number of non-crossing partitions of ``{1..m}`` without singletons having exactly ``j`` blocks."""
    if m < 1 or j < 0:
        raise DomainError("need m >= 1 and j >= 0")
    return sum(1 for p in enumerate_nc_ge2(m) if len(p) == j)


def all_words_bruteforce(q: int, m: int) -> List[ContractionWord]:
    """Every tuple in ``{0..q}^{m-1}``; a reference for tests of the pruned enumeration."""
    return [ContractionWord(q, r) for r in product(range(q + 1), repeat=m - 1)]
