"""Causal matrices, causal sets and their combinatorics.

A configuration over ``n`` naturally labelled elements is stored as a single
Python integer: bit ``k`` holds the relation of the ``k``-th pair in
lexicographic order ``(1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n)``.
Labels are 1-based in every public signature and in serialized text;
internal tables are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ResourceLimitError, UsageError

MAX_CARDINALITY = 7


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    """Bit index of the relation ``i < j`` (1-based labels) among ``n`` elements."""
    if not (1 <= i < j <= n):
        raise UsageError(f"pair ({i}, {j}) is not a valid 1 <= i < j <= {n} pair")
    return (i - 1) * (2 * n - i) // 2 + (j - i - 1)


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    """All 0-based pairs ``(i, j)``, ``i < j``, in bit order."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _pair_table(n: int) -> np.ndarray:
    table = np.full((n, n), -1, dtype=np.int64)
    for k, (i, j) in enumerate(pair_list(n)):
        table[i, j] = k
    return table


@lru_cache(maxsize=None)
def triple_list(n: int) -> tuple[tuple[int, int, int], ...]:
    """Bit indices ``(b_ij, b_jk, b_ik)`` for every 0-based triple ``i < j < k``."""
    t = _pair_table(n)
    return tuple(
        (int(t[i, j]), int(t[j, k]), int(t[i, k]))
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(j + 1, n)
    )


@lru_cache(maxsize=None)
def interval_table(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """For each pair bit ``b_km``: the ``(b_kl, b_lm)`` bit pairs with ``k < l < m``."""
    t = _pair_table(n)
    return tuple(
        tuple((int(t[k, l]), int(t[l, m])) for l in range(k + 1, m))
        for k, m in pair_list(n)
    )


@dataclass(frozen=True)
class CausalMatrix:
    """Strict upper triangle of a naturally labelled relation matrix.

    No transitivity is implied; use :func:`count_violations` to ask.
    """

    n: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError("cardinality must be at least 1")
        if not (0 <= self.bits < (1 << self.q)):
            raise UsageError(f"bit pattern {self.bits} does not fit {self.q} pairs")

    @property
    def q(self) -> int:
        return n_pairs(self.n)

    def related(self, i: int, j: int) -> bool:
        """Whether ``i`` precedes ``j`` (1-based labels, ``i < j``)."""
        return bool(self.bits >> pair_index(i, j, self.n) & 1)

    def flip(self, k: int) -> CausalMatrix:
        return CausalMatrix(self.n, self.bits ^ (1 << k))

    def bit_list(self) -> list[int]:
        return [self.bits >> k & 1 for k in range(self.q)]

    def to_array(self) -> np.ndarray:
        """Full ``n x n`` 0/1 matrix, 0-based."""
        out = np.zeros((self.n, self.n), dtype=np.int8)
        for k, (i, j) in enumerate(pair_list(self.n)):
            out[i, j] = self.bits >> k & 1
        return out

    @classmethod
    def from_bit_list(cls, n: int, values: Sequence[int]) -> CausalMatrix:
        if len(values) != n_pairs(n):
            raise UsageError(f"expected {n_pairs(n)} bits, got {len(values)}")
        return cls(n, sum(1 << k for k, v in enumerate(values) if v))

    @classmethod
    def from_relations(cls, n: int, relations: Iterable[tuple[int, int]]) -> CausalMatrix:
        """Build from 1-based ``(i, j)`` pairs meaning ``i`` precedes ``j``."""
        bits = 0
        for i, j in relations:
            bits |= 1 << pair_index(i, j, n)
        return cls(n, bits)

    @classmethod
    def from_array(cls, a: np.ndarray) -> CausalMatrix:
        n = a.shape[0]
        return cls.from_bit_list(n, [int(a[i, j] != 0) for i, j in pair_list(n)])

    def to_string(self) -> str:
        return f"{self.n}:" + "".join(str(b) for b in self.bit_list())

    @classmethod
    def from_string(cls, text: str) -> CausalMatrix:
        head, sep, body = text.strip().partition(":")
        if not sep or not head.isdigit() or set(body) - {"0", "1"}:
            raise UsageError(f"cannot parse causal matrix {text!r}")
        return cls.from_bit_list(int(head), [int(c) for c in body])

    def __str__(self) -> str:
        return self.to_string()


def count_violations(m: CausalMatrix | int, n: int | None = None) -> int:
    """Number of triples ``i < j < k`` with ``i<j``, ``j<k`` related but ``i<k`` not.

    Accepts either a :class:`CausalMatrix` or a raw bit pattern with ``n``.
    """
    bits, n = _unpack(m, n)
    r = 0
    for b_ij, b_jk, b_ik in triple_list(n):
        if bits >> b_ij & 1 and bits >> b_jk & 1 and not bits >> b_ik & 1:
            r += 1
    return r


def is_transitive(m: CausalMatrix | int, n: int | None = None) -> bool:
    bits, n = _unpack(m, n)
    for b_ij, b_jk, b_ik in triple_list(n):
        if bits >> b_ij & 1 and bits >> b_jk & 1 and not bits >> b_ik & 1:
            return False
    return True


def _unpack(m: CausalMatrix | int, n: int | None) -> tuple[int, int]:
    if isinstance(m, CausalMatrix):
        return m.bits, m.n
    if n is None:
        raise UsageError("cardinality required with a raw bit pattern")
    return int(m), n


@dataclass(frozen=True)
class CausalSet:
    """A causal matrix that is known to be transitive."""

    matrix: CausalMatrix

    def __post_init__(self) -> None:
        r = count_violations(self.matrix)
        if r:
            raise UsageError(f"{self.matrix} breaks transitivity in {r} triple(s)")

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def bits(self) -> int:
        return self.matrix.bits

    @classmethod
    def from_bits(cls, n: int, bits: int) -> CausalSet:
        return cls(CausalMatrix(n, bits))

    @classmethod
    def from_relations(cls, n: int, relations: Iterable[tuple[int, int]]) -> CausalSet:
        return cls(CausalMatrix.from_relations(n, relations))

    @classmethod
    def from_string(cls, text: str) -> CausalSet:
        return cls(CausalMatrix.from_string(text))

    @classmethod
    def antichain(cls, n: int) -> CausalSet:
        return cls(CausalMatrix(n, 0))

    @classmethod
    def chain(cls, n: int) -> CausalSet:
        return cls(CausalMatrix(n, (1 << n_pairs(n)) - 1))

    def to_string(self) -> str:
        return self.matrix.to_string()

    def __str__(self) -> str:
        return self.matrix.to_string()


def _successor_rows(bits: int, n: int) -> list[int]:
    rows = [0] * n
    for k, (i, j) in enumerate(pair_list(n)):
        if bits >> k & 1:
            rows[i] |= 1 << j
    return rows


def _rows_to_bits(rows: list[int], n: int) -> int:
    bits = 0
    for k, (i, j) in enumerate(pair_list(n)):
        if rows[i] >> j & 1:
            bits |= 1 << k
    return bits


def closure_bits(bits: int, n: int) -> int:
    rows = _successor_rows(bits, n)
    # Warshall; labels are natural so every path runs upward.
    for k in range(n):
        for i in range(k):
            if rows[i] >> k & 1:
                rows[i] |= rows[k]
    return _rows_to_bits(rows, n)


def transitive_closure(m: CausalMatrix) -> CausalSet:
    """Smallest transitive configuration containing every relation of ``m``."""
    return CausalSet(CausalMatrix(m.n, closure_bits(m.bits, m.n)))


def interval_sizes(bits: int, n: int) -> list[int]:
    """Per pair bit: the number of ``l`` with ``k<l`` and ``l<m`` set in ``bits``.

    Counts products on the raw configuration, so it is defined for
    non-transitive inputs as well.
    """
    out = []
    for inner in interval_table(n):
        out.append(sum(1 for a, b in inner if bits >> a & 1 and bits >> b & 1))
    return out


def interval_cardinality(s: CausalSet | CausalMatrix, k: int, m: int) -> int:
    """``|{l : k < l < m}|`` for 1-based labels ``k < m``."""
    mat = s.matrix if isinstance(s, CausalSet) else s
    if not (1 <= k < m <= mat.n):
        raise UsageError(f"pair ({k}, {m}) out of range for n={mat.n}")
    return sum(1 for l in range(k + 1, m) if mat.related(k, l) and mat.related(l, m))


@dataclass(frozen=True)
class AbundanceVector:
    """``counts[j]`` is the number of related pairs with ``j`` elements in between."""

    counts: tuple[int, ...]

    def __getitem__(self, j: int) -> int:
        return self.counts[j]

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


@lru_cache(maxsize=1 << 20)
def abundance_counts(bits: int, n: int) -> tuple[int, ...]:
    counts = [0] * max(n - 1, 0)
    sizes = interval_sizes(bits, n)
    for k, size in enumerate(sizes):
        if bits >> k & 1:
            counts[size] += 1
    return tuple(counts)


def abundances(s: CausalSet) -> AbundanceVector:
    return AbundanceVector(abundance_counts(s.bits, s.n))


def _check_cap(n: int, max_n: int | None) -> None:
    cap = MAX_CARDINALITY if max_n is None else max_n
    if n > cap:
        raise ResourceLimitError(f"cardinality {n} exceeds the configured cap {cap}")
    if n < 1:
        raise UsageError("cardinality must be at least 1")


@lru_cache(maxsize=None)
def causal_bits(n: int, max_n: int | None = None) -> np.ndarray:
    """Sorted bit patterns of every causal set on ``n`` elements.

    Pairs are assigned in bit order and a partial assignment is pruned as
    soon as it closes a violating triple; the pair ``(j,k)`` is the last of
    every triple ``(i,j,k)`` to be assigned, so the check is exact. The
    frontier of surviving prefixes is expanded one pair at a time in bulk.
    """
    _check_cap(n, max_n)
    t = _pair_table(n)
    frontier = np.zeros(1, dtype=np.int64)
    for k, (j, m) in enumerate(pair_list(n)):
        with_bit = frontier | (1 << k)
        ok = np.ones(with_bit.shape, dtype=bool)
        for i in range(j):
            has_ij = (with_bit >> t[i, j]) & 1
            has_im = (with_bit >> t[i, m]) & 1
            ok &= ~((has_ij == 1) & (has_im == 0))
        frontier = np.concatenate([frontier, with_bit[ok]])
    out = np.sort(frontier)
    out.flags.writeable = False
    return out


def enumerate_causal_sets(n: int, max_n: int | None = None) -> list[CausalSet]:
    """Every causal set on ``n`` naturally labelled elements, ascending by bits."""
    return [CausalSet.from_bits(n, int(b)) for b in causal_bits(n, max_n)]


def random_causal_set(
    n: int, seed: int | np.random.Generator | None = None, density: float = 0.5
) -> CausalSet:
    """Random relation bits with probability ``density``, then transitively closed."""
    rng = np.random.default_rng(seed)
    q = n_pairs(n)
    draws = rng.random(q) < density
    bits = sum(1 << k for k in range(q) if draws[k])
    return CausalSet(CausalMatrix(n, closure_bits(bits, n)))


def write_sets(sets: Iterable[CausalSet | CausalMatrix]) -> str:
    return "".join(f"{s.to_string()}\n" for s in sets)


def read_sets(text: str) -> list[CausalMatrix]:
    return [CausalMatrix.from_string(line) for line in text.splitlines() if line.strip()]
