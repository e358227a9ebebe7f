"""Qubit Hamiltonians over relation bits, as sums of Pauli X/Z strings.

Qubit ``k`` carries relation bit ``k`` (see :mod:`qcauset.causet`), with
``C_k = (1 - Z_k) / 2``. Diagonal Hamiltonians keep their identity term so
that their value on a basis state equals the 0/1 formula exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .action import DEFAULT_EPSILON, SmearedActionParams
from .causet import CausalMatrix, interval_table, n_pairs, pair_list, triple_list
from .errors import UsageError

_COEFF_TOL = 1e-15


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    support: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        qubits = [k for k, _ in self.support]
        if len(set(qubits)) != len(qubits):
            raise UsageError(f"repeated qubit in support {self.support}")
        if any(letter not in "XZ" for _, letter in self.support):
            raise UsageError("only X and Z letters are supported")
        object.__setattr__(self, "support", tuple(sorted(self.support)))

    @property
    def is_diagonal(self) -> bool:
        return all(letter == "Z" for _, letter in self.support)

    @property
    def is_mixer(self) -> bool:
        return len(self.support) == 1 and self.support[0][1] == "X"

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.support)

    def z_mask(self) -> int:
        return sum(1 << k for k, letter in self.support if letter == "Z")

    def to_text(self) -> str:
        parts = [repr(float(self.coefficient))]
        parts += [f"{letter}@{k}" for k, letter in self.support]
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> PauliTerm:
        head, *rest = line.split()
        support = []
        for token in rest:
            letter, _, k = token.partition("@")
            support.append((int(k), letter))
        return cls(float(head), tuple(support))


@dataclass(frozen=True)
class PauliHamiltonian:
    """Sum of Pauli terms; each term is either a Z-string or a single X."""

    q: int
    terms: tuple[PauliTerm, ...] = ()

    def __post_init__(self) -> None:
        for t in self.terms:
            if not (t.is_diagonal or t.is_mixer):
                raise UsageError(f"term {t.to_text()} is neither all-Z nor a single X")
            if any(k >= self.q or k < 0 for k in t.qubits):
                raise UsageError(f"term {t.to_text()} acts outside {self.q} qubits")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def diagonal_terms(self) -> tuple[PauliTerm, ...]:
        return tuple(t for t in self.terms if t.is_diagonal)

    @property
    def mixer_terms(self) -> tuple[PauliTerm, ...]:
        return tuple(sorted((t for t in self.terms if t.is_mixer), key=lambda t: t.qubits))

    def scaled(self, factor: float) -> PauliHamiltonian:
        return PauliHamiltonian(
            self.q, tuple(PauliTerm(factor * t.coefficient, t.support) for t in self.terms)
        )

    def __add__(self, other: PauliHamiltonian) -> PauliHamiltonian:
        if other.q != self.q:
            raise UsageError("qubit counts differ")
        return merge(self.q, self.terms + other.terms)

    def to_text(self) -> str:
        return "".join(t.to_text() + "\n" for t in self.terms)

    @classmethod
    def from_text(cls, q: int, text: str) -> PauliHamiltonian:
        return cls(q, tuple(PauliTerm.from_text(l) for l in text.splitlines() if l.strip()))


def merge(q: int, terms: Iterable[PauliTerm]) -> PauliHamiltonian:
    """Combine terms with identical support, dropping exact zeros."""
    acc: dict[tuple[tuple[int, str], ...], float] = defaultdict(float)
    for t in terms:
        acc[t.support] += t.coefficient
    kept = tuple(
        PauliTerm(c, s)
        for s, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0]))
        if abs(c) > _COEFF_TOL
    )
    return PauliHamiltonian(q, kept)


def binary_to_pauli(monomials: Mapping[frozenset[int], float], q: int) -> PauliHamiltonian:
    """Rewrite a multilinear 0/1 polynomial over qubit bits as Z-strings.

    Each product ``prod_{k in S} C_k`` expands to
    ``2^-|S| sum_{T subset S} (-1)^|T| Z_T``.
    """
    terms = []
    for bits, coeff in monomials.items():
        size = len(bits)
        ordered = sorted(bits)
        for r in range(size + 1):
            for sub in combinations(ordered, r):
                c = coeff * (-1) ** r / 2**size
                terms.append(PauliTerm(c, tuple((k, "Z") for k in sub)))
    return merge(q, terms)


def build_h_mix(q: int, coefficient: float = 1.0) -> PauliHamiltonian:
    if q < 1:
        raise UsageError("mixer needs at least one qubit")
    return PauliHamiltonian(q, tuple(PauliTerm(coefficient, ((k, "X"),)) for k in range(q)))


def tc_monomials(n: int, p: float = 1.0) -> dict[frozenset[int], float]:
    """``P C_ij C_jk (1 - C_ik)`` summed over triples, as 0/1 monomials."""
    mono: dict[frozenset[int], float] = defaultdict(float)
    for b_ij, b_jk, b_ik in triple_list(n):
        mono[frozenset((b_ij, b_jk))] += p
        mono[frozenset((b_ij, b_jk, b_ik))] -= p
    return dict(mono)


def build_h_tc(n: int, p: float = 1.0) -> PauliHamiltonian:
    """Transitivity penalty: ``p`` times the number of violating triples."""
    if p <= 0:
        raise UsageError("penalty scale must be positive")
    q = n_pairs(n)
    if n < 3:
        return PauliHamiltonian(max(q, 1))
    return binary_to_pauli(tc_monomials(n, p), q)


def bd_monomials(params: SmearedActionParams, n: int) -> dict[frozenset[int], float]:
    """Truncated action ``-a e^(2/d)[N + (b/a) e sum C_km (1 + (C2-1) e Lambda_km)]``."""
    alpha, beta = params.constants()
    e, d = params.epsilon, params.dimension
    scale = -alpha * params.length_ratio ** (d - 2) * e ** (2.0 / d)
    linear = scale * beta / alpha * e
    cubic = linear * (params.c2 - 1.0) * e
    mono: dict[frozenset[int], float] = defaultdict(float)
    mono[frozenset()] += scale * n
    for b_km, inner in enumerate(interval_table(n)):
        mono[frozenset((b_km,))] += linear
        for b_kl, b_lm in inner:
            mono[frozenset((b_km, b_kl, b_lm))] += cubic
    return dict(mono)


def build_h_bd(
    n: int,
    epsilon: float = DEFAULT_EPSILON,
    d: int = 4,
    params: SmearedActionParams | None = None,
) -> PauliHamiltonian:
    """Diagonal Hamiltonian equal to :func:`qcauset.action.bd_truncated` on every basis state."""
    if n < 2:
        raise UsageError("the action Hamiltonian needs n >= 2")
    if params is None:
        params = SmearedActionParams(epsilon=epsilon, dimension=d)
    return binary_to_pauli(bd_monomials(params, n), n_pairs(n))


def diagonal_value(h: PauliHamiltonian, m: CausalMatrix | int) -> float:
    """``<m|H|m>`` for a purely diagonal ``h``, without building any matrix."""
    bits = m.bits if isinstance(m, CausalMatrix) else int(m)
    total = 0.0
    for t in h.terms:
        if not t.is_diagonal:
            raise UsageError("diagonal_value needs a purely diagonal Hamiltonian")
        parity = (bits & t.z_mask()).bit_count() & 1
        total += -t.coefficient if parity else t.coefficient
    return total


def diagonal_vector(h: PauliHamiltonian) -> np.ndarray:
    """Diagonal of the Z-part of ``h`` on all ``2^q`` basis states (X terms ignored)."""
    idx = np.arange(1 << h.q, dtype=np.uint64)
    out = np.zeros(1 << h.q)
    for t in h.diagonal_terms:
        parity = np.bitwise_count(idx & np.uint64(t.z_mask())) & 1
        out += t.coefficient * (1.0 - 2.0 * parity)
    return out


def to_dense(h: PauliHamiltonian) -> np.ndarray:
    """Full ``2^q x 2^q`` matrix; qubit ``k`` is bit ``k`` of the basis index."""
    if h.q > 12:
        raise UsageError("dense materialisation limited to 12 qubits")
    dim = 1 << h.q
    mat = np.diag(diagonal_vector(h)).astype(complex)
    idx = np.arange(dim)
    for t in h.mixer_terms:
        (k,) = t.qubits
        mat[idx ^ (1 << k), idx] += t.coefficient
    return mat


def frobenius_sq(h: PauliHamiltonian) -> float:
    """Squared Frobenius norm per Hilbert-space dimension: sum of squared coefficients."""
    return float(sum(t.coefficient**2 for t in h.terms))


def alpha_bd(q: int, epsilon: float = DEFAULT_EPSILON) -> float:
    """Mixer/action norm ratio ``sqrt(q) / sqrt(4 e^4 q) = 1 / (2 e^2)``."""
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    return 1.0 / (2.0 * epsilon**2)


def alpha_tc(n: int) -> float:
    """``sqrt(q) * C(n, 3) / 8`` with ``q = n(n-1)/2``."""
    if n < 3:
        raise UsageError("the transitivity term needs n >= 3")
    return math.sqrt(n_pairs(n)) * math.comb(n, 3) / 8.0


@dataclass(frozen=True)
class GammaConfig:
    """Relative weights ``(r_tc, r_bd)`` mapped onto the three gammas summing to 1."""

    r_tc: float
    r_bd: float = 0.0

    def __post_init__(self) -> None:
        for name, v in (("r_tc", self.r_tc), ("r_bd", self.r_bd)):
            if not (0.0 <= v <= 1.0):
                raise UsageError(f"{name} must lie in [0, 1], got {v}")

    @property
    def gamma_tc(self) -> float:
        return self.r_tc

    @property
    def gamma_bd(self) -> float:
        return (1.0 - self.r_tc) * self.r_bd

    @property
    def gamma_mix(self) -> float:
        return (1.0 - self.r_tc) * (1.0 - self.r_bd)

    @property
    def gammas(self) -> tuple[float, float, float]:
        return self.gamma_tc, self.gamma_bd, self.gamma_mix


@dataclass(frozen=True)
class Weights:
    """Per-term multipliers actually applied to H_TC, H_BD and H_mix."""

    tc: float
    bd: float
    mix: float


def term_weights(
    g: GammaConfig,
    n: int,
    epsilon: float = DEFAULT_EPSILON,
    tc_scale: float | None = None,
    bd_scale: float | None = None,
) -> Weights:
    q = n_pairs(n)
    a_tc = tc_scale if tc_scale is not None else (alpha_tc(n) if n >= 3 else 0.0)
    a_bd = bd_scale if bd_scale is not None else alpha_bd(q, epsilon)
    return Weights(g.gamma_tc * a_tc, g.gamma_bd * a_bd, g.gamma_mix)


def combine(
    g: GammaConfig,
    n: int,
    epsilon: float = DEFAULT_EPSILON,
    p: float = 1.0,
    *,
    dimension: int = 4,
    params: SmearedActionParams | None = None,
    tc_scale: float | None = None,
    bd_scale: float | None = None,
) -> PauliHamiltonian:
    """``gTC aTC H_TC + gBD aBD H_BD + gmix H_mix``; ``r_bd = 0`` gives the uniform sampler."""
    q = n_pairs(n)
    if params is None:
        params = SmearedActionParams(epsilon=epsilon, dimension=dimension)
    w = term_weights(g, n, params.epsilon, tc_scale, bd_scale)
    terms: list[PauliTerm] = []
    if w.tc and n >= 3:
        terms += build_h_tc(n, p).scaled(w.tc).terms
    if w.bd:
        terms += build_h_bd(n, params=params).scaled(w.bd).terms
    if w.mix:
        terms += build_h_mix(q, w.mix).terms
    return merge(q, terms)


def pair_label(k: int, n: int) -> str:
    i, j = pair_list(n)[k]
    return f"C{i + 1},{j + 1}"
