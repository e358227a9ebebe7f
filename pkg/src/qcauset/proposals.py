"""Proposal moves for chains over causal sets.

Classical moves act on one relation bit. The quantum move evolves the basis
state of the current set under the combined Hamiltonian and measures it.
Every move may land on an invalid configuration; validity is judged at the
acceptance stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .action import DEFAULT_EPSILON, SmearedActionParams
from .causet import (
    MAX_CARDINALITY,
    CausalMatrix,
    CausalSet,
    causal_bits,
    interval_table,
    is_transitive,
    n_pairs,
)
from .errors import ResourceLimitError, UsageError
from .pauli import (
    GammaConfig,
    PauliHamiltonian,
    build_h_bd,
    build_h_tc,
    combine,
    diagonal_vector,
    term_weights,
)
from .qsim import MAX_QUBITS, trotter_evolve

KINDS = ("relation", "link", "classical-mixed", "quantum")

Range = tuple[float, float]


@dataclass(frozen=True)
class ParameterSample:
    """One draw of the quantum proposal parameters."""

    r_tc: float
    r_bd: float
    steps: int

    @property
    def gamma(self) -> GammaConfig:
        return GammaConfig(self.r_tc, self.r_bd)


def _ascending(r: Sequence[float]) -> tuple:
    lo, hi = r
    return (lo, hi) if lo <= hi else (hi, lo)


@dataclass(frozen=True)
class ProposalStrategy:
    """Which move to use and, for the quantum move, where its parameters come from.

    Ranges are closed intervals; ``r_tc``/``r_bd`` are drawn uniformly, the
    step count uniformly among the integers of ``t_range``. ``tc_scale`` and
    ``bd_scale`` override the default term normalisations.
    """

    kind: str = "quantum"
    r_tc_range: Range = (0.7, 0.9)
    r_bd_range: Range = (0.0, 0.0)
    t_range: tuple[int, int] = (3, 10)
    epsilon: float = DEFAULT_EPSILON
    dimension: int = 4
    penalty: float = 1.0
    mix_weight: float = 0.5
    n_param_samples: int = 10
    tc_scale: float | None = None
    bd_scale: float | None = None
    action_params: SmearedActionParams | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise UsageError(f"unknown proposal kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "r_tc_range", _ascending(self.r_tc_range))
        object.__setattr__(self, "r_bd_range", _ascending(self.r_bd_range))
        object.__setattr__(self, "t_range", _ascending(self.t_range))
        for lo, hi in (self.r_tc_range, self.r_bd_range):
            if lo < 0 or hi > 1:
                raise UsageError("gamma ratios must lie in [0, 1]")
        if self.t_range[0] < 0:
            raise UsageError("step counts must be non-negative")
        if not (0.0 <= self.mix_weight <= 1.0):
            raise UsageError("mix_weight must lie in [0, 1]")
        if self.penalty <= 0:
            raise UsageError("penalty scale must be positive")
        if self.n_param_samples < 1:
            raise UsageError("n_param_samples must be positive")
        if self.action_params is None:
            object.__setattr__(
                self,
                "action_params",
                SmearedActionParams(epsilon=self.epsilon, dimension=self.dimension),
            )

    @classmethod
    def uniform_quantum(cls, **kw) -> ProposalStrategy:
        return cls(kind="quantum", r_bd_range=(0.0, 0.0), **kw)

    @classmethod
    def weighted_quantum(cls, **kw) -> ProposalStrategy:
        return cls(kind="quantum", r_bd_range=(0.02, 0.05), **kw)

    @property
    def is_quantum(self) -> bool:
        return self.kind == "quantum"

    def with_kind(self, kind: str) -> ProposalStrategy:
        return replace(self, kind=kind)

    def draw_parameters(self, seed: int | np.random.Generator | None = None) -> ParameterSample:
        rng = np.random.default_rng(seed)
        r_tc = float(rng.uniform(*self.r_tc_range))
        r_bd = float(rng.uniform(*self.r_bd_range))
        steps = int(rng.integers(self.t_range[0], self.t_range[1] + 1))
        return ParameterSample(r_tc, r_bd, steps)

    def draw_parameter_samples(
        self, seed: int | np.random.Generator | None = None, count: int | None = None
    ) -> list[ParameterSample]:
        """The shared sample list reused for every source set of one experiment."""
        rng = np.random.default_rng(seed)
        return [self.draw_parameters(rng) for _ in range(count or self.n_param_samples)]


def propose_relation(s: CausalSet | CausalMatrix, seed=None) -> CausalMatrix:
    """Flip one relation bit chosen uniformly."""
    rng = np.random.default_rng(seed)
    mat = s.matrix if isinstance(s, CausalSet) else s
    return mat.flip(int(rng.integers(mat.q)))


def is_link(bits: int, n: int, k: int) -> bool:
    if not bits >> k & 1:
        return False
    return not any(bits >> a & 1 and bits >> b & 1 for a, b in interval_table(n)[k])


def link_target(bits: int, n: int, k: int) -> int:
    """Result of the link move on pair ``k``: drop a link, add a safe relation, or stay."""
    if bits >> k & 1:
        return bits ^ (1 << k) if is_link(bits, n, k) else bits
    added = bits | (1 << k)
    return added if is_transitive(added, n) else bits


def propose_link(s: CausalSet | CausalMatrix, seed=None) -> CausalMatrix:
    rng = np.random.default_rng(seed)
    mat = s.matrix if isinstance(s, CausalSet) else s
    k = int(rng.integers(mat.q))
    return CausalMatrix(mat.n, link_target(mat.bits, mat.n, k))


def propose_classical_mixed(
    s: CausalSet | CausalMatrix, seed=None, weight: float = 0.5
) -> CausalMatrix:
    """Relation move with probability ``weight``, link move otherwise."""
    rng = np.random.default_rng(seed)
    if rng.random() < weight:
        return propose_relation(s, rng)
    return propose_link(s, rng)


class QuantumProposer:
    """Evolution machinery for one cardinality, with the component diagonals cached.

    The diagonal of the combined Hamiltonian is the weighted sum of the
    cached ``H_TC`` and ``H_BD`` diagonals, which is exactly the diagonal
    of :func:`qcauset.pauli.combine` by linearity.
    """

    def __init__(self, n: int, strategy: ProposalStrategy):
        self.n = n
        self.q = n_pairs(n)
        if self.q > MAX_QUBITS:
            raise ResourceLimitError(f"{self.q} qubits exceeds the simulation cap of {MAX_QUBITS}")
        self.strategy = strategy
        self.diag_tc = (
            diagonal_vector(build_h_tc(n, strategy.penalty)) if n >= 3 else np.zeros(1 << self.q)
        )
        self.diag_bd = diagonal_vector(build_h_bd(n, params=strategy.action_params))

    def hamiltonian(self, sample: ParameterSample) -> PauliHamiltonian:
        st = self.strategy
        return combine(
            sample.gamma,
            self.n,
            p=st.penalty,
            params=st.action_params,
            tc_scale=st.tc_scale,
            bd_scale=st.bd_scale,
        )

    def diagonal(self, sample: ParameterSample) -> tuple[np.ndarray, float]:
        st = self.strategy
        w = term_weights(sample.gamma, self.n, st.epsilon, st.tc_scale, st.bd_scale)
        return w.tc * self.diag_tc + w.bd * self.diag_bd, w.mix

    def evolve_bits(self, bits: Sequence[int] | np.ndarray, sample: ParameterSample) -> np.ndarray:
        """Amplitudes after evolving each basis state in ``bits``; shape ``(2^q, len(bits))``."""
        diag, mix = self.diagonal(sample)
        idx = np.asarray(bits, dtype=np.int64)
        psi = np.zeros((1 << self.q, idx.size), dtype=complex)
        psi[idx, np.arange(idx.size)] = 1.0
        angles = np.full(self.q, mix)
        return trotter_evolve(psi, self.q, diag, angles, sample.steps)

    def distribution(self, bits: int, sample: ParameterSample) -> np.ndarray:
        return np.abs(self.evolve_bits([bits], sample)[:, 0]) ** 2

    def kernel(
        self, sample: ParameterSample, targets: np.ndarray | None = None, chunk: int | None = None
    ) -> np.ndarray:
        """``K[a, b]`` = probability of measuring valid set ``b`` starting from valid set ``a``."""
        valid = causal_bits(self.n, max(self.n, MAX_CARDINALITY)) if targets is None else targets
        if chunk is None:
            # about 2^22 amplitudes per batch
            chunk = max(1, min(512, (1 << 22) >> self.q))
        out = np.empty((valid.size, valid.size))
        for start in range(0, valid.size, chunk):
            amps = self.evolve_bits(valid[start : start + chunk], sample)
            out[start : start + chunk] = (np.abs(amps[valid]) ** 2).T
        return out


@lru_cache(maxsize=32)
def quantum_proposer(n: int, strategy: ProposalStrategy) -> QuantumProposer:
    return QuantumProposer(n, strategy)


def propose_quantum(
    s: CausalSet | CausalMatrix,
    strategy: ProposalStrategy,
    seed=None,
    sample: ParameterSample | None = None,
) -> CausalMatrix:
    """Evolve the basis state of ``s`` and return one measured configuration."""
    rng = np.random.default_rng(seed)
    mat = s.matrix if isinstance(s, CausalSet) else s
    if sample is None:
        sample = strategy.draw_parameters(rng)
    probs = quantum_proposer(mat.n, strategy).distribution(mat.bits, sample)
    idx = int(rng.choice(probs.size, p=probs / probs.sum()))
    return CausalMatrix(mat.n, idx)


def propose(s: CausalSet | CausalMatrix, strategy: ProposalStrategy, seed=None) -> CausalMatrix:
    rng = np.random.default_rng(seed)
    if strategy.kind == "relation":
        return propose_relation(s, rng)
    if strategy.kind == "link":
        return propose_link(s, rng)
    if strategy.kind == "classical-mixed":
        return propose_classical_mixed(s, rng, strategy.mix_weight)
    return propose_quantum(s, strategy, rng)


def proposal_distribution(
    s: CausalSet | CausalMatrix,
    strategy: ProposalStrategy,
    sample: ParameterSample | None = None,
) -> np.ndarray:
    """Exact proposal probabilities over all ``2^q`` configurations.

    Classical moves are analytic; the quantum move needs a parameter sample.
    """
    mat = s.matrix if isinstance(s, CausalSet) else s
    q, n, bits = mat.q, mat.n, mat.bits
    if q > MAX_QUBITS:
        raise ResourceLimitError(f"{q} qubits exceeds the simulation cap of {MAX_QUBITS}")
    out = np.zeros(1 << q)
    if strategy.kind == "quantum":
        if sample is None:
            raise UsageError("the quantum proposal distribution needs a parameter sample")
        return quantum_proposer(n, strategy).distribution(bits, sample)
    w_rel = {"relation": 1.0, "link": 0.0}.get(strategy.kind, strategy.mix_weight)
    for k in range(q):
        if w_rel:
            out[bits ^ (1 << k)] += w_rel / q
        if w_rel < 1.0:
            out[link_target(bits, n, k)] += (1.0 - w_rel) / q
    return out


def proposal_kernel(
    n: int, strategy: ProposalStrategy, sample: ParameterSample | None = None
) -> np.ndarray:
    """Proposal mass between valid sets only, in enumeration order.

    Row ``a`` sums to the probability of proposing *some* valid set; the
    remainder is invalid mass that a chain treats as staying put.
    """
    valid = causal_bits(n, max(n, MAX_CARDINALITY))
    if strategy.kind == "quantum":
        if sample is None:
            raise UsageError("the quantum proposal kernel needs a parameter sample")
        return quantum_proposer(n, strategy).kernel(sample, valid)
    pos = {int(b): i for i, b in enumerate(valid)}
    q = n_pairs(n)
    w_rel = {"relation": 1.0, "link": 0.0}.get(strategy.kind, strategy.mix_weight)
    out = np.zeros((valid.size, valid.size))
    for a, bits in enumerate(valid):
        bits = int(bits)
        for k in range(q):
            if w_rel:
                b = pos.get(bits ^ (1 << k))
                if b is not None:
                    out[a, b] += w_rel / q
            if w_rel < 1.0:
                out[a, pos[link_target(bits, n, k)]] += (1.0 - w_rel) / q
    return out


def averaged_kernel(
    n: int, strategy: ProposalStrategy, samples: Sequence[ParameterSample] | None = None
) -> np.ndarray:
    if strategy.kind != "quantum":
        return proposal_kernel(n, strategy)
    if not samples:
        raise UsageError("quantum kernels need at least one parameter sample")
    return np.mean([proposal_kernel(n, strategy, s) for s in samples], axis=0)
