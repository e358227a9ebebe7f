"""Markov chains over causal sets: acceptance, chain driver, exact target laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .action import SmearedActionParams, action_for
from .causet import (
    MAX_CARDINALITY,
    CausalMatrix,
    CausalSet,
    abundance_counts,
    causal_bits,
    is_transitive,
)
from .errors import UsageError, VerificationError
from .proposals import ProposalStrategy, propose

RULES = ("uniform-validity", "metropolis")

WeightHook = Callable[[CausalSet, CausalSet], float]


@dataclass(frozen=True)
class AcceptanceRule:
    """How a valid proposal is accepted.

    ``weight_hook(old, new)`` returns the measure ratio ``mu(new)/mu(old)``
    multiplying the Metropolis factor; ``None`` means a uniform measure.
    """

    kind: str = "uniform-validity"
    beta: float | None = None
    action_params: SmearedActionParams = field(default_factory=SmearedActionParams)
    action_kind: str = "smeared"
    weight_hook: WeightHook | None = None

    def __post_init__(self) -> None:
        if self.kind not in RULES:
            raise UsageError(f"unknown acceptance rule {self.kind!r}")
        if self.kind == "metropolis" and (self.beta is None or self.beta <= 0):
            raise UsageError("metropolis needs beta > 0")

    @classmethod
    def uniform(cls) -> AcceptanceRule:
        return cls("uniform-validity")

    @classmethod
    def metropolis(
        cls,
        temperature: float,
        epsilon: float = 0.1,
        dimension: int = 4,
        action_kind: str = "smeared",
        weight_hook: WeightHook | None = None,
    ) -> AcceptanceRule:
        if temperature <= 0:
            raise UsageError("temperature must be positive")
        return cls(
            "metropolis",
            1.0 / temperature,
            SmearedActionParams(epsilon=epsilon, dimension=dimension),
            action_kind,
            weight_hook,
        )

    @property
    def temperature(self) -> float | None:
        return None if self.beta is None else 1.0 / self.beta

    def action(self, s: CausalSet) -> float:
        return _cached_action(self.action_params, self.action_kind, s.n, s.bits)

    def log_measure_ratio(self, old: CausalSet, new: CausalSet) -> float:
        if self.weight_hook is None:
            return 0.0
        ratio = float(self.weight_hook(old, new))
        if ratio <= 0:
            return -math.inf
        return math.log(ratio)

    def log_acceptance(self, old: CausalSet, new: CausalSet) -> float:
        """Log of the Metropolis ratio for a valid ``new`` (0 for the uniform rule)."""
        if self.kind == "uniform-validity":
            return 0.0
        return -self.beta * (self.action(new) - self.action(old)) + self.log_measure_ratio(
            old, new
        )

    def acceptance_probability(self, old: CausalSet, new_raw: CausalMatrix) -> float:
        if not is_transitive(new_raw):
            return 0.0
        return math.exp(min(0.0, self.log_acceptance(old, CausalSet(new_raw))))


@lru_cache(maxsize=1 << 20)
def _cached_action(params: SmearedActionParams, kind: str, n: int, bits: int) -> float:
    return action_for(params, kind)(CausalSet.from_bits(n, bits))


def accept(rule: AcceptanceRule, s_old: CausalSet, s_new_raw: CausalMatrix, seed=None) -> bool:
    """Reject invalid configurations; otherwise accept iff ``exp(-beta dS) * mu-ratio > u``."""
    if not is_transitive(s_new_raw):
        return False
    if rule.kind == "uniform-validity":
        return True
    log_ratio = rule.log_acceptance(s_old, CausalSet(s_new_raw))
    if log_ratio >= 0.0:
        return True
    u = np.random.default_rng(seed).random()
    return math.exp(log_ratio) > u


@dataclass
class ChainState:
    current: CausalSet
    step: int = 0
    accepted: int = 0
    rejected_invalid: int = 0
    rejected_metropolis: int = 0


@dataclass
class ChainResult:
    n: int
    samples: list[int]
    acceptance_rate: float
    invalid_rate: float
    actions: np.ndarray
    abundances: np.ndarray
    trace: list[tuple[int, int, float, bool]] = field(repr=False, default_factory=list)

    def sample_sets(self) -> list[CausalSet]:
        return [CausalSet.from_bits(self.n, b) for b in self.samples]

    def trace_csv(self) -> str:
        lines = ["step,set,action,accepted"]
        for step, bits, act, acc in self.trace:
            lines.append(f"{step},{CausalMatrix(self.n, bits)},{act:.17g},{int(acc)}")
        return "\n".join(lines) + "\n"


def run_chain(
    initial: CausalSet,
    strategy: ProposalStrategy,
    rule: AcceptanceRule,
    n_steps: int,
    burn_in: int | None = None,
    thin: int = 1,
    seed=None,
    record_trace: bool = False,
) -> ChainResult:
    """Run one chain; samples are kept after ``burn_in`` every ``thin`` steps.

    A rejected proposal (invalid or failing Metropolis) repeats the current set.
    """
    if burn_in is None:
        burn_in = n_steps // 10
    if n_steps <= burn_in:
        raise UsageError("n_steps must exceed burn_in")
    if thin < 1:
        raise UsageError("thin must be at least 1")
    rng = np.random.default_rng(seed)
    n = initial.n
    state = ChainState(initial)
    samples: list[int] = []
    actions: list[float] = []
    counts: list[tuple[int, ...]] = []
    trace: list[tuple[int, int, float, bool]] = []
    track_action = rule.kind == "metropolis"
    for step in range(1, n_steps + 1):
        proposal = propose(state.current, strategy, rng)
        moved = False
        if not is_transitive(proposal):
            state.rejected_invalid += 1
        elif accept(rule, state.current, proposal, rng):
            state.current = CausalSet(proposal)
            state.accepted += 1
            moved = True
        else:
            state.rejected_metropolis += 1
        state.step = step
        if step > burn_in and (step - burn_in) % thin == 0:
            cur = state.current
            samples.append(cur.bits)
            act = rule.action(cur) if track_action else float("nan")
            actions.append(act)
            counts.append(abundance_counts(cur.bits, n))
            if record_trace:
                trace.append((step, cur.bits, act, moved))
    return ChainResult(
        n=n,
        samples=samples,
        acceptance_rate=state.accepted / n_steps,
        invalid_rate=state.rejected_invalid / n_steps,
        actions=np.asarray(actions),
        abundances=np.asarray(counts, dtype=np.int64).reshape(len(counts), max(n - 1, 0)),
        trace=trace,
    )


def empirical_distribution(samples: Sequence[int | CausalSet], n: int) -> np.ndarray:
    """Normalised histogram of samples over :func:`enumerate_causal_sets` order."""
    valid = causal_bits(n, max(n, MAX_CARDINALITY))
    bits = np.array([s.bits if isinstance(s, CausalSet) else int(s) for s in samples], dtype=np.int64)
    if bits.size == 0:
        raise UsageError("no samples")
    pos = np.searchsorted(valid, bits)
    pos = np.minimum(pos, valid.size - 1)
    if np.any(valid[pos] != bits):
        raise VerificationError("sample outside the enumerated causal sets")
    hist = np.bincount(pos, minlength=valid.size).astype(float)
    return hist / hist.sum()


def action_vector(n: int, params: SmearedActionParams, kind: str = "smeared") -> np.ndarray:
    return np.array(
        [_cached_action(params, kind, n, int(b)) for b in causal_bits(n, max(n, MAX_CARDINALITY))]
    )


def boltzmann_distribution(
    n: int,
    beta: float,
    params: SmearedActionParams | None = None,
    kind: str = "smeared",
    log_measure: Callable[[CausalSet], float] | None = None,
) -> np.ndarray:
    """``nu(C) ~ mu(C) exp(-beta S(C))`` over enumerated sets, normalised."""
    params = params or SmearedActionParams()
    logw = -beta * action_vector(n, params, kind)
    if log_measure is not None:
        logw = logw + np.array(
            [log_measure(CausalSet.from_bits(n, int(b))) for b in causal_bits(n, max(n, MAX_CARDINALITY))]
        )
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def uniform_distribution(n: int) -> np.ndarray:
    size = causal_bits(n, max(n, MAX_CARDINALITY)).size
    return np.full(size, 1.0 / size)


def target_distribution(n: int, rule: AcceptanceRule) -> np.ndarray:
    """Exact stationary law a chain with ``rule`` is built to reach."""
    if rule.kind == "uniform-validity":
        return uniform_distribution(n)
    log_measure = None
    if rule.weight_hook is not None:
        ref = CausalSet.antichain(n)
        log_measure = lambda s: rule.log_measure_ratio(ref, s)  # noqa: E731
    return boltzmann_distribution(n, rule.beta, rule.action_params, rule.action_kind, log_measure)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
