"""Exact transition matrices over enumerated causal sets and their spectral gaps."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .causet import MAX_CARDINALITY, CausalSet, causal_bits
from .errors import UsageError, VerificationError
from .mcmc import AcceptanceRule, target_distribution
from .proposals import ParameterSample, ProposalStrategy, averaged_kernel, proposal_kernel

STOCHASTIC_TOL = 1e-10
BALANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic kernel; row/column ``a`` is the ``a``-th enumerated set."""

    n: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.entries, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise UsageError("transition matrix must be square")
        if np.any(t < -STOCHASTIC_TOL):
            raise UsageError("transition matrix has negative entries")
        if np.max(np.abs(t.sum(axis=1) - 1.0), initial=0.0) > STOCHASTIC_TOL:
            raise UsageError("transition matrix rows do not sum to 1")
        object.__setattr__(self, "entries", t)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class GapResult:
    delta: float
    error: float = 0.0
    replicates: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class ScalingFit:
    """``delta ~ exp(-k N)``; ``k > 0`` means the gap decays with cardinality."""

    k: float
    k_error: float
    intercept: float
    cardinalities: tuple[int, ...]
    gaps: tuple[float, ...]


def acceptance_matrix(n: int, rule: AcceptanceRule) -> np.ndarray:
    """Acceptance probability of a proposed move between every pair of valid sets."""
    valid = causal_bits(n, max(n, MAX_CARDINALITY))
    if rule.kind == "uniform-validity":
        return np.ones((valid.size, valid.size))
    sets = [CausalSet.from_bits(n, int(b)) for b in valid]
    action = np.array([rule.action(s) for s in sets])
    logr = -rule.beta * (action[None, :] - action[:, None])
    if rule.weight_hook is not None:
        ref = CausalSet.antichain(n)
        logmu = np.array([rule.log_measure_ratio(ref, s) for s in sets])
        logr = logr + (logmu[None, :] - logmu[:, None])
    return np.exp(np.minimum(logr, 0.0))


def transition_from_kernel(kernel: np.ndarray, acceptance: np.ndarray) -> np.ndarray:
    """Off-diagonal ``K * A``; the diagonal takes every rejected or invalid remainder."""
    t = kernel * acceptance
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, 1.0 - t.sum(axis=1))
    return t


def parameter_samples(
    strategy: ProposalStrategy, seed=None, count: int | None = None
) -> list[ParameterSample]:
    return strategy.draw_parameter_samples(seed, count)


def build_transition_matrix(
    n: int,
    strategy: ProposalStrategy,
    rule: AcceptanceRule,
    samples: Sequence[ParameterSample] | None = None,
    seed=None,
) -> TransitionMatrix:
    """Exact kernel; quantum proposals are averaged over a shared parameter sample list."""
    if strategy.is_quantum and samples is None:
        samples = parameter_samples(strategy, seed)
    kernel = averaged_kernel(n, strategy, samples)
    return TransitionMatrix(n, transition_from_kernel(kernel, acceptance_matrix(n, rule)))


def balance_residuals(t: np.ndarray, nu: np.ndarray) -> tuple[float, float]:
    """Max detailed-balance and stationarity residuals of kernel ``t`` against ``nu``."""
    flow = nu[:, None] * t
    balance = float(np.max(np.abs(flow - flow.T), initial=0.0))
    station = float(np.max(np.abs(nu @ t - nu), initial=0.0))
    return balance, station


def _check_reversible(t: np.ndarray, nu: np.ndarray) -> None:
    balance, station = balance_residuals(t, nu)
    if balance > BALANCE_TOL or station > BALANCE_TOL:
        raise VerificationError(
            f"kernel is not reversible w.r.t. the target law "
            f"(balance {balance:.3g}, stationarity {station:.3g})"
        )


def _gap_from_entries(t: np.ndarray) -> float:
    # Reversible kernels are similar to sqrt(T_ab T_ba), a symmetric matrix.
    sym = np.sqrt(t * t.T)
    np.fill_diagonal(sym, np.diag(t))
    eig = np.linalg.eigvalsh(sym)
    if eig.size == 1:
        return 1.0
    rest = eig[:-1]
    return float(1.0 - max(abs(rest[0]), abs(rest[-1])))


def spectral_gap(
    t: TransitionMatrix | np.ndarray, stationary: np.ndarray, check: bool = True
) -> GapResult:
    """Absolute gap ``1 - max |lambda|`` over all eigenvalues except the unit one."""
    tm = t if isinstance(t, TransitionMatrix) else TransitionMatrix(0, t)
    nu = np.asarray(stationary, dtype=float)
    if nu.shape != (tm.order,):
        raise UsageError("stationary law does not match the matrix order")
    if check:
        _check_reversible(tm.entries, nu)
    return GapResult(_gap_from_entries(tm.entries))


def thermalization_bounds(delta: float, alpha_err: float, min_nu: float) -> tuple[float, float]:
    """``((1/delta - 1) ln(1/(2 alpha)), (1/delta) ln(1/(alpha min_nu)))``."""
    if not (0 < delta <= 1):
        raise UsageError("delta must lie in (0, 1]")
    if not (0 < alpha_err < 1):
        raise UsageError("alpha must lie in (0, 1)")
    if not (0 < min_nu <= 1):
        raise UsageError("min_nu must lie in (0, 1]")
    lower = (1.0 / delta - 1.0) * math.log(1.0 / (2.0 * alpha_err))
    upper = 1.0 / delta * math.log(1.0 / (alpha_err * min_nu))
    return lower, upper


def jackknife_gap(
    kernels: Sequence[np.ndarray], acceptance: np.ndarray, stationary: np.ndarray
) -> GapResult:
    """Leave-one-out gaps of the sample-averaged kernel.

    ``delta`` is the gap of the full average; ``error`` the jackknife
    standard error ``sqrt((m-1)/m sum (d_i - mean)^2)``.
    """
    m = len(kernels)
    if m < 2:
        raise UsageError("the jackknife needs at least two parameter samples")
    stack = np.asarray(kernels, dtype=float)
    total = stack.sum(axis=0)
    full = transition_from_kernel(total / m, acceptance)
    _check_reversible(full, stationary)
    reps = []
    for i in range(m):
        t = transition_from_kernel((total - stack[i]) / (m - 1), acceptance)
        reps.append(_gap_from_entries(t))
    reps_arr = np.array(reps)
    err = math.sqrt((m - 1) / m * float(np.sum((reps_arr - reps_arr.mean()) ** 2)))
    return GapResult(_gap_from_entries(full), err, tuple(reps))


def gap_for(
    n: int,
    strategy: ProposalStrategy,
    rule: AcceptanceRule,
    samples: Sequence[ParameterSample] | None = None,
    seed=None,
) -> GapResult:
    """Gap of one (N, strategy, rule) configuration, with a jackknife error for quantum moves."""
    nu = target_distribution(n, rule)
    acc = acceptance_matrix(n, rule)
    if not strategy.is_quantum:
        t = transition_from_kernel(proposal_kernel(n, strategy), acc)
        return spectral_gap(t, nu)
    if samples is None:
        samples = parameter_samples(strategy, seed)
    kernels = [proposal_kernel(n, strategy, s) for s in samples]
    if len(kernels) == 1:
        t = transition_from_kernel(kernels[0], acc)
        return spectral_gap(t, nu)
    return jackknife_gap(kernels, acc, nu)


def fit_scaling(
    cardinalities: Sequence[int], gaps: Sequence[GapResult | float]
) -> ScalingFit:
    """Least-squares slope of ``ln delta`` against ``N`` with sign flipped."""
    pts = []
    for n, g in zip(cardinalities, gaps):
        d = g.delta if isinstance(g, GapResult) else float(g)
        if d <= 0 or not math.isfinite(d):
            warnings.warn(f"excluding non-positive gap {d} at N={n} from the fit", stacklevel=2)
            continue
        pts.append((n, d))
    if len(pts) < 3:
        raise UsageError("the scaling fit needs at least three positive gaps")
    ns = np.array([p[0] for p in pts], dtype=float)
    logd = np.log([p[1] for p in pts])
    res = stats.linregress(ns, logd)
    k_err = float(res.stderr) if math.isfinite(res.stderr) else 0.0
    return ScalingFit(
        k=float(-res.slope),
        k_error=k_err,
        intercept=float(res.intercept),
        cardinalities=tuple(int(p[0]) for p in pts),
        gaps=tuple(p[1] for p in pts),
    )
