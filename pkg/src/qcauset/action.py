"""Benincasa-Dowker actions evaluated from interval abundances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .causet import CausalMatrix, CausalSet, abundance_counts, interval_sizes
from .errors import ConfigError, UsageError

DEFAULT_EPSILON = 0.1

# Layer coefficients C_k for the smearing function, k = 1, 2, ...
# d=4 is read off the smeared 4d action; d=2 off its eps=1 limit.
LAYER_COEFFICIENTS: dict[int, tuple[float, ...]] = {
    2: (1.0, -2.0, 1.0),
    4: (1.0, -9.0, 16.0, -8.0),
}

# (alpha_d, beta_d) normalising the action prefactor.
PREFACTOR_CONSTANTS: dict[int, tuple[float, float]] = {
    2: (-2.0, 4.0),
    4: (-4.0 / math.sqrt(6.0), 4.0 / math.sqrt(6.0)),
}


def c2_d(d: int) -> float:
    """Second smearing coefficient: ``1 - C(d+1, d/2)`` (even) or ``1 - (2d+1)!!/(d+1)!`` (odd)."""
    if d < 2:
        raise UsageError("dimension must be at least 2")
    if d % 2 == 0:
        return 1.0 - math.comb(d + 1, d // 2)
    double_fact = math.prod(range(2 * d + 1, 0, -2))
    return 1.0 - double_fact / math.factorial(d + 1)


@dataclass(frozen=True)
class SmearedActionParams:
    """Constants of the smeared action in ``dimension`` spacetime dimensions.

    ``alpha_d``/``beta_d`` default to the built-in table (d = 2, 4 only);
    for any other dimension they must be given explicitly.
    """

    epsilon: float = DEFAULT_EPSILON
    dimension: int = 4
    length_ratio: float = 1.0
    alpha_d: float | None = None
    beta_d: float | None = None
    c2: float | None = None
    layer_coefficients: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon <= 1.0):
            raise UsageError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.dimension < 2:
            raise UsageError("dimension must be at least 2")
        if (self.alpha_d is None or self.beta_d is None) and self.dimension in PREFACTOR_CONSTANTS:
            a, b = PREFACTOR_CONSTANTS[self.dimension]
            object.__setattr__(self, "alpha_d", a if self.alpha_d is None else self.alpha_d)
            object.__setattr__(self, "beta_d", b if self.beta_d is None else self.beta_d)
        if self.c2 is None:
            object.__setattr__(self, "c2", c2_d(self.dimension))
        if self.layer_coefficients is None and self.dimension in LAYER_COEFFICIENTS:
            object.__setattr__(self, "layer_coefficients", LAYER_COEFFICIENTS[self.dimension])

    def constants(self) -> tuple[float, float]:
        if self.alpha_d is None or self.beta_d is None:
            raise ConfigError(
                f"no built-in alpha_d/beta_d for d={self.dimension}; supply them explicitly"
            )
        return self.alpha_d, self.beta_d

    def with_epsilon(self, epsilon: float) -> SmearedActionParams:
        return replace(self, epsilon=epsilon)


def f4(j: int, epsilon: float) -> float:
    """Smearing weight of an interval with ``j`` interior elements in 4d.

    Written with explicit powers of ``1 - epsilon`` so that ``epsilon = 1``
    evaluates to the unsmeared limit instead of dividing by zero.
    """
    if j < 0:
        raise UsageError("j must be non-negative")
    if not (0.0 < epsilon <= 1.0):
        raise UsageError(f"epsilon must lie in (0, 1], got {epsilon}")
    u = 1.0 - epsilon
    out = u**j
    if j >= 1:
        out -= 9.0 * epsilon * j * u ** (j - 1)
    if j >= 2:
        out += 8.0 * epsilon**2 * j * (j - 1) * u ** (j - 2)
    if j >= 3:
        out -= 4.0 / 3.0 * epsilon**3 * j * (j - 1) * (j - 2) * u ** (j - 3)
    return out


def fd(j: int, epsilon: float, coefficients: tuple[float, ...]) -> float:
    """``(1-e)^j * sum_k C_k binom(j, k-1) (e/(1-e))^(k-1)``, regular at ``e = 1``."""
    u = 1.0 - epsilon
    total = 0.0
    for k, ck in enumerate(coefficients):
        if k > j:
            break
        total += ck * math.comb(j, k) * epsilon**k * u ** (j - k)
    return total


def _counts(s: CausalSet) -> tuple[int, ...]:
    return abundance_counts(s.bits, s.n)


def bd_action_4d(s: CausalSet, epsilon: float = DEFAULT_EPSILON) -> float:
    """Smeared 4d action ``4/sqrt6 sqrt(e) [N - e sum_j f4(j,e) N_j]``."""
    if not (0.0 < epsilon <= 1.0):
        raise UsageError(f"epsilon must lie in (0, 1], got {epsilon}")
    inner = sum(f4(j, epsilon) * nj for j, nj in enumerate(_counts(s)) if nj)
    return 4.0 / math.sqrt(6.0) * math.sqrt(epsilon) * (s.n - epsilon * inner)


def bd_action_smeared(s: CausalSet, params: SmearedActionParams) -> float:
    """Full smeared action in ``params.dimension`` using the layer coefficients."""
    alpha, beta = params.constants()
    if params.layer_coefficients is None:
        raise ConfigError(f"no layer coefficients for d={params.dimension}")
    e, d = params.epsilon, params.dimension
    inner = sum(
        fd(j, e, params.layer_coefficients) * nj for j, nj in enumerate(_counts(s)) if nj
    )
    scale = -alpha * params.length_ratio ** (d - 2) * e ** (2.0 / d)
    return scale * (s.n + beta / alpha * e * inner)


def bd_action_d(s: CausalSet, params: SmearedActionParams) -> float:
    """General-dimension action with ``f_d`` expanded to first order in epsilon."""
    alpha, beta = params.constants()
    e, d = params.epsilon, params.dimension
    slope = params.c2 - 1.0
    inner = sum((1.0 + slope * j * e) * nj for j, nj in enumerate(_counts(s)) if nj)
    scale = -alpha * params.length_ratio ** (d - 2) * e ** (2.0 / d)
    return scale * (s.n + beta / alpha * e * inner)


def bd_action_2d_exact(s: CausalSet) -> float:
    """Unsmeared 2d action ``2(N - 2 L_0 + 4 L_1 - 2 L_2)``; ``L_j`` counts intervals with ``j`` interior points."""
    c = _counts(s) + (0, 0, 0)
    return 2.0 * (s.n - 2 * c[0] + 4 * c[1] - 2 * c[2])


def bd_truncated(
    s: CausalSet | CausalMatrix,
    epsilon: float = DEFAULT_EPSILON,
    d: int = 4,
    params: SmearedActionParams | None = None,
) -> float:
    """Action truncated at the order kept by the qubit Hamiltonian.

    Sums ``C_km (1 + (C_2 - 1) e Lambda_km)`` over pairs where ``Lambda_km``
    counts products ``C_kl C_lm`` on the raw configuration, so the value is
    defined (and matches the Hamiltonian diagonal) on invalid inputs too.
    """
    if params is None:
        params = SmearedActionParams(epsilon=epsilon, dimension=d)
    mat = s.matrix if isinstance(s, CausalSet) else s
    alpha, beta = params.constants()
    e, dim = params.epsilon, params.dimension
    slope = params.c2 - 1.0
    inner = 0.0
    for k, size in enumerate(interval_sizes(mat.bits, mat.n)):
        if mat.bits >> k & 1:
            inner += 1.0 + slope * e * size
    scale = -alpha * params.length_ratio ** (dim - 2) * e ** (2.0 / dim)
    return scale * (mat.n + beta / alpha * e * inner)


def action_for(params: SmearedActionParams, kind: str = "smeared"):
    """Return a ``CausalSet -> float`` callable for the named action variant."""
    if kind == "smeared":
        if params.dimension == 4 and params.length_ratio == 1.0:
            return lambda s: bd_action_4d(s, params.epsilon)
        return lambda s: bd_action_smeared(s, params)
    if kind == "first-order":
        return lambda s: bd_action_d(s, params)
    if kind == "truncated":
        return lambda s: bd_truncated(s, params=params)
    if kind == "exact-2d":
        return bd_action_2d_exact
    raise UsageError(f"unknown action kind {kind!r}")
