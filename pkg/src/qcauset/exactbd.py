"""Exact unsmeared 2d action as a cubic pseudo-Boolean polynomial with ancillas.

Variables are the relation bits plus ancillas:

* ``P[k,l,m]`` equal to ``C[k,l] C[l,m]``;
* a ripple-carry counter per pair holding ``Lambda[k,m] = sum_l P[k,l,m]``
  in binary, built one summand at a time with fresh ``c``/``d`` registers;
* ``M[k,m,j]`` indicating ``Lambda[k,m] == j`` for ``j = 0, 1, 2``, built
  from the counter digits through a chain of pairwise ANDs ``y``.

Every consistency constraint is a squared residual times ``lambda``, so the
penalty part vanishes exactly on consistent assignments and is at least
``lambda`` per violated constraint otherwise. The module is evaluated
classically; the qubit counts are far beyond state-vector reach.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .action import bd_action_2d_exact
from .causet import CausalSet, enumerate_causal_sets
from .errors import UsageError, VerificationError

MAX_DEGREE = 3
INDICATOR_LEVELS = (0, 1, 2)
# Value part: 2N - 4 sum_{k<m} (C M0 - 2 M1 + M2), i.e. 2(N - 2 L0 + 4 L1 - 2 L2).
VALUE_WEIGHTS = {0: -4.0, 1: 8.0, 2: -4.0}


class PseudoBooleanPoly:
    """Multilinear polynomial over 0/1 variables, reduced with ``x**2 = x``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[frozenset[int], float] | None = None):
        self.terms: dict[frozenset[int], float] = {}
        for key, c in (terms or {}).items():
            if c != 0.0:
                self.terms[frozenset(key)] = self.terms.get(frozenset(key), 0.0) + float(c)

    @classmethod
    def var(cls, i: int) -> PseudoBooleanPoly:
        return cls({frozenset((i,)): 1.0})

    @classmethod
    def const(cls, c: float) -> PseudoBooleanPoly:
        return cls({frozenset(): c})

    @staticmethod
    def _lift(other) -> PseudoBooleanPoly:
        if isinstance(other, PseudoBooleanPoly):
            return other
        return PseudoBooleanPoly.const(float(other))

    def __add__(self, other) -> PseudoBooleanPoly:
        acc = defaultdict(float, self.terms)
        for key, c in self._lift(other).terms.items():
            acc[key] += c
        return PseudoBooleanPoly({k: c for k, c in acc.items() if c != 0.0})

    __radd__ = __add__

    def __neg__(self) -> PseudoBooleanPoly:
        return PseudoBooleanPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> PseudoBooleanPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> PseudoBooleanPoly:
        return self._lift(other) + (-self)

    def __mul__(self, other) -> PseudoBooleanPoly:
        if not isinstance(other, PseudoBooleanPoly):
            return PseudoBooleanPoly({k: c * float(other) for k, c in self.terms.items()})
        acc: dict[frozenset[int], float] = defaultdict(float)
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                acc[ka | kb] += ca * cb
        return PseudoBooleanPoly({k: c for k, c in acc.items() if c != 0.0})

    __rmul__ = __mul__

    def square(self) -> PseudoBooleanPoly:
        return self * self

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def variables(self) -> set[int]:
        return set().union(*self.terms) if self.terms else set()

    def __len__(self) -> int:
        return len(self.terms)

    def evaluate(self, assignment: Sequence[int] | np.ndarray) -> float:
        """Value at a full 0/1 assignment indexed by variable number."""
        size = len(assignment)
        total = 0.0
        for key, c in self.terms.items():
            prod = 1
            for v in key:
                if v >= size:
                    raise UsageError(f"assignment does not cover variable {v}")
                if not assignment[v]:
                    prod = 0
                    break
            total += c * prod
        return total

    def compile(self) -> CompiledPoly:
        return CompiledPoly.from_poly(self)

    def __repr__(self) -> str:
        return f"PseudoBooleanPoly({len(self.terms)} terms, degree {self.degree})"


@dataclass(frozen=True, eq=False)
class CompiledPoly:
    """Array form for evaluating many assignments at once (degree <= 3)."""

    coeffs: np.ndarray
    index: np.ndarray  # (terms, 3); padding points at the constant-one column

    @classmethod
    def from_poly(cls, poly: PseudoBooleanPoly) -> CompiledPoly:
        if poly.degree > MAX_DEGREE:
            raise UsageError("compiled evaluation supports degree <= 3")
        keys = list(poly.terms)
        idx = np.full((len(keys), MAX_DEGREE), -1, dtype=np.int64)
        for t, key in enumerate(keys):
            for slot, v in enumerate(sorted(key)):
                idx[t, slot] = v
        return cls(np.array([poly.terms[k] for k in keys]), idx)

    def evaluate_many(self, assignments: np.ndarray) -> np.ndarray:
        x = np.asarray(assignments, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        ext = np.concatenate([x, np.ones((x.shape[0], 1))], axis=1)
        prod = ext[:, self.index[:, 0]] * ext[:, self.index[:, 1]] * ext[:, self.index[:, 2]]
        return prod @ self.coeffs


@dataclass(frozen=True)
class AdderStage:
    """Adds one summand to the running binary register of a pair."""

    pair: tuple[int, int]
    summand: int
    register_in: tuple[int, ...]
    sums: tuple[int, ...]
    carries: tuple[int, ...]

    @property
    def register_out(self) -> tuple[int, ...]:
        overflow = len(self.carries) == len(self.register_in)
        return self.sums + ((self.carries[-1],) if overflow else ())


@dataclass
class AncillaLayout:
    """Variable numbering; labels are 1-based, ``relation`` bits come first in pair order."""

    n: int
    names: list[str] = field(default_factory=list)
    relation: dict[tuple[int, int], int] = field(default_factory=dict)
    product: dict[tuple[int, int, int], int] = field(default_factory=dict)
    stages: list[AdderStage] = field(default_factory=list)
    counter: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    and_chain: dict[tuple[int, int, int], tuple[int, ...]] = field(default_factory=dict)
    indicator: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def new(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    @property
    def qubit_count(self) -> int:
        return len(self.names)

    @property
    def ancillas(self) -> range:
        return range(len(self.relation), len(self.names))

    def counts_by_family(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for name in self.names:
            out[name.split("[")[0]] += 1
        return dict(out)


@dataclass(eq=False)
class ExactBDEncoding:
    n: int
    lam: float
    value: PseudoBooleanPoly
    penalty: PseudoBooleanPoly  # unscaled; the Hamiltonian adds lam * penalty
    layout: AncillaLayout

    @property
    def poly(self) -> PseudoBooleanPoly:
        return self.value + self.lam * self.penalty


def _digit_literal(var: int, bit: int) -> PseudoBooleanPoly:
    x = PseudoBooleanPoly.var(var)
    return x if bit else 1 - x


def _pairs(n: int) -> Iterable[tuple[int, int]]:
    return ((k, m) for k in range(1, n + 1) for m in range(k + 1, n + 1))


def build_layout_and_terms(n: int) -> tuple[AncillaLayout, PseudoBooleanPoly, PseudoBooleanPoly]:
    if n < 2:
        raise UsageError("the exact encoding needs n >= 2")
    lay = AncillaLayout(n)
    V = PseudoBooleanPoly.var
    for k, m in _pairs(n):
        lay.relation[k, m] = lay.new(f"C[{k},{m}]")
    penalty = PseudoBooleanPoly()

    for k, m in _pairs(n):
        for l in range(k + 1, m):
            p = lay.product[k, l, m] = lay.new(f"P[{k},{l},{m}]")
            penalty += (V(p) - V(lay.relation[k, l]) * V(lay.relation[l, m])).square()

    for k, m in _pairs(n):
        summands = [lay.product[k, l, m] for l in range(k + 1, m)]
        register: tuple[int, ...] = tuple(summands[:1])
        for count, a in enumerate(summands[1:], start=2):
            width = len(register)
            overflow = count.bit_length() > width
            sums, carries = [], []
            for i in range(width):
                c = lay.new(f"c[{k},{m}:{count}.{i}]")
                sums.append(c)
                carry_in = a if i == 0 else carries[i - 1]
                b = register[i]
                penalty += (
                    V(c) - V(b) - V(carry_in) + 2 * V(b) * V(carry_in)
                ).square()
                if i < width - 1 or overflow:
                    d = lay.new(f"d[{k},{m}:{count}.{i}]")
                    carries.append(d)
                    penalty += (V(d) - V(b) * V(carry_in)).square()
            stage = AdderStage((k, m), a, register, tuple(sums), tuple(carries))
            lay.stages.append(stage)
            register = stage.register_out
        lay.counter[k, m] = register

    value = PseudoBooleanPoly.const(2.0 * n)
    for k, m in _pairs(n):
        digits = lay.counter[k, m]
        width = len(digits)
        for j in INDICATOR_LEVELS:
            mv = lay.indicator[k, m, j] = lay.new(f"M[{k},{m}:{j}]")
            if j >= 1 << width:
                # Unreachable level (including every j > 0 for adjacent labels).
                target = PseudoBooleanPoly.const(0.0)
                lay.and_chain[k, m, j] = ()
            else:
                lits = [_digit_literal(s, j >> i & 1) for i, s in enumerate(digits)]
                if not lits:
                    target = PseudoBooleanPoly.const(1.0)
                    lay.and_chain[k, m, j] = ()
                else:
                    acc = lits[0]
                    chain = []
                    for i, lit in enumerate(lits[1:], start=1):
                        y = lay.new(f"y[{k},{m}:{j}.{i}]")
                        chain.append(y)
                        penalty += (V(y) - acc * lit).square()
                        acc = V(y)
                    lay.and_chain[k, m, j] = tuple(chain)
                    target = acc
            penalty += (V(mv) - target).square()
            weight = VALUE_WEIGHTS[j]
            if j == 0:
                value += weight * V(lay.relation[k, m]) * V(mv)
            else:
                value += weight * V(mv)
    return lay, value, penalty


def default_lambda(value: PseudoBooleanPoly) -> float:
    """Ten times the largest per-variable sum of absolute value-part coefficients."""
    per_var: dict[int, float] = defaultdict(float)
    for key, c in value.terms.items():
        for v in key:
            per_var[v] += abs(c)
    return 10.0 * max(per_var.values(), default=1.0)


def build_exact_bd(n: int, lam: float | None = None) -> tuple[PseudoBooleanPoly, AncillaLayout]:
    """Cubic polynomial (value + ``lam`` * penalties) and its variable layout."""
    enc = build_encoding(n, lam)
    return enc.poly, enc.layout


def build_encoding(n: int, lam: float | None = None) -> ExactBDEncoding:
    layout, value, penalty = build_layout_and_terms(n)
    if lam is None:
        lam = default_lambda(value)
    if lam <= 0:
        raise UsageError("lambda must be positive")
    enc = ExactBDEncoding(n, float(lam), value, penalty, layout)
    deg = enc.poly.degree
    if deg > MAX_DEGREE:
        raise VerificationError(f"encoding has degree {deg} > {MAX_DEGREE}")
    return enc


def consistent_assignment(s: CausalSet, layout: AncillaLayout) -> np.ndarray:
    """The unique zero-penalty completion of the relation bits of ``s``."""
    if s.n != layout.n:
        raise UsageError("causal set and layout cardinalities differ")
    x = np.zeros(layout.qubit_count, dtype=np.int8)
    for (k, m), v in layout.relation.items():
        x[v] = s.matrix.related(k, m)
    for (k, l, m), v in layout.product.items():
        x[v] = x[layout.relation[k, l]] & x[layout.relation[l, m]]
    for st in layout.stages:
        carry = x[st.summand]
        for i, b in enumerate(st.register_in):
            x[st.sums[i]] = x[b] ^ carry
            carry = x[b] & carry
            if i < len(st.carries):
                x[st.carries[i]] = carry
    for (k, m, j), mv in layout.indicator.items():
        digits = layout.counter[k, m]
        lam_km = sum(int(x[d]) << i for i, d in enumerate(digits))
        x[mv] = lam_km == j
        lits = [int(x[d]) == (j >> t & 1) for t, d in enumerate(digits)]
        for i, y in enumerate(layout.and_chain[k, m, j], start=1):
            x[y] = all(lits[: i + 1])
    return x


def evaluate(poly: PseudoBooleanPoly, assignment: Sequence[int] | np.ndarray) -> float:
    return poly.evaluate(assignment)


@dataclass
class VerificationReport:
    n: int
    lam: float
    qubit_count: int
    sets_checked: int
    corruptions_checked: int
    mismatches: list[tuple[str, float, float]] = field(default_factory=list)
    nonzero_penalties: list[tuple[str, float]] = field(default_factory=list)
    corruption_failures: list[tuple[str, str, float]] = field(default_factory=list)
    min_energy_increase: float = float("inf")
    min_safe_lambda: float = 0.0

    @property
    def passed(self) -> bool:
        return not (self.mismatches or self.nonzero_penalties or self.corruption_failures)

    def raise_for_failure(self) -> None:
        if self.passed:
            return
        lines = [f"exact BD encoding failed for n={self.n}:"]
        lines += [f"  value mismatch on {s}: {got} != {want}" for s, got, want in self.mismatches]
        lines += [f"  penalty {p} on consistent {s}" for s, p in self.nonzero_penalties]
        lines += [
            f"  flipping {bit} on {s} changes energy by {d}" for s, bit, d in self.corruption_failures
        ]
        raise VerificationError("\n".join(lines))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} n={self.n} qubits={self.qubit_count} sets={self.sets_checked} "
            f"corruptions={self.corruptions_checked} lambda={self.lam:g} "
            f"min_increase={self.min_energy_increase:g} min_safe_lambda={self.min_safe_lambda:g}"
        )


def verify_encoding(
    n: int,
    lam: float | None = None,
    max_corruptions_per_set: int | None = None,
    seed=None,
    raise_on_failure: bool = False,
    tol: float = 1e-9,
) -> VerificationReport:
    """Check on-shell exactness and single-ancilla-flip penalty soundness.

    All ancilla flips are tried unless ``max_corruptions_per_set`` limits
    them to a random sample per causal set.
    """
    if n > 5:
        raise UsageError("exhaustive verification is limited to n <= 5")
    enc = build_encoding(n, lam)
    lay = enc.layout
    value_c = enc.value.compile()
    penalty_c = enc.penalty.compile()
    rng = np.random.default_rng(seed)
    sets = enumerate_causal_sets(n)
    report = VerificationReport(n, enc.lam, lay.qubit_count, len(sets), 0)
    ancillas = np.array(lay.ancillas)
    safe = 0.0
    for s in sets:
        x = consistent_assignment(s, lay)
        v = float(value_c.evaluate_many(x)[0])
        pen = float(penalty_c.evaluate_many(x)[0])
        want = bd_action_2d_exact(s)
        if abs(v - want) > tol:
            report.mismatches.append((str(s), v, want))
        if abs(pen) > tol:
            report.nonzero_penalties.append((str(s), pen))
        flips = ancillas
        if max_corruptions_per_set is not None and flips.size > max_corruptions_per_set:
            flips = rng.choice(flips, size=max_corruptions_per_set, replace=False)
        if flips.size == 0:
            continue
        batch = np.repeat(x[None, :], flips.size, axis=0)
        batch[np.arange(flips.size), flips] ^= 1
        dv = value_c.evaluate_many(batch) - v
        dp = penalty_c.evaluate_many(batch) - pen
        de = dv + enc.lam * dp
        report.corruptions_checked += int(flips.size)
        report.min_energy_increase = min(report.min_energy_increase, float(de.min()))
        for idx in np.flatnonzero(de <= tol):
            report.corruption_failures.append((str(s), lay.names[flips[idx]], float(de[idx])))
        with np.errstate(divide="ignore", invalid="ignore"):
            need = np.where(dp > 0, -dv / dp, 0.0)
        safe = max(safe, float(need.max()))
    report.min_safe_lambda = safe
    if raise_on_failure:
        report.raise_for_failure()
    return report


def qubit_count(n: int) -> int:
    return build_layout_and_terms(n)[0].qubit_count
