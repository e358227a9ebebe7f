"""Dense state-vector simulation of first-order Trotterised evolution.

Basis index ``b`` has qubit ``k`` in state ``(b >> k) & 1``, so the index of
a causal matrix's basis state is simply its bit pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .causet import CausalMatrix
from .errors import ResourceLimitError, UsageError
from .pauli import PauliHamiltonian, diagonal_vector

MAX_QUBITS = 21
NORM_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionParams:
    """Number of unit-time Trotter steps; the evolved time equals ``steps``."""

    steps: int

    def __post_init__(self) -> None:
        if int(self.steps) != self.steps or self.steps < 0:
            raise UsageError(f"steps must be a non-negative integer, got {self.steps}")


@dataclass(frozen=True, eq=False)
class StateVector:
    q: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.q,):
            raise UsageError(f"expected {1 << self.q} amplitudes, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise UsageError(f"state is not normalised (norm^2 = {norm})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_qubits(q: int) -> None:
    if q > MAX_QUBITS:
        raise ResourceLimitError(f"{q} qubits exceeds the simulation cap of {MAX_QUBITS}")


def basis_state(m: CausalMatrix) -> StateVector:
    _check_qubits(m.q)
    amps = np.zeros(1 << m.q, dtype=complex)
    amps[m.bits] = 1.0
    return StateVector(m.q, amps)


def mixer_angles(h: PauliHamiltonian) -> np.ndarray:
    """Per-qubit X coefficient (zero where the mixer has no term)."""
    angles = np.zeros(h.q)
    for t in h.mixer_terms:
        angles[t.qubits[0]] += t.coefficient
    return angles


def apply_x_rotations(psi: np.ndarray, q: int, angles: np.ndarray) -> None:
    """In place: ``exp(-i a_k X_k)`` for ``k = 0, 1, ...`` on ``psi`` of shape ``(2^q, ...)``."""
    batch = psi.shape[1:]
    for k in range(q):
        a = angles[k]
        if a == 0.0:
            continue
        c, s = math.cos(a), -1j * math.sin(a)
        view = psi.reshape((1 << (q - k - 1), 2, 1 << k) + batch)
        lo = view[:, 0].copy()
        hi = view[:, 1]
        view[:, 0] = c * lo + s * hi
        hi *= c
        hi += s * lo


def trotter_evolve(
    psi: np.ndarray, q: int, diagonal: np.ndarray, angles: np.ndarray, steps: int
) -> np.ndarray:
    """``steps`` repetitions of the diagonal phase followed by the X rotations.

    ``psi`` may carry trailing batch axes; a fresh array is returned.
    """
    out = np.array(psi, dtype=complex, copy=True)
    phases = np.exp(-1j * diagonal)
    if out.ndim > 1:
        phases = phases.reshape((-1,) + (1,) * (out.ndim - 1))
    for _ in range(steps):
        out *= phases
        apply_x_rotations(out, q, angles)
    return out


def evolve(state: StateVector, h: PauliHamiltonian, params: EvolutionParams) -> StateVector:
    if h.q != state.q:
        raise UsageError(f"Hamiltonian acts on {h.q} qubits, state has {state.q}")
    _check_qubits(state.q)
    out = trotter_evolve(
        state.amplitudes, state.q, diagonal_vector(h), mixer_angles(h), params.steps
    )
    return StateVector(state.q, out)


def measure_distribution(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def cardinality_for_qubits(q: int) -> int:
    n = int(round((1 + math.sqrt(1 + 8 * q)) / 2))
    if n * (n - 1) // 2 != q:
        raise UsageError(f"{q} qubits do not encode the pairs of any cardinality")
    return n


def sample_measurement(
    state: StateVector, seed: int | np.random.Generator | None = None, n: int | None = None
) -> CausalMatrix:
    """Draw one computational-basis outcome as a raw (possibly invalid) configuration."""
    rng = np.random.default_rng(seed)
    probs = measure_distribution(state)
    idx = int(rng.choice(probs.size, p=probs / probs.sum()))
    return CausalMatrix(n if n is not None else cardinality_for_qubits(state.q), idx)


def distribution_csv(state: StateVector, threshold: float = 0.0) -> str:
    """Debug dump: ``index,bitstring,probability`` rows (bitstring in pair order)."""
    probs = measure_distribution(state)
    lines = ["index,bitstring,probability"]
    for idx in np.flatnonzero(probs > threshold):
        bitstring = "".join(str(idx >> k & 1) for k in range(state.q))
        lines.append(f"{idx},{bitstring},{probs[idx]:.17g}")
    return "\n".join(lines) + "\n"
