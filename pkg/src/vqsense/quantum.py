"""Dense pure-state simulation of small qubit registers.

Conventions used throughout the package:

* basis index ``k`` encodes qubit 0 as the most significant bit, so for
  ``N = 3`` the amplitude of ``|q0 q1 q2>`` lives at ``k = 4*q0 + 2*q1 + q2``;
* single-qubit rotations are ``R_a(angle) = exp(-i * angle * sigma_a / 2)``;
* global phase is kept as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

MAX_QUBITS = 12

NORM_ATOL = 1e-10

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY2 = np.eye(2, dtype=complex)


class ResourceLimitError(ValueError):
    """Register size outside the supported range."""


class ShapeError(ValueError):
    """Array dimensions do not match the register."""


def _check_num_qubits(num_qubits: int) -> int:
    n = int(num_qubits)
    if n != num_qubits or not 1 <= n <= MAX_QUBITS:
        raise ResourceLimitError(
            f"num_qubits must be an integer in [1, {MAX_QUBITS}], got {num_qubits!r}"
        )
    return n


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes of an ``num_qubits`` register.

    The amplitude array is stored read-only; every operation returns a new
    instance, so values can be shared between threads.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = _check_num_qubits(self.num_qubits)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**n:
            raise ShapeError(
                f"expected {2**n} amplitudes for {n} qubits, got {amps.shape[0]}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dim = amps.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or 2**n != dim:
            raise ShapeError(f"amplitude count must be a power of two >= 2, got {dim}")
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / nrm
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Rotation:
    """Rotation about ``axis`` by ``angle``; ``target=None`` means every qubit."""

    axis: str
    angle: float
    target: Optional[int] = None

    def __post_init__(self):
        axis = str(self.axis).lower()
        if axis not in PAULI:
            raise ValueError(f"rotation axis must be one of x, y, z; got {self.axis!r}")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def is_global(self) -> bool:
        return self.target is None

    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.axis, self.angle)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 matrix of ``exp(-i angle sigma_axis / 2)``."""
    half = 0.5 * angle
    return np.cos(half) * IDENTITY2 - 1j * np.sin(half) * PAULI[axis.lower()]


def apply_single_qubit_gate(amps: np.ndarray, gate: np.ndarray, target: int,
                            num_qubits: int) -> np.ndarray:
    """Apply a 2x2 ``gate`` to ``target``; ``amps`` may carry leading batch axes."""
    batch = amps.shape[:-1]
    psi = amps.reshape(batch + (2**target, 2, 2 ** (num_qubits - target - 1)))
    out = np.einsum("ab,...ibj->...iaj", gate, psi)
    return out.reshape(batch + (2**num_qubits,))


# Up to this size a global gate is applied as one dense Kronecker power.
DENSE_GLOBAL_MAX_QUBITS = 7


@lru_cache(maxsize=256)
def _kron_power(gate_bytes: bytes, num_qubits: int) -> np.ndarray:
    gate = np.frombuffer(gate_bytes, dtype=complex).reshape(2, 2)
    out = gate
    for _ in range(num_qubits - 1):
        out = np.kron(out, gate)
    out.flags.writeable = False
    return out


def global_gate_matrix(gate: np.ndarray, num_qubits: int) -> np.ndarray:
    """``gate`` tensored onto every qubit, as a ``2^N x 2^N`` matrix."""
    g = np.ascontiguousarray(gate, dtype=complex)
    return _kron_power(g.tobytes(), num_qubits)


def apply_global_gate(amps: np.ndarray, gate: np.ndarray, num_qubits: int) -> np.ndarray:
    """Apply the same 2x2 ``gate`` to every qubit (batched like above)."""
    if num_qubits <= DENSE_GLOBAL_MAX_QUBITS:
        return amps @ global_gate_matrix(gate, num_qubits).T
    batch = amps.shape[:-1]
    nb = len(batch)
    psi = amps.reshape(batch + (2,) * num_qubits)
    for q in range(num_qubits):
        psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [nb + q])), 0, nb + q)
    return psi.reshape(batch + (2**num_qubits,))


def apply_two_qubit_gate(amps: np.ndarray, gate: np.ndarray, q1: int, q2: int,
                         num_qubits: int) -> np.ndarray:
    """Apply a 4x4 ``gate`` acting on ``(q1, q2)`` with ``q1`` the high bit."""
    batch = amps.shape[:-1]
    nb = len(batch)
    psi = amps.reshape(batch + (2,) * num_qubits)
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, psi, axes=([2, 3], [nb + q1, nb + q2]))
    out = np.moveaxis(out, [0, 1], [nb + q1, nb + q2])
    return out.reshape(batch + (2**num_qubits,))


def init_zero(num_qubits: int) -> StateVector:
    n = _check_num_qubits(num_qubits)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def plus_state(num_qubits: int) -> StateVector:
    n = _check_num_qubits(num_qubits)
    return StateVector(n, np.full(2**n, 2 ** (-n / 2), dtype=complex))


def ghz_state(num_qubits: int, relative_phase: float = 0.0) -> StateVector:
    """``(|0..0> + e^{i phase} |1..1>) / sqrt(2)``."""
    n = _check_num_qubits(num_qubits)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[-1] = np.exp(1j * relative_phase) / np.sqrt(2)
    return StateVector(n, amps)


def apply_rotation(state: StateVector, rot: Rotation) -> StateVector:
    n = state.num_qubits
    gate = rot.matrix()
    if rot.is_global:
        amps = apply_global_gate(state.amplitudes, gate, n)
    else:
        if not 0 <= rot.target < n:
            raise IndexError(f"rotation target {rot.target} out of range for {n} qubits")
        amps = apply_single_qubit_gate(state.amplitudes, gate, rot.target, n)
    return StateVector(n, amps)


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0))


def apply_dense_unitary(state: StateVector, u: np.ndarray,
                        check_unitary: bool = False) -> StateVector:
    u = np.asarray(u, dtype=complex)
    if u.shape != (state.dim, state.dim):
        raise ShapeError(f"unitary of shape {u.shape} does not act on dimension {state.dim}")
    if check_unitary and not is_unitary(u):
        raise ValueError("matrix is not unitary within 1e-10")
    return StateVector(state.num_qubits, u @ state.amplitudes)


def probabilities(state: StateVector) -> np.ndarray:
    """Computational-basis outcome probabilities ``|a_k|^2``."""
    return np.abs(state.amplitudes) ** 2


def overlap(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``."""
    if a.dim != b.dim:
        raise ShapeError("states act on different registers")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(overlap(a, b)) ** 2


def ghz_fidelity(state: StateVector) -> tuple[float, float]:
    """Fidelity with ``|GHZ_N>``: raw, and maximized over the GHZ relative phase."""
    a0 = state.amplitudes[0]
    a1 = state.amplitudes[-1]
    raw = abs(a0 + a1) ** 2 / 2
    best = (abs(a0) + abs(a1)) ** 2 / 2
    return float(min(raw, 1.0)), float(min(best, 1.0))


@lru_cache(maxsize=None)
def bit_signs(num_qubits: int) -> np.ndarray:
    """``(N, 2^N)`` array of Z eigenvalues: +1 where qubit i is 0, -1 where it is 1."""
    k = np.arange(2**num_qubits)
    shifts = num_qubits - 1 - np.arange(num_qubits)
    bits = (k[None, :] >> shifts[:, None]) & 1
    signs = 1.0 - 2.0 * bits
    signs.flags.writeable = False
    return signs


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (test and benchmarking helper)."""
    n = _check_num_qubits(num_qubits)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))
