"""Weight vectors and the directional phase encoding ``phi_i = alpha_i * theta``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DomainError
from .quantum import ShapeError, StateVector, bit_signs

ENCODING_KINDS = ("uniform", "weighted_central", "custom")


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise DomainError("weights must be a non-empty finite vector")
        if not np.any(w != 0):
            raise DomainError("at least one weight must be nonzero")
        if self.kind not in ENCODING_KINDS:
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def num_qubits(self) -> int:
        return self.weights.shape[0]

    @property
    def norm_sq(self) -> float:
        """``||alpha||^2``."""
        return float(np.dot(self.weights, self.weights))

    @property
    def abs_sum(self) -> float:
        """``S = sum |alpha_i|``."""
        return float(np.sum(np.abs(self.weights)))

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(c * self.weights, "custom")

    def to_list(self) -> list[float]:
        return [float(x) for x in self.weights]


def make_uniform(num_qubits: int) -> WeightVector:
    if num_qubits < 1:
        raise DomainError(f"need at least one qubit, got {num_qubits}")
    return WeightVector(np.full(num_qubits, 1.0 / num_qubits), "uniform")


def make_weighted_central(num_qubits: int) -> WeightVector:
    """Centre qubit (index 0) weighted 1, peripherals 0.5."""
    if num_qubits < 2:
        raise DomainError(f"weighted-central encoding needs >= 2 qubits, got {num_qubits}")
    w = np.full(num_qubits, 0.5)
    w[0] = 1.0
    return WeightVector(w, "weighted_central")


def make_custom(weights) -> WeightVector:
    return WeightVector(np.asarray(weights, dtype=float), "custom")


def make_weights(kind: str, num_qubits: int, weights=None) -> WeightVector:
    if kind == "uniform":
        return make_uniform(num_qubits)
    if kind == "weighted_central":
        return make_weighted_central(num_qubits)
    if kind == "custom":
        if weights is None:
            raise ValueError("custom encoding needs explicit weights")
        alpha = make_custom(weights)
        if alpha.num_qubits != num_qubits:
            raise ShapeError(
                f"custom weights have length {alpha.num_qubits}, register has {num_qubits}"
            )
        return alpha
    raise ValueError(f"unknown encoding kind {kind!r}; expected one of {ENCODING_KINDS}")


def phase_diagonal(phases: np.ndarray) -> np.ndarray:
    """Diagonal of ``prod_i exp(-i phases[..., i] Z_i / 2)``.

    ``phases`` has shape ``(..., N)``; the result has shape ``(..., 2^N)``.
    """
    phases = np.asarray(phases, dtype=float)
    signs = bit_signs(phases.shape[-1])
    return np.exp(-0.5j * (phases @ signs))


def encode(state: StateVector, alpha: WeightVector, theta: float) -> StateVector:
    if alpha.num_qubits != state.num_qubits:
        raise ShapeError(
            f"weight vector of length {alpha.num_qubits} for a {state.num_qubits}-qubit state"
        )
    diag = phase_diagonal(alpha.weights * theta)
    return StateVector(state.num_qubits, diag * state.amplitudes)


def effective_q(alpha: WeightVector, theta: float) -> float:
    """``q = alpha . phi = ||alpha||^2 theta``."""
    return alpha.norm_sq * theta
