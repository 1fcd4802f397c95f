"""Outcome probabilities, parameter-shift partials and directional CFI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import WeightVector, phase_diagonal
from .quantum import Rotation, ShapeError, StateVector, apply_global_gate, apply_single_qubit_gate


@dataclass(frozen=True)
class MeasurementSetup:
    """Fixed readout: a pre-measurement rotation followed by computational-basis projectors.

    The default global ``R_y(-pi/2)`` turns the readout into an X-basis
    measurement, which is what makes Z-encoded phases visible at all.
    """

    rotation: Rotation = field(default_factory=lambda: Rotation("y", -np.pi / 2))
    shift_delta: float = np.pi / 2
    theta0: float = 0.1
    probability_floor: float = 1e-12

    def __post_init__(self):
        if not 0 < self.shift_delta < np.pi:
            raise ValueError(f"shift_delta must lie in (0, pi), got {self.shift_delta}")
        if not self.probability_floor > 0:
            raise ValueError("probability_floor must be positive")

    def readout(self, amps: np.ndarray, num_qubits: int) -> np.ndarray:
        """Probabilities after the pre-measurement rotation; batch axes allowed."""
        gate = self.rotation.matrix()
        if self.rotation.is_global:
            out = apply_global_gate(amps, gate, num_qubits)
        else:
            out = apply_single_qubit_gate(amps, gate, self.rotation.target, num_qubits)
        return np.abs(out) ** 2


@dataclass(frozen=True)
class CfiReport:
    probabilities: np.ndarray
    partials: np.ndarray
    directional_derivative: np.ndarray
    cfi_q: float
    cfi_theta: float

    def to_dict(self) -> dict:
        return {
            "probabilities": self.probabilities.tolist(),
            "partials": self.partials.tolist(),
            "directional_derivative": self.directional_derivative.tolist(),
            "cfi_q": self.cfi_q,
            "cfi_theta": self.cfi_theta,
        }


def _check(probe: StateVector, alpha: WeightVector):
    if alpha.num_qubits != probe.num_qubits:
        raise ShapeError(
            f"weight vector of length {alpha.num_qubits} for a {probe.num_qubits}-qubit probe"
        )


def probabilities_at_phases(probe: StateVector, phases: np.ndarray,
                            setup: MeasurementSetup) -> np.ndarray:
    """Readout probabilities for explicit per-qubit phases (shape ``(..., N)``)."""
    amps = phase_diagonal(phases) * probe.amplitudes
    return setup.readout(amps, probe.num_qubits)


def outcome_probabilities(probe: StateVector, alpha: WeightVector, theta: float,
                          setup: MeasurementSetup) -> np.ndarray:
    _check(probe, alpha)
    return probabilities_at_phases(probe, alpha.weights * theta, setup)


def _shifted_probabilities(probe, alpha, theta, setup):
    n = probe.num_qubits
    base = alpha.weights * theta
    shifts = setup.shift_delta * np.eye(n)
    phases = np.concatenate([base[None, :], base + shifts, base - shifts])
    probs = probabilities_at_phases(probe, phases, setup)
    return probs[0], probs[1:n + 1], probs[n + 1:]


def phase_partials(probe: StateVector, alpha: WeightVector, theta: float,
                   setup: MeasurementSetup) -> np.ndarray:
    """``dp_k / dphi_i`` by the two-point shift rule, shape ``(N, 2^N)``.

    Exact for half-angle Z generators at any shift with ``sin(delta) != 0``.
    """
    _check(probe, alpha)
    _, plus, minus = _shifted_probabilities(probe, alpha, theta, setup)
    return (plus - minus) / (2 * np.sin(setup.shift_delta))


def fisher_information(p: np.ndarray, dp: np.ndarray, floor: float) -> float:
    """``sum_k dp_k^2 / p_k`` over outcomes with ``p_k > floor``."""
    keep = p > floor
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def directional_cfi(probe: StateVector, alpha: WeightVector, theta: float,
                    setup: MeasurementSetup) -> CfiReport:
    _check(probe, alpha)
    p, plus, minus = _shifted_probabilities(probe, alpha, theta, setup)
    partials = (plus - minus) / (2 * np.sin(setup.shift_delta))
    dpdq = (alpha.weights @ partials) / alpha.norm_sq
    cfi_q = fisher_information(p, dpdq, setup.probability_floor)
    return CfiReport(p, partials, dpdq, cfi_q, cfi_q * alpha.norm_sq**2)
