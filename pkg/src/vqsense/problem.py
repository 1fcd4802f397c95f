"""Bundle of everything needed to score a parameter vector."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzConfig, prepare_probe
from .encoding import WeightVector
from .fisher import CfiReport, MeasurementSetup, directional_cfi
from .lattice import DipolarHamiltonian
from .quantum import ShapeError, StateVector


@dataclass(frozen=True)
class SensingProblem:
    hamiltonian: DipolarHamiltonian
    alpha: WeightVector
    setup: MeasurementSetup
    evolution_method: str = "exact"
    trotter_steps: int = 1

    def __post_init__(self):
        n = self.hamiltonian.num_qubits
        if self.alpha.num_qubits != n:
            raise ShapeError(f"weights have length {self.alpha.num_qubits}, register has {n}")
        w = np.abs(self.alpha.weights)
        if self.alpha.kind == "custom" and w.max() > w.min() and int(np.argmax(w)) != 0:
            warnings.warn(
                "largest encoding weight is not on the lattice centre (qubit 0)",
                stacklevel=3,
            )

    @property
    def num_qubits(self) -> int:
        return self.hamiltonian.num_qubits

    def ansatz(self, depth: int) -> AnsatzConfig:
        return AnsatzConfig(depth, self.evolution_method, self.trotter_steps)

    def probe(self, params) -> StateVector:
        params = np.asarray(params, dtype=float)
        if params.size % 3:
            raise ShapeError(f"parameter vector length {params.size} is not a multiple of 3")
        return prepare_probe(self.hamiltonian, self.ansatz(params.size // 3), params)

    def report(self, params, theta: float | None = None) -> CfiReport:
        theta = self.setup.theta0 if theta is None else theta
        return directional_cfi(self.probe(params), self.alpha, theta, self.setup)

    def fitness(self, params) -> float:
        """``F(q)`` at the working point; this is what the optimizer maximizes."""
        return self.report(params).cfi_q
