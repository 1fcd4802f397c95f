"""Polygon-centred lattices, dipolar couplings and the interaction Hamiltonian.

Lengths are in units of the ring radius and energies in units of the
dipolar prefactor ``kappa`` (both default to 1).  Only ``kappa * t`` enters
the circuits, so the evolution times absorb the physical scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .quantum import (
    IDENTITY2,
    MAX_QUBITS,
    PAULI,
    ResourceLimitError,
    apply_two_qubit_gate,
)

# Default peripheral angular offsets (degrees) per register size.
DEFAULT_OFFSETS_DEG = {3: 0.0, 4: 90.0, 5: 45.0}

BIAS_MODES = ("perpendicular", "in_plane", "custom")
ANGULAR_FORMS = ("cos", "cos2")

SPIN = {a: 0.5 * m for a, m in PAULI.items()}


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class Lattice:
    """Site positions (``N x 2``) and the bias angle ``beta_ij`` for every pair."""

    num_qubits: int
    positions: np.ndarray
    bias_angles: np.ndarray
    center_index: int = 0
    bias_mode: str = "perpendicular"

    def __post_init__(self):
        for arr in (self.positions, self.bias_angles):
            arr.flags.writeable = False

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.positions[i] - self.positions[j]))

    def pairs(self):
        n = self.num_qubits
        return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _bias_angle_matrix(positions: np.ndarray, mode: str, field_angle: float,
                       custom: Optional[np.ndarray]) -> np.ndarray:
    n = len(positions)
    if mode == "perpendicular":
        beta = np.full((n, n), np.pi / 2)
    elif mode == "in_plane":
        fdir = np.array([math.cos(field_angle), math.sin(field_angle)])
        beta = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                d = positions[j] - positions[i]
                c = float(np.dot(d, fdir) / np.linalg.norm(d))
                beta[i, j] = math.acos(max(-1.0, min(1.0, c)))
    elif mode == "custom":
        if custom is None:
            raise ValueError("bias_mode 'custom' needs an explicit bias angle matrix")
        beta = np.array(custom, dtype=float)
        if beta.shape != (n, n):
            raise ValueError(f"bias angle matrix must be {n}x{n}, got {beta.shape}")
        beta = 0.5 * (beta + beta.T)
    else:
        raise ValueError(f"unknown bias mode {mode!r}; expected one of {BIAS_MODES}")
    np.fill_diagonal(beta, 0.0)
    return beta


def build_polygon_lattice(num_qubits: int, radius: float = 1.0,
                          angular_offset: Optional[float] = None,
                          bias_mode: str = "perpendicular",
                          field_angle: float = 0.0,
                          bias_angles: Optional[np.ndarray] = None) -> Lattice:
    """Centre qubit at the origin with ``N - 1`` peripherals on a ring.

    ``angular_offset`` is in radians; ``None`` picks the per-size default
    in ``DEFAULT_OFFSETS_DEG``.  For ``N = 2`` the peripheral sits at
    ``(radius, 0)``.
    """
    n = int(num_qubits)
    if n < 2:
        raise DomainError(f"polygon lattice needs at least 2 qubits, got {num_qubits}")
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"at most {MAX_QUBITS} qubits are supported")
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    positions = np.zeros((n, 2))
    if n == 2:
        positions[1] = (radius, 0.0)
    else:
        if angular_offset is None:
            angular_offset = math.radians(DEFAULT_OFFSETS_DEG.get(n, 90.0))
        m = n - 1
        for k in range(m):
            ang = 2 * math.pi * k / m + angular_offset
            positions[k + 1] = (radius * math.cos(ang), radius * math.sin(ang))
    beta = _bias_angle_matrix(positions, bias_mode, field_angle, bias_angles)
    return Lattice(n, positions, beta, 0, bias_mode)


def coupling_strength(distance: float, beta: float, prefactor: float = 1.0,
                      angular_form: str = "cos") -> float:
    """Dipolar coupling ``kappa * (1 - 3 cos beta) / d^3``.

    ``angular_form="cos2"`` selects the ``1 - 3 cos^2 beta`` variant.
    """
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance}")
    if angular_form == "cos":
        ang = 1.0 - 3.0 * math.cos(beta)
    elif angular_form == "cos2":
        ang = 1.0 - 3.0 * math.cos(beta) ** 2
    else:
        raise ValueError(f"angular_form must be one of {ANGULAR_FORMS}")
    return prefactor * ang / distance**3


def coupling_matrix(lattice: Lattice, prefactor: float = 1.0,
                    angular_form: str = "cos") -> np.ndarray:
    n = lattice.num_qubits
    v = np.zeros((n, n))
    for i, j in lattice.pairs():
        v[i, j] = v[j, i] = coupling_strength(
            lattice.distance(i, j), lattice.bias_angles[i, j], prefactor, angular_form
        )
    return v


def embed(ops: dict, num_qubits: int) -> np.ndarray:
    """Kronecker product with ``ops[q]`` on qubit ``q`` and identity elsewhere."""
    return reduce(np.kron, [ops.get(q, IDENTITY2) for q in range(num_qubits)])


def _pair_terms(j_ising: float, j_symmetric: float, v: float):
    """4x4 Ising and symmetric pair terms, scaled by ``v``."""
    szsz = np.kron(SPIN["z"], SPIN["z"])
    dot = sum(np.kron(SPIN[a], SPIN[a]) for a in "xyz")
    return v * j_ising * szsz, v * j_symmetric * dot


@dataclass(frozen=True)
class DipolarHamiltonian:
    """``sum_{i<j} V_ij (J_I S^z_i S^z_j + J_S S_i . S_j)`` with cached spectrum."""

    couplings: np.ndarray
    ising_coupling: float
    symmetric_coupling: float
    prefactor: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    _pair_blocks: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.couplings, self.matrix, self.eigenvalues, self.eigenvectors):
            arr.flags.writeable = False

    @property
    def num_qubits(self) -> int:
        return self.couplings.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def evolve(self, amps: np.ndarray, t: float) -> np.ndarray:
        """``exp(-i t H) @ amps`` through the cached eigendecomposition."""
        u = self.eigenvectors
        return u @ (np.exp(-1j * t * self.eigenvalues) * (u.conj().T @ amps))

    def trotter_evolve(self, amps: np.ndarray, t: float, steps: int) -> np.ndarray:
        """First-order product formula applied directly to ``amps``.

        ``amps`` may carry leading batch axes (the last axis is the register).
        """
        if int(steps) != steps or steps < 1:
            raise DomainError(f"trotter steps must be a positive integer, got {steps}")
        dt = t / steps
        gates = [
            (i, j, (vec * np.exp(-1j * dt * val)) @ vec.conj().T)
            for i, j, val, vec in self._pair_blocks
        ]
        n = self.num_qubits
        out = np.asarray(amps, dtype=complex)
        for _ in range(int(steps)):
            for i, j, g in gates:
                out = apply_two_qubit_gate(out, g, i, j, n)
        return out


def build_hamiltonian(lattice: Lattice, j_ising: float = 1.0, j_symmetric: float = 1.0,
                      prefactor: float = 1.0, angular_form: str = "cos") -> DipolarHamiltonian:
    v = coupling_matrix(lattice, prefactor, angular_form)
    return hamiltonian_from_couplings(v, j_ising, j_symmetric, prefactor)


def hamiltonian_from_couplings(couplings: np.ndarray, j_ising: float, j_symmetric: float,
                               prefactor: float = 1.0) -> DipolarHamiltonian:
    """Assemble the Hamiltonian from an explicit symmetric coupling matrix."""
    v = np.array(couplings, dtype=float)
    n = v.shape[0]
    if v.shape != (n, n) or not np.allclose(v, v.T, atol=1e-12):
        raise ValueError("coupling matrix must be square and symmetric")
    if n > MAX_QUBITS:
        raise ResourceLimitError(f"at most {MAX_QUBITS} qubits are supported")
    np.fill_diagonal(v, 0.0)
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    blocks = []
    for i in range(n):
        for j in range(i + 1, n):
            if v[i, j] == 0.0:
                continue
            zz = embed({i: SPIN["z"], j: SPIN["z"]}, n)
            dot = sum(embed({i: SPIN[a], j: SPIN[a]}, n) for a in "xyz")
            h += v[i, j] * (j_ising * zz + j_symmetric * dot)
            # Ising factor first, symmetric second within a pair.
            for term in _pair_terms(j_ising, j_symmetric, v[i, j]):
                val, vec = np.linalg.eigh(term)
                blocks.append((i, j, val, vec))
    h = 0.5 * (h + h.conj().T)
    lam, u = np.linalg.eigh(h)
    return DipolarHamiltonian(v, float(j_ising), float(j_symmetric), float(prefactor),
                              h, lam, u, tuple(blocks))


def exact_propagator(h: DipolarHamiltonian, t: float) -> np.ndarray:
    """``U diag(exp(-i lambda t)) U^dagger``."""
    u = h.eigenvectors
    return (u * np.exp(-1j * t * h.eigenvalues)) @ u.conj().T


def trotter_propagator(h: DipolarHamiltonian, t: float, steps: int) -> np.ndarray:
    """Dense first-order Trotter propagator.

    Pair terms are ordered lexicographically in ``(i, j)``; within a pair the
    Ising factor acts before the symmetric factor.  Each factor is
    exponentiated exactly.
    """
    # Rows of the identity evolved as a batch give the transposed propagator.
    cols = h.trotter_evolve(np.eye(h.dim, dtype=complex), t, steps)
    return cols.T
