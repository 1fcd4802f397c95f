"""Layered probe-preparation circuit built from dipolar evolutions and global rotations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .lattice import DipolarHamiltonian
from .quantum import ShapeError, StateVector, apply_global_gate, init_zero, rotation_matrix

EVOLUTION_METHODS = ("exact", "trotter")

_RY_PLUS = rotation_matrix("y", np.pi / 2)
_RY_MINUS = rotation_matrix("y", -np.pi / 2)


class LayerParams(NamedTuple):
    t1: float
    theta2: float
    t3: float


@dataclass(frozen=True)
class AnsatzConfig:
    num_layers: int
    evolution_method: str = "exact"
    trotter_steps: int = 1

    def __post_init__(self):
        if int(self.num_layers) != self.num_layers or self.num_layers < 0:
            raise ValueError(f"num_layers must be a non-negative integer, got {self.num_layers}")
        if self.evolution_method not in EVOLUTION_METHODS:
            raise ValueError(f"evolution_method must be one of {EVOLUTION_METHODS}")
        if int(self.trotter_steps) != self.trotter_steps or self.trotter_steps < 1:
            raise ValueError(f"trotter_steps must be >= 1, got {self.trotter_steps}")

    @property
    def num_params(self) -> int:
        return 3 * self.num_layers


def flatten_params(params: Sequence[LayerParams]) -> np.ndarray:
    """Layer-major ``(t1, theta2, t3)`` ordering."""
    if len(params) == 0:
        return np.zeros(0)
    return np.array([float(x) for layer in params for x in layer])


def unflatten_params(vec) -> list[LayerParams]:
    v = np.asarray(vec, dtype=float).reshape(-1)
    if v.size % 3:
        raise ShapeError(f"parameter vector length {v.size} is not a multiple of 3")
    return [LayerParams(*map(float, v[i:i + 3])) for i in range(0, v.size, 3)]


ParamsLike = Union[Sequence[LayerParams], np.ndarray]


def _as_layers(params: ParamsLike) -> list[LayerParams]:
    if isinstance(params, np.ndarray):
        return unflatten_params(params)
    layers = [p if isinstance(p, LayerParams) else LayerParams(*p) for p in params]
    return layers


def prepare_probe(h: DipolarHamiltonian, config: AnsatzConfig,
                  params: ParamsLike) -> StateVector:
    """Run the layered circuit on ``|0...0>``.

    Temporal order: global ``R_y(pi/2)``; then per layer
    ``exp(-i t1 H)``, global ``R_x(theta2)``, global ``R_y(-pi/2)``,
    ``exp(-i t3 H)``, global ``R_y(pi/2)``.

    ``params`` is a sequence of :class:`LayerParams` or a flat array.
    """
    layers = _as_layers(params)
    if len(layers) != config.num_layers:
        raise ShapeError(
            f"ansatz depth {config.num_layers} needs {config.num_layers} layers, "
            f"got {len(layers)}"
        )
    n = h.num_qubits
    if config.evolution_method == "exact":
        def evolve(a, t):
            return h.evolve(a, t)
    else:
        def evolve(a, t):
            return h.trotter_evolve(a, t, config.trotter_steps)

    psi = apply_global_gate(init_zero(n).amplitudes, _RY_PLUS, n)
    for t1, theta2, t3 in layers:
        psi = evolve(psi, t1)
        psi = apply_global_gate(psi, rotation_matrix("x", theta2), n)
        psi = apply_global_gate(psi, _RY_MINUS, n)
        psi = evolve(psi, t3)
        psi = apply_global_gate(psi, _RY_PLUS, n)
    return StateVector(n, psi)
