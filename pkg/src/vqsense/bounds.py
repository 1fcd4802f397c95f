"""Closed-form SQL and entanglement-enhanced Fisher bounds for ``q = ||alpha||^2 theta``.

Interrogation time is fixed to 1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .encoding import WeightVector, make_uniform, make_weighted_central
from .lattice import DomainError

TABLE_KINDS = ("uniform", "weighted_central")


@dataclass(frozen=True)
class BoundsRow:
    num_qubits: int
    encoding_kind: str
    sql: float
    ee: float

    def to_dict(self) -> dict:
        return asdict(self)


def sql_bound(alpha: WeightVector) -> float:
    """Separable probes, local readout: ``1 / ||alpha||^2``."""
    return 1.0 / alpha.norm_sq


def ee_bound(alpha: WeightVector) -> float:
    """Optimally entangled probes: ``S^2 / ||alpha||^4``."""
    return alpha.abs_sum**2 / alpha.norm_sq**2


def bounds_row(alpha: WeightVector) -> BoundsRow:
    return BoundsRow(alpha.num_qubits, alpha.kind, sql_bound(alpha), ee_bound(alpha))


def bounds_table(n_min: int, n_max: int, kinds=TABLE_KINDS) -> list[BoundsRow]:
    """Rows ordered by ``N``, then by encoding kind."""
    if not 2 <= n_min <= n_max:
        raise DomainError(f"need 2 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}")
    makers = {"uniform": make_uniform, "weighted_central": make_weighted_central}
    rows = []
    for n in range(n_min, n_max + 1):
        for kind in kinds:
            if kind not in makers:
                raise ValueError(f"no table entry for encoding kind {kind!r}")
            rows.append(bounds_row(makers[kind](n)))
    return rows
