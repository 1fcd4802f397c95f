"""Experiment workflows: bounds table, single evaluation, layerwise sweeps, plot data."""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .bounds import TABLE_KINDS, BoundsRow, bounds_row, bounds_table, ee_bound, sql_bound
from .config import RunConfig, save_config
from .encoding import WeightVector, make_weights
from .fisher import CfiReport, MeasurementSetup, directional_cfi
from .lattice import build_hamiltonian, build_polygon_lattice
from .optimizer import CmaConfig, layerwise_optimize
from .problem import SensingProblem
from .quantum import Rotation, ShapeError, StateVector, ghz_fidelity, ghz_state, plus_state

log = logging.getLogger(__name__)

RECORD_FORMAT = "vqsense.run_record/1"
ROBUSTNESS_THETAS = (0.05, 0.1, 0.5)
PLOT_KINDS = ("cfi_vs_n", "fidelity_vs_depth")


class NotComputedError(LookupError):
    """A requested result series is absent from the run record."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_table(path: Path, header: Sequence[str], columns: Sequence[str],
                rows: Iterable[Sequence]) -> Path:
    """Tab-separated file with ``#`` comment header lines and 17-digit floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {h}" for h in header]
    lines.append("# " + "\t".join(columns))
    for row in rows:
        lines.append("\t".join(v if isinstance(v, str) else
                               str(v) if isinstance(v, (int, np.integer)) else fmt(v)
                               for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Inverse of :func:`write_table` for numeric tables: (column names, data)."""
    comments = [ln for ln in Path(path).read_text().splitlines() if ln.startswith("#")]
    columns = comments[-1].lstrip("# ").split("\t")
    data = np.loadtxt(path, comments="#", ndmin=2)
    return columns, data


# -- problem construction ---------------------------------------------------

def build_setup(cfg: RunConfig) -> MeasurementSetup:
    m = cfg.measurement
    return MeasurementSetup(Rotation(m.rotation_axis, m.rotation_angle), m.shift_delta,
                            m.theta0, m.probability_floor)


def build_weights(cfg: RunConfig, n: int) -> WeightVector:
    return make_weights(cfg.encoding.kind, n, cfg.encoding.weights)


def build_problem(cfg: RunConfig, n: int) -> SensingProblem:
    g = cfg.geometry
    angles = None
    if g.bias_mode == "custom":
        angles = np.asarray({int(k): v for k, v in g.bias_angles.items()}[n], dtype=float)
    lattice = build_polygon_lattice(n, g.radius, g.angular_offset, g.bias_mode,
                                    g.field_angle, angles)
    c = cfg.couplings
    h = build_hamiltonian(lattice, c.j_ising, c.j_symmetric, c.prefactor, g.angular_form)
    return SensingProblem(h, build_weights(cfg, n), build_setup(cfg),
                          cfg.ansatz.evolution_method, cfg.ansatz.trotter_steps)


def cma_config(cfg: RunConfig) -> CmaConfig:
    o = cfg.optimizer
    return CmaConfig(o.population_size, o.initial_sigma, o.max_evaluations,
                     o.fitness_tolerance, cfg.seed, None, o.workers)


# -- workflows --------------------------------------------------------------

def run_bounds(n_min: int, n_max: int, encoding: str = "both", weights=None,
               out_dir: Optional[Path] = None) -> list[BoundsRow]:
    """Bounds table for ``uniform``, ``weighted_central``, ``both`` or ``custom``."""
    if encoding == "custom":
        alpha = make_weights("custom", len(weights), weights)
        rows = [bounds_row(alpha)]
    else:
        kinds = TABLE_KINDS if encoding == "both" else (encoding,)
        rows = bounds_table(n_min, n_max, kinds)
    if out_dir is not None:
        write_table(Path(out_dir) / "bounds.tsv",
                    ["SQL and entanglement-enhanced Fisher bounds on q = ||alpha||^2 theta",
                     "sql = 1/||alpha||^2, ee = S^2/||alpha||^4"],
                    ["N", "encoding", "sql", "ee"],
                    [(r.num_qubits, r.encoding_kind, r.sql, r.ee) for r in rows])
    return rows


def format_bounds(rows: Sequence[BoundsRow]) -> str:
    out = [f"{'N':>3}  {'encoding':<17} {'SQL':>10} {'EE':>10}"]
    for r in rows:
        out.append(f"{r.num_qubits:>3}  {r.encoding_kind:<17} {r.sql:>10.3f} {r.ee:>10.3f}")
    return "\n".join(out)


def _state_summary(problem: SensingProblem, probe: StateVector) -> tuple[dict, CfiReport]:
    alpha = problem.alpha
    report = directional_cfi(probe, alpha, problem.setup.theta0, problem.setup)
    raw, best = ghz_fidelity(probe)
    by_theta = {
        fmt(t): directional_cfi(probe, alpha, t, problem.setup).cfi_q
        for t in ROBUSTNESS_THETAS
    }
    return {
        "cfi_q": report.cfi_q,
        "cfi_theta": report.cfi_theta,
        "sql": sql_bound(alpha),
        "ee": ee_bound(alpha),
        "ghz_fidelity_raw": raw,
        "ghz_fidelity_phase_optimized": best,
        "cfi_q_by_theta0": by_theta,
    }, report


def run_evaluate(cfg: RunConfig, params=None, num_qubits: Optional[int] = None,
                 depth: Optional[int] = None, state: str = "ansatz",
                 out_dir: Optional[Path] = None) -> dict:
    """Score one parameter vector (or an injected reference state).

    ``state`` is ``ansatz`` (use ``params``), ``ghz`` or ``product``.
    """
    n = cfg.geometry.n_min if num_qubits is None else int(num_qubits)
    problem = build_problem(cfg, n)
    vec = np.zeros(0) if params is None else np.asarray(params, dtype=float).reshape(-1)
    if state == "ansatz":
        if depth is None:
            depth = vec.size // 3
        if vec.size != 3 * depth:
            raise ShapeError(
                f"depth {depth} needs {3 * depth} parameters (t1, theta2, t3 per layer), "
                f"got {vec.size}"
            )
        probe = problem.probe(vec)
    elif state == "ghz":
        probe = ghz_state(n)
    elif state == "product":
        probe = plus_state(n)
    else:
        raise ValueError(f"unknown state {state!r}; expected ansatz, ghz or product")
    summary, report = _state_summary(problem, probe)
    fragment = {
        "format": RECORD_FORMAT,
        "kind": "evaluate",
        "code_version": __version__,
        "timestamp": _now(),
        "config": cfg.to_dict(),
        "num_qubits": n,
        "depth": int(depth or 0),
        "state": state,
        "params": vec.tolist(),
        **summary,
        "report": report.to_dict(),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"evaluate_N{n}.json").write_text(json.dumps(fragment, indent=1))
    return fragment


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_cell_sweep(cfg: RunConfig, n: int, freeze_core: Optional[bool] = None) -> list[dict]:
    """Layerwise optimization for one register size; one cell per depth."""
    problem = build_problem(cfg, n)
    o = cfg.optimizer
    freeze = o.freeze_core if freeze_core is None else freeze_core
    traces = layerwise_optimize(problem, cfg.ansatz.max_depth, cma_config(cfg),
                                o.new_layer_scale, freeze)
    cells = []
    for depth, trace in enumerate(traces, start=1):
        summary, _ = _state_summary(problem, problem.probe(trace.best_params))
        cells.append({
            "num_qubits": n,
            "depth": depth,
            "status": "ok",
            "best_fitness": trace.best_fitness,
            **summary,
            "best_params": trace.best_params.tolist(),
            "initial_mean": trace.initial_mean.tolist(),
            "trace": trace.summary(),
        })
    return cells


def run_optimize(cfg: RunConfig, out_dir: Optional[Path] = None,
                 emit: bool = True) -> dict:
    """Sweep every ``N`` of the config; failures are recorded per cell."""
    if cfg.ansatz.max_depth < 1:
        raise ShapeError("optimize needs ansatz.max_depth >= 1")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / "config.yaml")
    record = {
        "format": RECORD_FORMAT,
        "kind": "optimize",
        "code_version": __version__,
        "started_at": _now(),
        "config": cfg.to_dict(),
        "cells": [],
    }
    log_path = out / "cells.jsonl"
    for n in cfg.qubit_range:
        log.info("optimizing N=%d up to depth %d", n, cfg.ansatz.max_depth)
        try:
            cells = run_cell_sweep(cfg, n)
        except Exception as exc:  # keep the sweep going
            log.exception("N=%d failed", n)
            alpha_bounds = _bounds_or_none(cfg, n)
            cells = [{"num_qubits": n, "depth": d, "status": "error",
                      "error": f"{type(exc).__name__}: {exc}", **alpha_bounds}
                     for d in range(1, cfg.ansatz.max_depth + 1)]
        with log_path.open("a") as fh:
            for cell in cells:
                fh.write(json.dumps(cell) + "\n")
        record["cells"].extend(cells)
    record["finished_at"] = _now()
    (out / "record.json").write_text(json.dumps(record, indent=1))
    if emit:
        for which in PLOT_KINDS:
            emit_plot_data(record, which, out)
    return record


def _bounds_or_none(cfg: RunConfig, n: int) -> dict:
    try:
        alpha = build_weights(cfg, n)
    except ValueError:
        return {"sql": None, "ee": None}
    return {"sql": sql_bound(alpha), "ee": ee_bound(alpha)}


def load_record(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "record.json"
    return json.loads(path.read_text())


def emit_plot_data(record: dict, which: str, out_dir) -> list[Path]:
    """Plot-ready tables: one file per depth (``cfi_vs_n``) or per N (``fidelity_vs_depth``)."""
    if which not in PLOT_KINDS:
        raise ValueError(f"unknown series {which!r}; expected one of {PLOT_KINDS}")
    cells = [c for c in record.get("cells", []) if c.get("status") == "ok"]
    if not cells:
        raise NotComputedError(f"record holds no completed cells; '{which}' was not computed")
    kind = record.get("config", {}).get("encoding", {}).get("kind", "?")
    out = Path(out_dir)
    paths = []
    if which == "cfi_vs_n":
        for depth in sorted({c["depth"] for c in cells}):
            rows = sorted((c for c in cells if c["depth"] == depth), key=lambda c: c["num_qubits"])
            paths.append(write_table(
                out / f"cfi_vs_n_depth{depth}.tsv",
                [f"CFI versus qubit number, {kind} encoding, depth {depth}",
                 "cfi_q = F(q) at the working point; sql/ee are the reference bounds"],
                ["N", "cfi_q", "cfi_theta", "sql", "ee", "cfi_over_ee"],
                [(c["num_qubits"], c["cfi_q"], c["cfi_theta"], c["sql"], c["ee"],
                  c["cfi_q"] / c["ee"]) for c in rows]))
    else:
        for n in sorted({c["num_qubits"] for c in cells}):
            rows = sorted((c for c in cells if c["num_qubits"] == n), key=lambda c: c["depth"])
            paths.append(write_table(
                out / f"fidelity_vs_depth_N{n}.tsv",
                [f"GHZ fidelity versus depth, {kind} encoding, N = {n}",
                 "fidelity_phase_opt maximizes over the GHZ relative phase"],
                ["depth", "fidelity_raw", "fidelity_phase_opt", "cfi_q", "sql", "ee"],
                [(c["depth"], c["ghz_fidelity_raw"], c["ghz_fidelity_phase_optimized"],
                  c["cfi_q"], c["sql"], c["ee"]) for c in rows]))
    return paths


def best_cells(record: dict) -> dict:
    """``{(N, depth): cell}`` for completed cells."""
    return {(c["num_qubits"], c["depth"]): c for c in record["cells"] if c.get("status") == "ok"}

