"""Command line entry point: ``vqsense {bounds,evaluate,optimize,emit}``.

Exit codes: 0 success, 2 configuration error, 3 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, validate
from .harness import (
    PLOT_KINDS,
    NotComputedError,
    emit_plot_data,
    format_bounds,
    load_record,
    run_bounds,
    run_evaluate,
    run_optimize,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _common(parser: argparse.ArgumentParser, config_required: bool = False):
    parser.add_argument("--config", type=Path, required=config_required,
                        help="YAML run config (a record.json is accepted too)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", type=Path, default=None, help="output directory")


def _parse_params(text: str | None, path: Path | None):
    if path is not None:
        raw = path.read_text().strip()
        if raw.startswith("["):
            return np.asarray(json.loads(raw), dtype=float)
        text = raw
    if text is None or text.strip() == "":
        return np.zeros(0)
    return np.array([float(x) for x in text.replace(",", " ").split()])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vqsense", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="print the SQL / EE bounds table")
    _common(b)
    b.add_argument("--n-min", type=int, default=None)
    b.add_argument("--n-max", type=int, default=None)
    b.add_argument("--encoding", choices=("uniform", "weighted_central", "both", "custom"),
                   default=None)

    e = sub.add_parser("evaluate", help="CFI and GHZ fidelity of one parameter set")
    _common(e, config_required=True)
    e.add_argument("--n", type=int, default=None, help="register size (default: geometry.n_min)")
    e.add_argument("--depth", type=int, default=None, help="expected depth L (3L parameters)")
    e.add_argument("--params", default=None, help="comma/space separated parameter vector")
    e.add_argument("--params-file", type=Path, default=None)
    e.add_argument("--state", choices=("ansatz", "ghz", "product"), default="ansatz",
                   help="evaluate an injected reference state instead of the ansatz")

    o = sub.add_parser("optimize", help="layerwise CMA-ES sweep over N and depth")
    _common(o, config_required=True)
    o.add_argument("--max-depth", type=int, default=None)
    o.add_argument("--freeze-core", action="store_true",
                   help="search only the newest layer at each depth")

    m = sub.add_parser("emit", help="write plot-ready tables from a run record")
    _common(m)
    m.add_argument("--record", type=Path, default=None,
                   help="record.json or its run directory (default: --out)")
    m.add_argument("--which", choices=PLOT_KINDS + ("both",), default="both")
    return ap


def _load(args) -> RunConfig | None:
    if args.config is None:
        return None
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=str(args.out))
    return cfg


def _cmd_bounds(args) -> int:
    cfg = _load(args)
    n_min = args.n_min if args.n_min is not None else (cfg.geometry.n_min if cfg else 2)
    n_max = args.n_max if args.n_max is not None else (cfg.geometry.n_max if cfg else 5)
    encoding = args.encoding or (cfg.encoding.kind if cfg else "both")
    weights = cfg.encoding.weights if cfg else None
    if encoding == "custom" and not weights:
        raise ConfigError("custom bounds need encoding.weights in --config")
    if n_min > n_max:
        raise ConfigError(f"empty qubit range: n_min={n_min} > n_max={n_max}")
    rows = run_bounds(n_min, n_max, encoding, weights, args.out)
    print(format_bounds(rows))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    cfg = _load(args)
    params = _parse_params(args.params, args.params_file)
    frag = run_evaluate(cfg, params, args.n, args.depth, args.state, args.out)
    print(f"N={frag['num_qubits']} depth={frag['depth']} state={frag['state']}")
    print(f"F(q)={frag['cfi_q']:.10g}  F(theta)={frag['cfi_theta']:.10g}  "
          f"SQL={frag['sql']:.6g}  EE={frag['ee']:.6g}")
    print(f"GHZ fidelity raw={frag['ghz_fidelity_raw']:.6f} "
          f"phase-optimized={frag['ghz_fidelity_phase_optimized']:.6f}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    cfg = _load(args)
    if args.max_depth is not None:
        cfg = dataclasses.replace(cfg, ansatz=dataclasses.replace(cfg.ansatz,
                                                                  max_depth=args.max_depth))
    if args.freeze_core:
        cfg = dataclasses.replace(cfg, optimizer=dataclasses.replace(cfg.optimizer,
                                                                     freeze_core=True))
    validate(cfg)
    record = run_optimize(cfg, Path(cfg.output_dir))
    for c in record["cells"]:
        if c["status"] == "ok":
            print(f"N={c['num_qubits']} depth={c['depth']} F(q)={c['cfi_q']:.6f} "
                  f"EE={c['ee']:.6f} ratio={c['cfi_q'] / c['ee']:.4f} "
                  f"fid={c['ghz_fidelity_phase_optimized']:.4f}")
        else:
            print(f"N={c['num_qubits']} depth={c['depth']} ERROR {c['error']}")
    print(f"record written to {Path(cfg.output_dir) / 'record.json'}")
    failed = any(c["status"] != "ok" for c in record["cells"])
    return EXIT_RUNTIME if failed else EXIT_OK


def _cmd_emit(args) -> int:
    src = args.record or args.out
    if src is None:
        raise ConfigError("emit needs --record or --out pointing at a run")
    try:
        record = load_record(src)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run record {src}: {exc}") from None
    out = args.out or (src if Path(src).is_dir() else Path(src).parent)
    kinds = PLOT_KINDS if args.which == "both" else (args.which,)
    for which in kinds:
        for p in emit_plot_data(record, which, out):
            print(p)
    return EXIT_OK


COMMANDS = {
    "bounds": _cmd_bounds,
    "evaluate": _cmd_evaluate,
    "optimize": _cmd_optimize,
    "emit": _cmd_emit,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotComputedError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
