"""Command-line entry point.

Subcommands: sweep, closure, metric, truncate, verify, plot.
Exit codes: 0 success, 1 cell or check failure, 2 configuration error.
Set LIEPQC_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

log = logging.getLogger("liepqc")


def _setup_logging() -> None:
    level = os.environ.get("LIEPQC_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_circuit(path: str):
    from .circuits import circuit_from_json

    with open(path) as fh:
        return circuit_from_json(json.load(fh))


def _cmd_sweep(args: argparse.Namespace) -> int:
    from .sweep import SweepConfig, load_config, ConfigError

    try:
        config = load_config(args.config) if args.config else SweepConfig()
        overrides = {}
        if args.out:
            overrides["out_dir"] = args.out
        if args.qubits:
            overrides["qubit_range"] = [int(x) for x in args.qubits.split(",")]
        if args.depth is not None:
            overrides["depth"] = args.depth
        if args.methods:
            overrides["methods"] = args.methods.split(",")
        if args.samples is not None:
            from .geometry import SamplingSpec

            overrides["sampling"] = SamplingSpec(
                distribution=config.sampling.distribution,
                n_samples=args.samples,
                seed=config.sampling.seed,
                sigma=config.sampling.sigma,
            )
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            merged = config.to_json()
            merged.update({k: v for k, v in overrides.items()
                           if k not in ("sampling", "loss")})
            from .sweep import config_from_dict

            config = config_from_dict(merged)
            if "sampling" in overrides:
                config.sampling = overrides["sampling"]
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        log.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    from .sweep import run_sweep

    records, errors = run_sweep(config)
    print(f"wrote {len(records)} records to {config.out_dir}")
    for err in errors:
        print(f"cell failure n={err['n']} method={err['method']}: {err['error']}",
              file=sys.stderr)
    return 1 if errors else 0


def _cmd_closure(args: argparse.Namespace) -> int:
    from .lie import lie_closure

    circuit = _load_circuit(args.circuit)
    basis = lie_closure(circuit.skew_generators(), max_dim=args.max_dim)
    print(json.dumps(basis.to_json(), indent=2))
    return 0


def _cmd_metric(args: argparse.Namespace) -> int:
    from .geometry import SamplingSpec, empirical_metric

    circuit = _load_circuit(args.circuit)
    rep = empirical_metric(
        circuit, SamplingSpec(n_samples=args.samples, seed=args.seed)
    )
    print(json.dumps(rep.to_json(), indent=2))
    return 0


def _cmd_truncate(args: argparse.Namespace) -> int:
    from .circuits import circuit_to_json
    from .lie import apply_lie_trunc, apply_random_trunc

    circuit = _load_circuit(args.circuit)
    if args.mode == "random":
        model, basis, report = apply_random_trunc(circuit, keep=args.keep, seed=args.seed)
    else:
        budget = args.budget if args.budget and args.budget > 0 else None
        model, basis, report = apply_lie_trunc(
            circuit, depth_cap=args.depth_cap, dim_budget=budget
        )
    out = {
        "basis": basis.to_json(),
        "report": report.to_json(),
        "model": circuit_to_json(model),
    }
    print(json.dumps(out, indent=2))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .sweep import SweepConfig, load_config, ConfigError
    from .verify import verify_suite

    try:
        config = load_config(args.config) if args.config else SweepConfig()
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = verify_suite(config, include_invariants=not args.acceptance_only)
    for chk in report["checks"]:
        status = "PASS" if chk["passed"] else "FAIL"
        print(f"[{status}] {chk['label']}: {chk['detail']}")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
        print(f"report written to {args.out}")
    return 0 if report["passed"] else 1


def _cmd_plot(args: argparse.Namespace) -> int:
    from .geometry import read_spectrum_csv
    from .plots import emit_plots
    from .sweep import SweepRecord

    path = Path(args.records)
    rows = path.read_text().strip().splitlines()
    header = rows[0].split(",")
    records = []
    for line in rows[1:]:
        cells = dict(zip(header, line.split(",")))
        records.append(
            SweepRecord(
                n=int(cells["n"]),
                method=cells["method"],
                seed=int(cells["seed"]),
                d_eff=float(cells["d_eff"]),
                rank=int(cells["rank"]),
                kappa=float(cells["kappa"]),
                var_grad_mean=float(cells["var_grad_mean"]),
                var_grad_first=float(cells["var_grad_first"]),
                product_var_deff=float(cells["product_var_deff"]),
                loss_final=float(cells["loss_final"]),
                closure_dim=int(cells["closure_dim"]),
                truncated_dim=int(cells["truncated_dim"]),
                closure_defect=float(cells["closure_defect"]),
            )
        )
    spectra = {}
    for rec in records:
        spec_path = path.parent / f"spectrum_{rec.method}_{rec.n}.csv"
        if spec_path.exists():
            spectra[(rec.method, rec.n)] = read_spectrum_csv(spec_path)
    out_dir = args.out or path.parent
    created = emit_plots(records, out_dir, spectra=spectra or None)
    print(f"wrote {len(created)} figures to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liepqc",
        description="Lie-algebraic trainability lab for parameterized quantum circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the full experiment grid")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--qubits", help="comma-separated qubit counts")
    p.add_argument("--depth", type=int)
    p.add_argument("--methods", help="comma-separated subset of full,random_trunc,lie_trunc")
    p.add_argument("--samples", type=int, help="metric/variance sample count")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("closure", help="Lie closure of a circuit's generators")
    p.add_argument("--circuit", required=True, help="circuit JSON file")
    p.add_argument("--max-dim", type=int, default=None)
    p.set_defaults(func=_cmd_closure)

    p = sub.add_parser("metric", help="empirical Fubini-Study metric of a circuit")
    p.add_argument("--circuit", required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("truncate", help="structured or random generator truncation")
    p.add_argument("--circuit", required=True)
    p.add_argument("--mode", choices=["lie", "random"], required=True)
    p.add_argument("--keep", type=int, default=2, help="directions kept (random mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth-cap", type=int, default=1)
    p.add_argument("--budget", type=int, default=0, help="0 = generator span dimension")
    p.set_defaults(func=_cmd_truncate)

    p = sub.add_parser("verify", help="run acceptance and invariant checks")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="write JSON report here")
    p.add_argument("--acceptance-only", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plot", help="re-emit figures from a records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
