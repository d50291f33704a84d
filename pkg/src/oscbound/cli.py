"""Command-line driver.

    oscbound sweep            --config exp.json [--out-dir DIR] [--allow-out-of-regime] [--max-evals N]
    oscbound validate-phase   --config exp.json
    oscbound split-demo       --config exp.json
    oscbound annulus-check    --config exp.json
    oscbound derivative-sweep --config exp.json
    oscbound fit              --input results.csv

Exit status: 0 success, 2 a gated check failed, 1 any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, OscBoundError, OutOfRegime
from .experiments import default_workers, refit_csv, run_experiment

log = logging.getLogger("oscbound")

EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2

SUBCOMMANDS = {
    "sweep": "sweep",
    "validate-phase": "validate",
    "split-demo": "split",
    "annulus-check": "annulus",
    "derivative-sweep": "derivative",
}


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if v is None:
        return ""
    return str(v)


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_outputs(cfg, outcome, figures=True):
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.prefix
    paths = []
    p = out / f"{stem}.csv"
    write_csv(p, outcome.header, outcome.rows)
    paths.append(p)
    p = out / f"{stem}_summary.json"
    write_json(p, outcome.summary)
    paths.append(p)
    for name, pts in outcome.series.items():
        p = out / f"{stem}_loglog_{name}.txt"
        with open(p, "w") as fh:
            fh.write(f"# log(lambda) log|b|  config_hash={cfg.hash}\n")
            for x, y in pts:
                fh.write(f"{x!r} {y!r}\n")
        paths.append(p)
    if figures and outcome.figures:
        from .plotting import render

        for name, kind, payload in outcome.figures:
            p = out / f"{stem}_{kind}_{name}.png"
            render(p, kind, payload)
            paths.append(p)
    return paths


def run(config_path, kind=None, out_dir=None, allow_out_of_regime=False, max_evals=None, workers=None,
        figures=True):
    """Execute one experiment config; returns the process exit code."""
    try:
        cfg = load_config(config_path, kind=kind, out_dir=out_dir, max_evals=max_evals,
                          workers=workers if workers is not None else default_workers())
        outcome = run_experiment(cfg, allow_out_of_regime=allow_out_of_regime)
        paths = write_outputs(cfg, outcome, figures=figures)
    except OutOfRegime as exc:
        log.error("%s", exc)
        for v in exc.violations:
            log.error("  lambda=%r y=%r t=%r mu=%r < required %r", v["lambda"], v["y"], v["t"], v["mu"],
                      v["required"])
        log.error("re-run with --allow-out-of-regime to proceed anyway")
        return EXIT_ERROR
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_ERROR
    except OscBoundError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_ERROR
    for p in paths:
        log.info("wrote %s", p)
    if outcome.gate_failed:
        log.warning("a gated check failed; see %s", cfg.output_dir / f"{cfg.prefix}_summary.json")
        return EXIT_GATE
    return EXIT_OK


def run_fit(input_path, out_dir=None):
    try:
        with open(input_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        result = refit_csv(rows, header)
    except (OSError, StopIteration) as exc:
        log.error("cannot read %s: %s", input_path, exc)
        return EXIT_ERROR
    except OscBoundError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_json(Path(out_dir) / (Path(input_path).stem + "_refit.json"), result)
    json.dump(_clean(result), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="oscbound", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out-dir", metavar="DIR")
        p.add_argument("--allow-out-of-regime", action="store_true")
        p.add_argument("--max-evals", type=int, metavar="N")
        p.add_argument("--workers", type=int, metavar="N", help="default: $OSCBOUND_WORKERS or 1")
        p.add_argument("--no-figures", action="store_true")
    p = sub.add_parser("fit", help="re-fit decay slopes from an existing sweep CSV")
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--out-dir", metavar="DIR")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "fit":
        return run_fit(args.input, args.out_dir)
    return run(
        args.config,
        kind=SUBCOMMANDS[args.command],
        out_dir=args.out_dir,
        allow_out_of_regime=args.allow_out_of_regime,
        max_evals=args.max_evals,
        workers=args.workers,
        figures=not args.no_figures,
    )


if __name__ == "__main__":
    sys.exit(main())
