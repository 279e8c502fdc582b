"""Command line entry point: ``elastica-lab <experiment> [flags]``.

Options may also come from a ``key=value`` file passed with ``--config``;
flags given on the command line win over the file.  Output goes to
``--out``, else ``$ELASTICA_LAB_OUT``, else ``./elastica_lab_out``, in a
subdirectory named after the experiment.  The exit status is 1 when any
check of the experiment fails and 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .experiments import EXPERIMENTS, ExperimentResult, RunConfig, run_experiment

OUT_ENV = "ELASTICA_LAB_OUT"
DEFAULT_OUT = "elastica_lab_out"


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elastica-lab", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--omega", help='atoms as "x:c,..." with x a fraction of the domain length')
    p.add_argument("--eps", type=_float_list, help="strictly decreasing list, e.g. 1e-2,1e-3")
    p.add_argument("--a", type=float, help="block exponent, delta = eps**a")
    p.add_argument("--L", type=float, help="segment length")
    p.add_argument("--base", help="closed base curve: circle, ellipse, limacon (segment for open detector runs)")
    p.add_argument("--align", choices=["tangent", "basepoint"])
    p.add_argument("--flat-mode", choices=["open", "periodic", "both"])
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--n-cells", type=int)
    p.add_argument("--relax-n", type=int)
    p.add_argument("--relax-eps", type=float)
    p.add_argument("--loops", type=int)
    p.add_argument("--workers", type=int, help="process pool size for epsilon sweeps")
    return p


def read_config_file(path: str, parser: argparse.ArgumentParser) -> dict:
    """Parse ``key=value`` lines (``#`` comments allowed) using the parser's converters."""
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "experiment", "config")}
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in actions:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        act = actions[dest]
        try:
            val = act.type(value) if act.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{num}: bad value for {key}: {exc}") from exc
        if act.choices and val not in act.choices:
            raise ConfigError(f"{path}:{num}: {key} must be one of {act.choices}")
        out[dest] = val
    return out


def resolve_config(argv=None) -> tuple[str, RunConfig, Path]:
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config, parser))
    values.update({k: v for k, v in vars(args).items() if v is not None})
    out = values.pop("out", None) or os.environ.get(OUT_ENV) or DEFAULT_OUT
    name = values.pop("experiment")
    values.pop("config", None)
    cfg = RunConfig(**values)
    return name, cfg, Path(out) / name


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, fields, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_result(result: ExperimentResult, outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, (fields, rows) in result.tables.items():
        p = outdir / f"{stem}.csv"
        write_csv(p, fields, rows)
        written.append(p)
    for stem, doc in result.documents.items():
        p = outdir / f"{stem}.json"
        p.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        written.append(p)
    for fname, text in result.texts.items():
        p = outdir / fname
        p.write_text(text)
        written.append(p)
    checks = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks]
    p = outdir / "checks.json"
    p.write_text(json.dumps({"experiment": result.name, "passed": result.passed, "checks": checks}, indent=2) + "\n")
    written.append(p)
    return written


def main(argv=None) -> int:
    try:
        name, cfg, outdir = resolve_config(argv)
        result = run_experiment(name, cfg)
    except ConfigError as exc:
        print(f"elastica-lab: {exc}", file=sys.stderr)
        return 2
    write_result(result, outdir)
    for c in result.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    print(f"outputs in {outdir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
