"""``knowflow`` command line: ingest, score, predict, evaluate, dynamics, synth, report.

Settings resolve as command-line flag, then ``--config`` JSON file, then
built-in default. Failures print one line ``knowflow: <category>: <message>``
on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .domains import load_windows, default_windows
from .dynamics import DEFAULT_DELTA, DynamicsReport
from .errors import ConfigError, KnowflowError
from .evaluation import RATES, backcast_sweep
from .forecast import rescale
from .ingest import aggregate, load_aggregates, parse_inputs, save_aggregates
from .predictors import PredictorConfig, default_grid, predict_all
from .scoring import build_snapshot, build_snapshots, snapshot_stats, stats_table_csv
from .synth import SynthMode, SynthSpec, fixture_spec, generate, write_raw_records

EXIT_CODES = {"config": 2, "parse": 2, "conflict": 2, "schema": 2, "unknown-period": 2, "convergence": 3}

DEFAULTS = {
    "grid": "default",
    "delta": DEFAULT_DELTA,
    "threads": 1,
    "seed": 42,
    "format": None,
    "mode": "fixture",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_grid(text) -> list[PredictorConfig]:
    """``default`` or a comma list such as ``katz:0.001,rpr:0.01,cn``."""
    if isinstance(text, list):
        items = text
    elif text.strip() == "default":
        return default_grid()
    else:
        items = [t for t in text.split(",") if t.strip()]
    grid = []
    for item in items:
        grid.extend(default_grid() if item == "default" else [PredictorConfig.parse(item)])
    if not grid:
        raise ConfigError("predictor grid is empty")
    return grid


class Settings:
    """Resolved option values plus where each came from."""

    def __init__(self, args, keys):
        config = {}
        if getattr(args, "config", None):
            try:
                config = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigError(f"config file {args.config} not found") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {args.config}: {exc.msg} at line {exc.lineno}") from None
            if not isinstance(config, dict):
                raise ConfigError("config file must hold a JSON object")
        self.values, self.sources = {}, {}
        for key in keys:
            flag = getattr(args, key, None)
            if flag is not None:
                self.values[key], self.sources[key] = flag, "flag"
            elif key in config:
                self.values[key], self.sources[key] = config[key], "config"
            else:
                self.values[key], self.sources[key] = DEFAULTS.get(key), "default"

    def __getitem__(self, key):
        return self.values[key]

    def provenance(self, skip=("threads", "out")):
        return {k: {"value": v, "source": self.sources[k]} for k, v in sorted(self.values.items()) if k not in skip}


def resolve_threads(args, settings) -> int:
    if getattr(args, "threads", None) is not None:
        value = args.threads
    elif "KNOWFLOW_THREADS" in os.environ:
        value = os.environ["KNOWFLOW_THREADS"]
    else:
        value = settings["threads"]
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"threads must be an integer, got {value!r}") from None
    if value < 1:
        raise ConfigError("threads must be >= 1")
    return value


def _require(settings, key):
    value = settings[key]
    if value is None:
        raise ConfigError(f"missing required setting --{key.replace('_', '-')}")
    return value


def _load(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"input file {path} not found")
    return load_aggregates(p)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _write(directory: Path, name: str, text: str) -> None:
    (directory / name).write_text(text, encoding="utf-8", newline="\n")


def _provenance(command, settings, aggregates_path=None, **extra) -> str:
    block = {"command": command, "knowflow_version": __version__, "settings": settings.provenance()}
    if aggregates_path is not None:
        block["aggregates_sha256"] = _sha256(aggregates_path)
    block.update(extra)
    return json.dumps(block, indent=2, sort_keys=True) + "\n"


# -- subcommands -------------------------------------------------------------------


def cmd_ingest(args):
    s = Settings(args, ["citations", "patents", "domains", "windows", "out", "keep_domain_order"])
    for key in ("citations", "patents", "domains"):
        if not Path(_require(s, key)).is_file():
            raise ConfigError(f"input file {s[key]} not found")
    table, patents, citations = parse_inputs(
        Path(s["citations"]), Path(s["patents"]), Path(s["domains"]), keep_domain_order=bool(s["keep_domain_order"])
    )
    windows = load_windows(Path(s["windows"])) if s["windows"] else default_windows()
    agg = aggregate(patents, citations, table, windows)
    save_aggregates(agg, _require(s, "out"))


def cmd_score(args):
    s = Settings(args, ["aggregates", "period", "format", "out"])
    agg = _load(_require(s, "aggregates"))
    fmt = s["format"] or ("csv" if s["period"] else "stats")
    if fmt == "stats":
        labels = [s["period"]] if s["period"] else agg.labels
        text = stats_table_csv([snapshot_stats(build_snapshot(agg, t)) for t in labels])
    elif fmt in ("csv", "dot"):
        snap = build_snapshot(agg, _require(s, "period"))
        text = snap.to_csv() if fmt == "csv" else snap.to_dot()
    else:
        raise ConfigError(f"unknown format {fmt!r} (csv, dot, stats)")
    _emit(text, s["out"])


def cmd_predict(args):
    s = Settings(args, ["aggregates", "period", "predictor", "target", "rescale", "out"])
    agg = _load(_require(s, "aggregates"))
    snap = build_snapshot(agg, _require(s, "period"))
    cfg = PredictorConfig.parse(_require(s, "predictor"))
    sim = predict_all(snap, cfg)
    if s["rescale"] or s["target"]:
        if s["target"]:
            agg.period_index(s["target"])
        text = rescale(sim, snap, s["target"]).to_csv()
    else:
        text = sim.to_csv()
    _emit(text, s["out"])


def cmd_evaluate(args):
    s = Settings(args, ["aggregates", "grid", "out", "threads"])
    path = _require(s, "aggregates")
    agg = _load(path)
    grid = parse_grid(s["grid"])
    report = backcast_sweep(agg, grid, threads=resolve_threads(args, s))
    out = Path(_require(s, "out"))
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "metrics.csv", report.metrics_csv())
    _write(out, "counts.csv", report.counts_csv())
    _write(out, "link_counts_table.csv", report.link_count_table_csv())
    for rate in RATES:
        _write(out, f"{rate}_table.csv", report.rate_table_csv(rate))
    _write(out, "warnings.csv", report.warnings_csv())
    _write(out, "period_stats.csv", stats_table_csv([snapshot_stats(x) for x in build_snapshots(agg)]))
    _write(out, "provenance.json", _provenance("evaluate", s, path, grid=[c.to_dict() for c in grid]))


def cmd_dynamics(args):
    s = Settings(args, ["aggregates", "delta", "out"])
    path = _require(s, "aggregates")
    agg = _load(path)
    delta = float(s["delta"])
    if delta < 0:
        raise ConfigError("delta must be >= 0")
    report = DynamicsReport.from_snapshots(build_snapshots(agg), delta)
    out = Path(_require(s, "out"))
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "dynamics.csv", report.dynamics_csv())
    _write(out, "new_strong_table.csv", report.new_strong_csv())
    _write(out, "patterns.csv", report.pattern_csv())
    _write(out, "provenance.json", _provenance("dynamics", s, path))


def cmd_synth(args):
    s = Settings(args, ["seed", "mode", "out", "raw", "citations", "patents"])
    seed = int(s["seed"])
    mode = s["mode"]
    if mode == "fixture":
        spec = fixture_spec(seed)
    elif mode in ("exact-null", "multinomial-null"):
        spec = SynthSpec(
            seed=seed,
            patents=int(s["patents"] or 100),
            citations=int(s["citations"] or 10_000),
            mode=SynthMode.EXACT_NULL if mode == "exact-null" else SynthMode.MULTINOMIAL_NULL,
        )
    else:
        raise ConfigError(f"unknown synth mode {mode!r} (fixture, exact-null, multinomial-null)")
    agg = generate(spec)
    out = Path(_require(s, "out"))
    out.mkdir(parents=True, exist_ok=True)
    save_aggregates(agg, out / "aggregates.json")
    if s["raw"]:
        write_raw_records(agg, out / "raw")


def cmd_report(args):
    s = Settings(args, ["aggregates", "pair", "grid", "format", "out"])
    agg = _load(_require(s, "aggregates"))
    pair = [x.strip() for x in _require(s, "pair").split(",")]
    if len(pair) != 2 or pair[0] == pair[1]:
        raise ConfigError("--pair needs two distinct domains, e.g. CT,MRI")
    table = agg.domain_table
    try:
        i, j = (table.index(x) for x in pair)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    grid = parse_grid(s["grid"])
    snaps = build_snapshots(agg)
    rows = []
    for k, snap in enumerate(snaps):
        predicted = {}
        if k > 0:
            for cfg in grid:
                pred = rescale(predict_all(snaps[k - 1], cfg), snaps[k - 1], snap.period)
                predicted[cfg.label] = float(pred.weights[i, j])
        rows.append({"period": snap.period, "actual_cs": float(snap.weights[i, j]), "predicted": predicted})
    fmt = s["format"] or "csv"
    if fmt == "json":
        payload = {
            "pair": pair,
            "predictors": [c.label for c in grid],
            "rows": [
                {"period": r["period"], "actual_cs": round(r["actual_cs"], 6),
                 "predicted": {k: round(v, 6) for k, v in r["predicted"].items()}}
                for r in rows
            ],
        }
        text = json.dumps(payload, indent=2) + "\n"
    elif fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["period", "actual_cs", *(c.label for c in grid)])
        for r in rows:
            w.writerow([r["period"], f"{r['actual_cs']:.6f}",
                        *(f"{r['predicted'][c.label]:.6f}" if c.label in r["predicted"] else "" for c in grid)])
        text = buf.getvalue()
    else:
        raise ConfigError(f"unknown format {fmt!r} (csv, json)")
    _emit(text, s["out"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knowflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"knowflow {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON file with default settings")
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "aggregate raw citation/patent CSVs into aggregates.json")
    p.add_argument("--citations")
    p.add_argument("--patents")
    p.add_argument("--domains")
    p.add_argument("--windows", help="windows.json (default: the eight 1976-2013 windows)")
    p.add_argument("--keep-domain-order", action="store_true", default=None)
    p.add_argument("--out")

    p = add("score", cmd_score, "citation-score snapshot (csv/dot) or per-period statistics")
    p.add_argument("--aggregates")
    p.add_argument("--period")
    p.add_argument("--format", choices=["csv", "dot", "stats"])
    p.add_argument("--out")

    p = add("predict", cmd_predict, "similarity scores, or a rescaled forecast, for one period")
    p.add_argument("--aggregates")
    p.add_argument("--period")
    p.add_argument("--predictor", help="e.g. katz:0.001, rpr:0.5, simrank:0.9, cn, jaccard, aa, ra, pa")
    p.add_argument("--target", help="label of the forecast period (implies --rescale)")
    p.add_argument("--rescale", action="store_true", default=None)
    p.add_argument("--out")

    p = add("evaluate", cmd_evaluate, "backcasting sweep over all consecutive period pairs")
    p.add_argument("--aggregates")
    p.add_argument("--grid", help="'default' or a comma list like katz:0.001,rpr:0.01")
    p.add_argument("--out")
    p.add_argument("--threads", type=int)

    p = add("dynamics", cmd_dynamics, "emergence, stability and pattern tables")
    p.add_argument("--aggregates")
    p.add_argument("--delta", type=float)
    p.add_argument("--out")

    p = add("synth", cmd_synth, "write a seeded synthetic aggregates.json")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["fixture", "exact-null", "multinomial-null"])
    p.add_argument("--citations", type=int, help="citations per period (null modes)")
    p.add_argument("--patents", type=int, help="patents per domain per period (null modes)")
    p.add_argument("--raw", action="store_true", default=None, help="also write raw CSV records")
    p.add_argument("--out")

    p = add("report", cmd_report, "actual vs predicted weights of one pair across periods")
    p.add_argument("--aggregates")
    p.add_argument("--pair", help="two domain abbrevs, e.g. CT,MRI")
    p.add_argument("--grid")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise ConfigError("missing subcommand (ingest, score, predict, evaluate, dynamics, synth, report)")
        args.func(args)
    except KnowflowError as exc:
        message = " ".join(str(exc).split())
        print(f"knowflow: {exc.category}: {message}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except (ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"knowflow: error: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
