"""``dof-atlas`` command-line front end.

Exit codes: 0 pass, 1 usage/schema, 2 unsupported regime, 3 point
outside the region, 4 statistical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .fading import (
    PARTITION_NOTE,
    draw_haar_unitary,
    draw_iid_rayleigh,
    gk_rank_check,
    partition_plan,
    qr_haar_check,
    qr_tall,
    relative_error,
    svd_ordered,
    test_isotropy,
    unitarity_error,
    TestReport,
)
from .regions import (
    AntennaConfig,
    DofPoint,
    RegionError,
    UnsupportedRegime,
    contains,
    format_halfspace,
    format_table,
    parse_rational,
    region_crc_asym,
    region_crc_full,
    region_ic_nocsit,
    region_to_json,
)
from .simulator import SimConfig, SimConfigError, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_OUTSIDE, EXIT_STAT = 0, 1, 2, 3, 4
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for regimes here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_region(scenario: str, config: AntennaConfig):
    if scenario == "ic-nocsit":
        return region_ic_nocsit(config)
    if scenario in ("crc-nocsit-iid", "crc-nocsit-corr"):
        return region_crc_asym(config, scenario)
    if scenario == "crc-full":
        return region_crc_full(config)
    raise UsageError(f"unknown scenario {scenario!r}")


def _config(values) -> AntennaConfig:
    try:
        return AntennaConfig(*values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _dumps(data: dict) -> str:
    return json.dumps(data, indent=2) + "\n"


# ---------------------------------------------------------------------------
# region / check
# ---------------------------------------------------------------------------


def cmd_region(args) -> int:
    region = build_region(args.scenario, _config([args.m1, args.m2, args.n1, args.n2]))
    sys.stdout.write(region_to_json(region) if args.format == "json" else format_table(region))
    return EXIT_OK


def cmd_check(args) -> int:
    config = _config([args.m1, args.m2, args.n1, args.n2])
    try:
        point = DofPoint(parse_rational(args.d1), parse_rational(args.d2))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    region = build_region(args.scenario, config)
    if contains(region, point):
        print("inside")
        return EXIT_OK
    print(f"outside: violates {format_halfspace(region.first_violated(point))}")
    return EXIT_OUTSIDE


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _fmt_cell(value) -> str:
    return "" if value is None else repr(float(value))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["snr_db", "mean_rate_r1_bits", "mean_rate_r2_bits", "interference_power_subspace"]
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt_cell(row[c]) for c in cols])
    return buf.getvalue()


def plot_data_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["snr_db", "series", "value"])
    for row in rows:
        for key, value in row.items():
            if key != "snr_db" and value is not None:
                writer.writerow([repr(float(row["snr_db"])), key, repr(float(value))])
    return buf.getvalue()


def load_sim_config(path: Path, seed: int | None) -> tuple[SimConfig, dict]:
    """Parse a simulation JSON file; ``scheme``/``subspace`` are probe options."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must contain a JSON object")
    probe = {k: data.pop(k) for k in ("scheme", "subspace") if k in data}
    if seed is not None:
        data["seed"] = seed
    try:
        return SimConfig.from_dict(data), probe
    except (SimConfigError, TypeError) as exc:
        raise UsageError(f"schema violation: {exc}") from None


def cmd_simulate(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    sim, probe = load_sim_config(args.config_file, args.seed)
    if probe and args.experiment != "probe":
        raise UsageError(f"keys {sorted(probe)} are only valid for the probe experiment")
    result = run_experiment(args.experiment, sim, **probe)
    rows = result.rows()
    manifest = {
        "command": f"simulate {args.experiment}",
        "parameters": {**sim.to_dict(), **probe},
        "seed": sim.seed,
        "toolkit_version": __version__,
    }
    summary = {"schema_version": SCHEMA_VERSION, **result.summary(), "manifest": manifest}

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.experiment
    (out / f"{stem}.csv").write_text(rows_to_csv(rows))
    (out / f"{stem}.json").write_text(_dumps(summary))
    if args.emit_plot_data:
        (out / f"{stem}_plot_data.csv").write_text(plot_data_csv(rows))
    run_record = {
        "schema_version": SCHEMA_VERSION,
        **manifest,
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    (out / f"{stem}_manifest.json").write_text(_dumps(run_record))

    parts = [f"{k}={v:.3f}" for k, v in result.summary()["slopes"].items() if v is not None]
    print(f"{result.scheme}: slopes " + " ".join(parts))
    return EXIT_OK


# ---------------------------------------------------------------------------
# decompose-test
# ---------------------------------------------------------------------------


def _svd_report(samples: int, rng) -> TestReport:
    worst_rec = worst_unit = 0.0
    for _ in range(samples):
        n, m = rng.integers(1, 9, size=2)
        h = draw_iid_rayleigh(int(n), int(m), rng)
        f = svd_ordered(h)
        worst_rec = max(worst_rec, relative_error(f.reconstruct(), h))
        worst_unit = max(worst_unit, unitarity_error(f.u), unitarity_error(f.v))
    stat = max(worst_rec, worst_unit)
    return TestReport("svd", samples, stat, None, stat < 1e-10,
                      {"max_reconstruction_error": worst_rec, "max_unitarity_error": worst_unit})


def _qr_report(samples: int, rng) -> TestReport:
    worst_rec = worst_unit = 0.0
    zeros_exact = True
    for _ in range(samples):
        m = int(rng.integers(1, 6))
        n = m + int(rng.integers(0, 4))
        h = draw_iid_rayleigh(n, m, rng)
        f = qr_tall(h)
        worst_rec = max(worst_rec, relative_error(f.reconstruct(), h))
        worst_unit = max(worst_unit, unitarity_error(f.q))
        zeros_exact &= bool(np.all(np.tril(f.r, -1) == 0))
    haar = qr_haar_check(3, 2, samples, rng)
    stat = max(worst_rec, worst_unit)
    ok = stat < 1e-10 and zeros_exact and haar.passed
    return TestReport("qr", samples, stat, haar.p_value, ok, {
        "max_reconstruction_error": worst_rec,
        "max_unitarity_error": worst_unit,
        "structural_zeros_exact": zeros_exact,
        "haar": haar.details,
    })


def cmd_decompose_test(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    rng = np.random.default_rng(args.seed)
    if args.test == "svd":
        report = _svd_report(args.samples, rng)
    elif args.test == "qr":
        report = _qr_report(args.samples, rng)
    elif args.test == "isotropy":
        if args.samples < 1000:
            raise UsageError("isotropy needs --samples >= 1000")
        dim = args.dim
        u = draw_haar_unitary(dim, rng)
        report = test_isotropy(lambda g: draw_iid_rayleigh(dim, dim, g), u, args.samples, rng)
    elif args.test == "gk-rank":
        report = gk_rank_check(_require_config(args), args.samples, rng)
    elif args.test == "partition":
        try:
            plan = partition_plan(_require_config(args))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        # Human-readable lines go to stderr so stdout stays valid JSON.
        print(f"m={plan.m}, n={plan.n}", file=sys.stderr)
        for i, s in enumerate(plan.actual_sets):
            print(f"S_{i}: actual={list(s)} fictitious={plan.fictitious_counts[i]}", file=sys.stderr)
        print(f"note: {PARTITION_NOTE}", file=sys.stderr)
        payload = {"schema_version": SCHEMA_VERSION, "test": "partition", **plan.to_dict(),
                   "note": PARTITION_NOTE, "pass": True}
        sys.stdout.write(_dumps(payload))
        return EXIT_OK
    else:
        raise UsageError(f"unknown test {args.test!r}")
    sys.stdout.write(_dumps({"schema_version": SCHEMA_VERSION, **report.to_dict()}))
    return EXIT_OK if report.passed else EXIT_STAT


def _require_config(args) -> AntennaConfig:
    if args.config is None:
        raise UsageError("--config M1 M2 N1 N2 is required for this test")
    return _config(args.config)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dof-atlas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scenarios = ["ic-nocsit", "crc-nocsit-iid", "crc-nocsit-corr", "crc-full"]

    def antenna_args(p):
        p.add_argument("scenario", choices=scenarios)
        for name in ("m1", "m2", "n1", "n2"):
            p.add_argument(name, type=int)

    p = sub.add_parser("region", help="print a DoF region")
    antenna_args(p)
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("check", help="test whether (d1, d2) lies in a region")
    antenna_args(p)
    p.add_argument("d1", help="rational 'p/q' or integer")
    p.add_argument("d2", help="rational 'p/q' or integer")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    p.add_argument("experiment", choices=["corner", "single-user", "uniform", "probe"])
    p.add_argument("config_file", type=Path)
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=None, help="override the seed in the config file")
    p.add_argument("--emit-plot-data", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose-test", help="decomposition and statistical checks")
    p.add_argument("test", choices=["svd", "qr", "isotropy", "gk-rank", "partition"])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--config", type=int, nargs=4, metavar=("M1", "M2", "N1", "N2"))
    p.set_defaults(func=cmd_decompose_test)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedRegime as exc:
        print(exc, file=sys.stderr)
        return EXIT_REGIME
    except RegionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
