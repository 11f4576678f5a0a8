"""Command line front end: single-scenario runs, paired baseline-vs-green
comparisons, and one-axis parameter sweeps.

All products are files under the --out prefix; stdout stays empty and
progress goes to stderr. Exit codes are the machine contract:

    0  success
    1  runtime failure
    2  bad input (flags, scenario files, schema violations)
    3  pairing violation (compare scenarios differ outside `greens`)
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace

import numpy as np

from .metrics import (PopulationFilter, compare_runs, emit_report, tx_power_cdf,
                      write_cdf_csv, write_summary_csv)
from .propagation import build_gain_matrix, write_gain_dump
from .scenario import (Scenario, ScenarioError, drop_mobiles, load_scenario_file)
from .simulate import (PairingError, run_campaign, run_paired_campaign,
                       gather_tx_powers, snapshot_seed)

#: Flag spellings accepted for --combining, mapped to the internal mode name.
COMBINING_FLAGS = {"mrc": "mrc", "sel": "selection", "selection": "selection",
                   "egc": "egc"}

#: Reporting area around a green antenna when no explicit filter is given.
DEFAULT_FILTER_RADIUS_M = 300.0

SWEEP_AXES = ("seed", "green_count", "combining")


@dataclass(frozen=True)
class RunSpec:
    """Everything one invocation needs, resolved from flags."""

    scenario: str
    green_scenario: str | None = None
    seed: int = 1
    snapshots: int = 50
    combining: str | None = None
    filter_center: tuple[float, float] | None = None
    filter_radius: float | None = None
    indoor_only: bool = False
    target_dbm: float = 4.0
    out: str = "out"
    jobs: int = 1
    dump_gains: bool = False


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _spec_filter(spec: RunSpec, default_center: tuple[float, float] | None = None) -> PopulationFilter:
    center = spec.filter_center if spec.filter_center is not None else default_center
    if spec.filter_radius is not None:
        radius = spec.filter_radius
    elif center is not None:
        radius = DEFAULT_FILTER_RADIUS_M
    else:
        radius = float("inf")
    return PopulationFilter(center=center, radius_m=radius, indoor_only=spec.indoor_only)


def _stats_rows(powers: list[float], target_dbm: float) -> list[tuple[str, float]]:
    arr = np.asarray(powers, dtype=float)
    return [
        ("samples", float(len(arr))),
        ("mean_dbm", float(arr.mean())),
        ("median_dbm", float(np.median(arr))),
        ("frac_below_target", float((arr <= target_dbm).mean())),
        ("target_dbm", target_dbm),
    ]


def _dump_first_snapshot_gains(s: Scenario, seed: int, path: str) -> None:
    snap_seed = snapshot_seed(seed, 0)
    mobiles = drop_mobiles(s, snap_seed)
    write_gain_dump(build_gain_matrix(s, mobiles, snap_seed), path)


def cmd_run(spec: RunSpec) -> int:
    s = load_scenario_file(spec.scenario)
    _progress(f"run: {spec.snapshots} snapshots of {spec.scenario} (seed {spec.seed})")
    snaps = run_campaign(s, spec.seed, spec.snapshots,
                         combining=spec.combining, jobs=spec.jobs)
    f = _spec_filter(spec)
    powers = gather_tx_powers(snaps, "control", f)
    if not powers:
        _progress("error: population filter excluded every mobile")
        return 2
    write_cdf_csv({"run": tx_power_cdf(powers)}, f"{spec.out}_cdf.csv")
    write_summary_csv(_stats_rows(powers, spec.target_dbm), f"{spec.out}_summary.csv")
    if spec.dump_gains:
        _dump_first_snapshot_gains(s, spec.seed, f"{spec.out}_gains.csv")
    _progress(f"run: wrote {spec.out}_cdf.csv and {spec.out}_summary.csv")
    return 0


def cmd_compare(spec: RunSpec, green_scenario_path: str | None = None) -> int:
    green_path = green_scenario_path or spec.green_scenario
    if green_path is None:
        raise ScenarioError("compare needs --green-scenario")
    baseline = load_scenario_file(spec.scenario)
    green = load_scenario_file(green_path)
    _progress(f"compare: {spec.snapshots} paired snapshots, "
              f"{spec.scenario} vs {green_path} (seed {spec.seed})")
    pairs = run_paired_campaign(baseline, green, spec.seed, spec.snapshots,
                                combining=spec.combining, jobs=spec.jobs)
    default_center = green.greens[0].position if green.greens else None
    f = _spec_filter(spec, default_center)
    b_powers = gather_tx_powers(pairs, "baseline", f)
    g_powers = gather_tx_powers(pairs, "green", f)
    if not b_powers or not g_powers:
        _progress("error: population filter excluded every mobile")
        return 2
    report = compare_runs(b_powers, g_powers, spec.target_dbm,
                          snapshots=spec.snapshots, f=f)
    paths = emit_report(report, report.cdfs, spec.out)
    if spec.dump_gains:
        _dump_first_snapshot_gains(baseline, spec.seed, f"{spec.out}_gains_baseline.csv")
        _dump_first_snapshot_gains(green, spec.seed, f"{spec.out}_gains_green.csv")
    _progress(f"compare: mean delta {report.mean_delta_db:+.2f} dB, "
              f"median delta {report.median_delta_db:+.2f} dB, "
              f"below {report.target_dbm:g} dBm "
              f"{report.frac_below_target['baseline']:.1%} -> "
              f"{report.frac_below_target['green']:.1%}")
    _progress("compare: wrote " + ", ".join(paths))
    return 0


def _sweep_values(axis: str, raw: str | None, spec: RunSpec, s: Scenario) -> list:
    if raw is not None:
        items = [v.strip() for v in raw.split(",") if v.strip()]
        if not items:
            raise ScenarioError("--values is empty")
        if axis in ("seed", "green_count"):
            try:
                return [int(v) for v in items]
            except ValueError as exc:
                raise ScenarioError(f"--values for {axis} must be integers: {exc}") from exc
        modes = []
        for v in items:
            if v not in COMBINING_FLAGS:
                raise ScenarioError(f"--values for combining: unknown mode '{v}'")
            modes.append(COMBINING_FLAGS[v])
        return modes
    if axis == "seed":
        return [spec.seed + k for k in range(5)]
    if axis == "green_count":
        return list(range(len(s.greens) + 1))
    return ["mrc", "selection", "egc"]


def cmd_sweep(spec: RunSpec, axis: str, values: str | None = None) -> int:
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis '{axis}'")
    s = load_scenario_file(spec.scenario)
    axis_values = _sweep_values(axis, values, spec, s)
    if axis == "green_count" and axis_values and max(axis_values) > len(s.greens):
        raise ScenarioError(
            f"green_count sweep up to {max(axis_values)} but the scenario "
            f"defines only {len(s.greens)} green antennas")

    default_center = s.greens[0].position if s.greens else None
    f = _spec_filter(spec, default_center)
    rows = []
    for value in axis_values:
        variant, seed, mode = s, spec.seed, spec.combining
        if axis == "seed":
            seed = value
        elif axis == "green_count":
            variant = replace(s, greens=s.greens[:value])
        else:
            mode = value
        _progress(f"sweep: {axis}={value}")
        snaps = run_campaign(variant, seed, spec.snapshots, combining=mode,
                             jobs=spec.jobs)
        powers = gather_tx_powers(snaps, "control", f)
        if not powers:
            _progress("error: population filter excluded every mobile")
            return 2
        arr = np.asarray(powers, dtype=float)
        rows.append((value, len(powers), float(arr.mean()), float(np.median(arr)),
                     float((arr <= spec.target_dbm).mean())))

    path = f"{spec.out}_sweep.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("axis,value,samples,mean_dbm,median_dbm,frac_below_target\n")
        for value, n, mean, median, frac in rows:
            fh.write(f"{axis},{value},{n},{mean:.6f},{median:.6f},{frac:.6f}\n")
    _progress(f"sweep: wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _center_flag(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected x,y")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected numbers: {exc}") from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenant",
        description="Monte Carlo uplink power study with receive-only green antennas")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--seed", type=int, default=1, help="campaign seed (default 1)")
    common.add_argument("--snapshots", type=_positive_int, default=50,
                        help="number of Monte Carlo snapshots (default 50)")
    common.add_argument("--combining", choices=sorted(COMBINING_FLAGS), default=None,
                        help="diversity combining rule (default: scenario's)")
    common.add_argument("--filter-center", type=_center_flag, default=None,
                        metavar="X,Y", help="report only mobiles near this point")
    common.add_argument("--filter-radius", type=_nonneg_float, default=None,
                        metavar="M", help=f"filter disk radius in meters "
                        f"(default {DEFAULT_FILTER_RADIUS_M:g} when a center applies)")
    common.add_argument("--indoor-only", action="store_true",
                        help="report only indoor mobiles")
    common.add_argument("--target-dbm", type=float, default=4.0,
                        help="reference Tx power for the below-target fraction (default 4)")
    common.add_argument("--out", default="out", help="output path prefix (default 'out')")
    common.add_argument("--jobs", type=_positive_int, default=1,
                        help="parallel snapshot workers (default 1)")
    common.add_argument("--dump-gains", action="store_true",
                        help="also write snapshot 0's channel tables as CSV")

    p_run = sub.add_parser("run", parents=[common],
                           help="simulate one scenario and write its Tx power CDF")
    p_run.set_defaults(func=lambda spec, args: cmd_run(spec))

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="paired baseline-vs-green comparison")
    p_cmp.add_argument("--green-scenario", required=True,
                       help="scenario differing from --scenario only in greens")
    p_cmp.set_defaults(func=lambda spec, args: cmd_compare(spec, args.green_scenario))

    p_swp = sub.add_parser("sweep", parents=[common],
                           help="repeat a run across one axis")
    p_swp.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p_swp.add_argument("--values", default=None,
                       help="comma-separated axis values (sensible defaults per axis)")
    p_swp.set_defaults(func=lambda spec, args: cmd_sweep(spec, args.axis, args.values))

    return parser


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    return RunSpec(
        scenario=args.scenario,
        green_scenario=getattr(args, "green_scenario", None),
        seed=args.seed,
        snapshots=args.snapshots,
        combining=None if args.combining is None else COMBINING_FLAGS[args.combining],
        filter_center=args.filter_center,
        filter_radius=args.filter_radius,
        indoor_only=args.indoor_only,
        target_dbm=args.target_dbm,
        out=args.out,
        jobs=args.jobs,
        dump_gains=args.dump_gains,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(_spec_from_args(args), args)
    except PairingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime catch-all so exit codes stay meaningful
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
