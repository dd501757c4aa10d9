"""Command-line interface: single-instance solving and the experiment drivers.

Angles are degrees on the command line and radians internally.  Exit codes:
0 success, 2 input parse error, 3 precondition violation, 4 no solution
found.  Experiment subcommands write a per-trial and a summary CSV into
--out and are byte-deterministic for a fixed (seed, config), independent of
--threads; bench-timing additionally reports wall-clock latency, which is
inherently not reproducible.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import io as rigio
from .errors import ParseError, RigposeError
from .geometry import attitude_from_angles
from .quartic import DEFAULT_MAG_BOUND
from .ransac import RansacConfig, ransac_estimate
from .solver import four_point_solve
from .synthetic import (
    run_attitude_noise_sweep,
    run_pixel_noise_sweep,
    run_ransac_experiments,
    run_rotation_sweep,
    run_timing_bench,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_NO_SOLUTION = 4

# Per-subcommand scenario defaults, chosen to mirror the synthetic protocol:
# noise sweeps run at ~1 degree of true yaw; the attitude sweep holds 1 px of
# image noise; consensus experiments use 1 px / 0.5 deg noise over 100 points.
_SWEEP_DEFAULTS = {
    "sweep-pixel-noise": {"rotation_max_deg": 1.0},
    "sweep-attitude-noise": {"rotation_max_deg": 1.0, "pixel_noise_stdv": 1.0},
    "sweep-rotation": {},
    "ransac-outliers": {
        "rotation_max_deg": 1.0,
        "pixel_noise_stdv": 1.0,
        "attitude_noise_stdv_deg": 0.5,
        "num_points": 100,
    },
    "bench-timing": {"rotation_max_deg": 2.0},
}


class _NoSolution(RigposeError):
    pass


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as e:
        raise ParseError(f"bad numeric list '{text}': {e}") from e


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ParseError(f"--set expects key=value, got '{pair}'")
        key, val = pair.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _add_common_experiment_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON ScenarioConfig file")
    p.add_argument("--out", required=True, help="output directory for CSV files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="max worker processes for trials")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument(
        "--set",
        action="append",
        metavar="FIELD=VALUE",
        help="override a ScenarioConfig field (repeatable)",
    )


def _add_prior_flags(p: argparse.ArgumentParser):
    p.add_argument("--roll0-deg", type=float, default=0.0)
    p.add_argument("--pitch0-deg", type=float, default=0.0)
    p.add_argument("--roll1-deg", type=float, default=0.0)
    p.add_argument("--pitch1-deg", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rigpose",
        description="4-point relative pose for non-overlapping multi-camera rigs "
        "with a known reference direction, plus its synthetic benchmark.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimal 4-point solve from files")
    p.add_argument("--rig", required=True, help="rig calibration JSON")
    p.add_argument("--corr", required=True, help="correspondences JSON lines")
    _add_prior_flags(p)
    p.add_argument("--root-bound-deg", type=float, default=math.degrees(DEFAULT_MAG_BOUND))

    p = sub.add_parser("ransac", help="consensus estimate from files")
    p.add_argument("--rig", required=True)
    p.add_argument("--corr", required=True)
    _add_prior_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=None, help="fixed iteration count")
    p.add_argument("--confidence", type=float, default=0.9999)
    p.add_argument("--threshold-deg", type=float, default=0.1)
    p.add_argument("--min-cameras", type=int, default=2)
    p.add_argument(
        "--sampling",
        choices=("cross-camera", "single-camera", "unconstrained"),
        default="cross-camera",
    )
    p.add_argument("--root-bound-deg", type=float, default=math.degrees(DEFAULT_MAG_BOUND))

    p = sub.add_parser("sweep-pixel-noise", help="image-noise sweep (minimal solves)")
    _add_common_experiment_flags(p)
    p.add_argument("--levels", default="0,1,2,3,4,5", help="noise stdvs in pixels")

    p = sub.add_parser("sweep-attitude-noise", help="reference-direction noise sweep")
    _add_common_experiment_flags(p)
    p.add_argument("--levels", default="0,0.1,0.2,0.3,0.4,0.5", help="noise stdvs in degrees")

    p = sub.add_parser("sweep-rotation", help="rotation-magnitude sweep")
    _add_common_experiment_flags(p)
    p.add_argument("--angles", default="0,1,2,3,4,5,6,7,8,9,10", help="true yaws in degrees")

    p = sub.add_parser("ransac-outliers", help="consensus robustness over outlier ratios")
    _add_common_experiment_flags(p)
    p.add_argument("--ratios", default="0.5,0.6,0.7,0.8,0.9")
    p.add_argument(
        "--mode", choices=("fixed-iterations", "fixed-confidence"), default="fixed-iterations"
    )
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--confidence", type=float, default=0.9999)
    p.add_argument("--threshold-deg", type=float, default=0.1)

    p = sub.add_parser("bench-timing", help="single-threaded solver latency")
    p.add_argument("--config", help="flat JSON ScenarioConfig file")
    p.add_argument("--out", default=None, help="optional output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--set", action="append", metavar="FIELD=VALUE")

    return ap


def _scenario_from_args(args) -> "rigio.ScenarioConfig":
    values = dict(_SWEEP_DEFAULTS.get(args.command, {}))
    if args.config:
        values.update(rigio.read_config_dict(args.config))
    values.update(_parse_overrides(getattr(args, "set", None)))
    if args.seed is not None:
        values["seed"] = args.seed
    return rigio.make_config(values)


def _load_problem(args):
    rig = rigio.load_rig(args.rig)
    corrs = rigio.load_correspondences(args.corr)
    prior = attitude_from_angles(
        math.radians(args.roll0_deg),
        math.radians(args.pitch0_deg),
        math.radians(args.roll1_deg),
        math.radians(args.pitch1_deg),
    )
    return rig, corrs, prior


def _print_pose(rotation: np.ndarray, translation: np.ndarray, indent: str = "  "):
    print(f"{indent}R: " + " ".join("%.17g" % x for x in rotation.ravel()))
    print(f"{indent}t: " + " ".join("%.17g" % x for x in translation))


def _cmd_solve(args) -> int:
    rig, corrs, prior = _load_problem(args)
    if len(corrs) < 4:
        raise ValueError(f"need 4 correspondences for a minimal solve, got {len(corrs)}")
    if len(corrs) > 4:
        print(
            f"note: {len(corrs)} correspondences given; using the first 4 "
            "(consider the 'ransac' subcommand)",
            file=sys.stderr,
        )
    output = four_point_solve(
        corrs[:4], rig, prior, root_mag_bound=math.radians(args.root_bound_deg)
    )
    if not output.candidates:
        print("no candidate pose (no admissible yaw root)", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(f"candidates: {len(output.candidates)}")
    for k, cand in enumerate(output.candidates):
        flag = " degenerate" if cand.degenerate else ""
        print(f"candidate {k}: r_y_deg={math.degrees(cand.r_y):.12g} "
              f"conditioning={cand.conditioning:.6g}{flag}")
        _print_pose(cand.pose.rotation, cand.pose.translation)
    return EXIT_OK


def _cmd_ransac(args) -> int:
    rig, corrs, prior = _load_problem(args)
    config = RansacConfig(
        confidence=args.confidence,
        inlier_threshold=math.radians(args.threshold_deg),
        iterations=args.iterations,
        min_distinct_cameras=args.min_cameras,
        seed=args.seed,
        root_mag_bound=math.radians(args.root_bound_deg),
        sampling=args.sampling,
    )
    result = ransac_estimate(corrs, rig, prior, config)
    if not result.success:
        print("no consensus pose found", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(
        f"inliers: {result.best_inlier_count}/{len(corrs)} "
        f"iterations: {result.iterations_run}"
    )
    _print_pose(result.best_pose.rotation, result.best_pose.translation)
    print("inlier_mask: " + "".join("1" if b else "0" for b in result.inlier_mask))
    return EXIT_OK


def _write_outputs(args, name: str, results, include_runtime=False) -> None:
    from pathlib import Path

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        rigio.write_trial_csv(results, out / f"{name}_trials.csv", include_runtime=include_runtime)
        rigio.write_summary_csv(results, out / f"{name}_summary.csv")
    except OSError as e:
        raise ValueError(f"cannot write outputs under {out}: {e}") from e
    print(f"wrote {out / (name + '_trials.csv')} and {out / (name + '_summary.csv')}")


def _cmd_sweep(args) -> int:
    cfg = _scenario_from_args(args)
    trials = args.trials if args.trials is not None else 1000
    if args.command == "sweep-pixel-noise":
        results = run_pixel_noise_sweep(
            cfg, _csv_floats(args.levels), trials, threads=args.threads
        )
        _write_outputs(args, "pixel_noise", results)
    elif args.command == "sweep-attitude-noise":
        results = run_attitude_noise_sweep(
            cfg, _csv_floats(args.levels), trials, threads=args.threads
        )
        _write_outputs(args, "attitude_noise", results)
    else:
        results = run_rotation_sweep(cfg, _csv_floats(args.angles), trials, threads=args.threads)
        _write_outputs(args, "rotation", results)
    return EXIT_OK


def _cmd_ransac_outliers(args) -> int:
    cfg = _scenario_from_args(args)
    trials = args.trials if args.trials is not None else 100
    results = run_ransac_experiments(
        cfg,
        args.mode,
        _csv_floats(args.ratios),
        trials,
        iterations=args.iterations,
        confidence=args.confidence,
        threshold=math.radians(args.threshold_deg),
        threads=args.threads,
    )
    _write_outputs(args, "ransac_outliers", results)
    return EXIT_OK


def _cmd_bench_timing(args) -> int:
    values = dict(_SWEEP_DEFAULTS["bench-timing"])
    if args.config:
        values.update(rigio.read_config_dict(args.config))
    values.update(_parse_overrides(args.set))
    values["seed"] = args.seed
    cfg = rigio.make_config(values)
    stats = run_timing_bench(args.trials, seed=args.seed, cfg=cfg)
    print(f"solves timed: {len(stats.samples_ns)} (zero-candidate: {stats.zero_candidate_count})")
    print(f"mean:   {stats.mean_ns:12.0f} ns")
    print(f"median: {stats.median_ns:12.0f} ns")
    print(f"p90:    {stats.quantile_ns(0.9):12.0f} ns")
    print(f"p99:    {stats.quantile_ns(0.99):12.0f} ns")
    print(f"throughput: {stats.solves_per_second:.0f} solves/s")
    if args.out:
        from pathlib import Path

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "bench_timing_summary.csv"
        lines = [
            "metric,value",
            f"solves,{len(stats.samples_ns)}",
            f"zero_candidate,{stats.zero_candidate_count}",
            f"mean_ns,{stats.mean_ns:.0f}",
            f"median_ns,{stats.median_ns:.0f}",
            f"p90_ns,{stats.quantile_ns(0.9):.0f}",
            f"p99_ns,{stats.quantile_ns(0.99):.0f}",
            f"solves_per_second,{stats.solves_per_second:.1f}",
        ]
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "ransac":
            return _cmd_ransac(args)
        if args.command in ("sweep-pixel-noise", "sweep-attitude-noise", "sweep-rotation"):
            return _cmd_sweep(args)
        if args.command == "ransac-outliers":
            return _cmd_ransac_outliers(args)
        if args.command == "bench-timing":
            return _cmd_bench_timing(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except _NoSolution as e:  # pragma: no cover - raised paths return codes directly
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (RigposeError, ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
