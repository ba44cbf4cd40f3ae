"""Command-line driver: ``so3align {simulate,align,bench,enumerate-l,validate,export}``.

Mapping strings (``--plant-l``) use the grammar ``A<axis>-><sign>B<axis>``,
three comma-separated terms, e.g. ``"Ax->-By, Ay->+Bx, Az->+Bz"``.
A ``--config`` JSON file of flat ``{"flag_name": value}`` pairs supplies
defaults; flags given on the command line win.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .align import AlignmentConfig, align, apply_alignment
from .errors import So3AlignError
from .evaluation import (
    DEFAULT_THRESHOLDS,
    error_report,
    pair_by_timestamp,
    scaling_benchmark,
    summarize_errors,
)
from .io import (
    alignment_to_dict,
    emit_report,
    error_report_to_dict,
    export_pose_csv,
    ingest_pose_csv,
    scaling_report_to_dict,
    write_histogram_csv,
    write_json,
)
from .matchers import MATCHER_KINDS, MatcherConfig, azimuth_histogram
from .permutations import IDENTITY, enumerate_signed_permutations, from_mapping, to_mapping
from .rotation import RotationSet, geodesic_angle
from .synthesis import CORRUPTION_LEVELS, CorruptionSpec, corrupt, generate_scenario, plant_global, random_rotations, scenario
from .tbv import apply_rotation, mean_direction, rotation_to_north, tbvs_from_so3


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(float(v)) for v in text.split(",") if v.strip())


def _add_alignment_args(p, pasi_default):
    p.add_argument("--matcher", choices=MATCHER_KINDS, default="spmc")
    p.add_argument("--fusion", choices=("mean_frame_procrustes", "projected_mean", "karcher"), default="mean_frame_procrustes")
    p.add_argument("--bins", type=int, default=360, help="azimuth bins K")
    p.add_argument("--center", choices=("trimmed", "mean"), default="trimmed")
    p.add_argument("--hemisphere-flip", action="store_true")
    p.add_argument("--frs-iters", type=int, default=10)
    p.add_argument("--frs-tol", type=int, default=1)
    p.add_argument("--refine", action="store_true", help="guarded one-shot Procrustes refinement")
    p.add_argument("--allow-improper", action="store_true", help="search all 48 signed permutations")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pasi", dest="pasi", action="store_true", default=pasi_default)
    g.add_argument("--no-pasi", dest="pasi", action="store_false")
    p.add_argument("--threshold", type=_floats, default=DEFAULT_THRESHOLDS, help="success thresholds in degrees")
    p.add_argument("--hist-dir", type=Path, help="write per-axis azimuth histogram CSVs here")


def _alignment_config(args):
    mc = MatcherConfig(
        bins=args.bins,
        kind=args.matcher,
        center=args.center,
        hemisphere_flip=args.hemisphere_flip,
        frs_max_iters=args.frs_iters,
        frs_tol=args.frs_tol,
    )
    return AlignmentConfig(
        matcher=mc,
        fusion=args.fusion,
        pasi=args.pasi,
        proper_only=not args.allow_improper,
        procrustes_refine=args.refine,
    )


def _write_histograms(directory, targets, aligned, bins):
    directory.mkdir(parents=True, exist_ok=True)
    ta, tb = tbvs_from_so3(targets), tbvs_from_so3(aligned)
    for i, name in enumerate("xyz"):
        r = rotation_to_north(mean_direction(ta[i]))
        write_histogram_csv(azimuth_histogram(apply_rotation(ta[i], r), "z", bins), directory / f"target_{name}.csv")
        write_histogram_csv(azimuth_histogram(apply_rotation(tb[i], r), "z", bins), directory / f"aligned_{name}.csv")


def _trial_seeds(seed, trials):
    return np.random.default_rng(np.random.SeedSequence(seed)).integers(0, 2**63 - 1, size=(trials, 4))


# --------------------------------------------------------------------------


def cmd_simulate(args):
    cfg = _alignment_config(args)
    planted = from_mapping(args.plant_l) if args.plant_l else IDENTITY
    level = CorruptionSpec(level=args.level)
    trials = []
    errors = []
    t_total = 0.0
    for k, (s_data, s_rot, s_shuffle, s_corrupt) in enumerate(_trial_seeds(args.seed, args.trials)):
        spec = scenario(args.scenario, args.n, seed=int(s_data))
        a = generate_scenario(spec)
        r_gt = random_rotations(1, seed=int(s_rot))[0]
        b = plant_global(a, r_gt, planted, shuffle_seed=int(s_shuffle))
        b = corrupt(b, CorruptionSpec(noise_std=level.noise_std, outlier_fraction=level.outlier_fraction, seed=int(s_corrupt)))
        t0 = time.perf_counter()
        ga = align(a, b, cfg)
        t_total += time.perf_counter() - t0
        err = float(np.degrees(geodesic_angle(ga.r_bar, r_gt)))
        errors.append(err)
        trials.append(
            {
                "trial": k,
                "r_gt": r_gt.tolist(),
                "r_bar": ga.r_bar.tolist(),
                "l_star": ga.l_star.matrix.tolist(),
                "l_star_correct": ga.l_star == planted,
                "error_deg": err,
                "score": ga.score,
            }
        )
        if args.hist_dir and k == 0:
            _write_histograms(args.hist_dir, a, apply_alignment(b, ga), args.bins)
    mae, rmse, med, rates = summarize_errors(errors, args.threshold)
    out = {
        "command": "simulate",
        "scenario": args.scenario,
        "n": args.n,
        "level": args.level,
        "matcher": args.matcher,
        "fusion": args.fusion,
        "pasi": args.pasi,
        "planted_l": to_mapping(planted),
        "seed": args.seed,
        "trials": args.trials,
        "mae_deg": mae,
        "rmse_deg": rmse,
        "median_deg": med,
        "success_rates": {f"{t:g}": v for t, v in rates.items()},
        "l_star_recovery_rate": float(np.mean([t["l_star_correct"] for t in trials])),
        "runtime_s": t_total,
        "per_trial": trials,
    }
    write_json(out, args.out)
    return 0


def cmd_align(args):
    cfg = _alignment_config(args)
    a = ingest_pose_csv(args.target, args.cols, args.quat_convention, args.time_scale)
    b = ingest_pose_csv(args.source, args.cols_source or args.cols, args.quat_convention, args.time_scale)
    t0 = time.perf_counter()
    ga = align(a, b, cfg)
    runtime = time.perf_counter() - t0
    out = {"command": "align", "n_target": len(a), "n_source": len(b), "runtime_s": runtime}
    out.update(alignment_to_dict(ga))
    aligned = apply_alignment(b, ga)
    if args.eval_max_gap is not None:
        pairs = pair_by_timestamp(a, aligned, args.eval_max_gap)
        rep = error_report(a, aligned, pairs, args.threshold, runtime)
        out["evaluation"] = error_report_to_dict(rep)
        if args.errors_csv:
            emit_report(rep, args.errors_csv, "csv")
    if args.hist_dir:
        _write_histograms(args.hist_dir, a, aligned, args.bins)
    write_json(out, args.out)
    return 0


def cmd_bench(args):
    cfg = _alignment_config(args)
    rep = scaling_benchmark(args.sizes, scenario(args.scenario, 10), cfg, args.repeats, args.window_min, args.seed)
    write_json(scaling_report_to_dict(rep), args.out)
    if args.csv:
        emit_report(rep, args.csv, "csv")
    return 0


def cmd_enumerate(args):
    perms = enumerate_signed_permutations(proper_only=not args.all)
    if args.json:
        write_json([{"index": k, "mapping": to_mapping(l), "matrix": l.matrix.tolist(), "det": l.det} for k, l in enumerate(perms)], "-")
        return 0
    for k, l in enumerate(perms):
        print(f"[{k:2d}] det={l.det:+d}  {to_mapping(l)}")
        for row in l.matrix:
            print("     " + " ".join(f"{v:+d}" for v in row))
    return 0


def cmd_validate(args):
    rs = ingest_pose_csv(args.file, args.cols, args.quat_convention, args.time_scale)
    ts = rs.timestamps
    write_json(
        {
            "command": "validate",
            "file": str(args.file),
            "rows": len(rs),
            "t_start": float(ts[0]),
            "t_end": float(ts[-1]),
            "monotone_timestamps": bool(np.all(np.diff(ts) >= 0)),
        },
        args.out,
    )
    return 0


def cmd_export(args):
    s_data, s_rot, s_shuffle, s_corrupt = _trial_seeds(args.seed, 1)[0]
    a = generate_scenario(scenario(args.scenario, args.n, seed=int(s_data)))
    rs = a
    if args.role == "source":
        r_gt = random_rotations(1, seed=int(s_rot))[0]
        planted = from_mapping(args.plant_l) if args.plant_l else IDENTITY
        rs = plant_global(a, r_gt, planted, shuffle_seed=int(s_shuffle) if args.shuffle else None)
        level = CorruptionSpec(level=args.level)
        rs = corrupt(rs, CorruptionSpec(noise_std=level.noise_std, outlier_fraction=level.outlier_fraction, seed=int(s_corrupt)))
    rs = RotationSet(rs.matrices, args.t0 + args.dt * np.arange(len(rs)))
    export_pose_csv(rs, args.path)
    return 0


# --------------------------------------------------------------------------


def _csv_args(p):
    p.add_argument("--cols", help="column order, e.g. t,x,y,z,qx,qy,qz,qw ('_' skips a column)")
    p.add_argument("--quat-convention", choices=("hamilton", "jpl"), default="hamilton")
    p.add_argument("--time-scale", type=float, default=1.0, help="multiply timestamps by this (1e-9 for ns)")


def build_parser():
    parser = argparse.ArgumentParser(prog="so3align", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", type=Path, help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthetic scenario -> alignment -> error report")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--level", choices=sorted(CORRUPTION_LEVELS), default="B1")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plant-l", help="signed permutation to plant, as a mapping string")
    p.add_argument("--out", default="-")
    _add_alignment_args(p, pasi_default=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("align", help="align two pose CSVs")
    p.add_argument("target")
    p.add_argument("source")
    _csv_args(p)
    p.add_argument("--cols-source", help="column order of the source CSV if it differs")
    p.add_argument("--eval-max-gap", type=float, help="time-align for evaluation with this max gap (s)")
    p.add_argument("--errors-csv", help="per-pair error CSV (needs --eval-max-gap)")
    p.add_argument("--out", default="-")
    _add_alignment_args(p, pasi_default=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("bench", help="runtime scaling benchmark")
    p.add_argument("--sizes", type=_ints, default=(10_000, 100_000, 1_000_000))
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--window-min", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--csv")
    _add_alignment_args(p, pasi_default=False)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("enumerate-l", help="list signed permutation hypotheses")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--proper", action="store_true", default=True, help="24 proper ones (default)")
    g.add_argument("--all", action="store_true", help="all 48")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("validate", help="check that a pose CSV parses")
    p.add_argument("file")
    _csv_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="write a synthetic rotation set as a pose CSV")
    p.add_argument("path")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--role", choices=("target", "source"), default="target")
    p.add_argument("--plant-l")
    p.add_argument("--level", choices=sorted(CORRUPTION_LEVELS), default="B1")
    p.add_argument("--shuffle", action="store_true")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.set_defaults(func=cmd_export)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = json.loads(known.config.read_text(encoding="utf-8"))
    if not isinstance(values, dict):
        raise So3AlignError("config file must hold a flat JSON object")
    converters = {"sizes": lambda v: tuple(v) if isinstance(v, list) else _ints(str(v)),
                  "threshold": lambda v: tuple(v) if isinstance(v, list) else _floats(str(v))}
    cleaned = {k.replace("-", "_"): converters.get(k.replace("-", "_"), lambda v: v)(v) for k, v in values.items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cleaned)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError, So3AlignError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (So3AlignError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
