"""Command-line entry point ``gmtlab``.

Exit status: 0 when every criterion passes, 1 when a criterion fails,
2 for bad input.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import heisenberg as hb
from .caratheodory import SizeFunction, approx_measure_ladder, ball_candidates
from .density import CurveMeasure, SearchBudget, WeightedCloud, centered_density, federer_density
from .experiments import EXPERIMENTS, ExperimentConfig, Report, _plain, run_experiment


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _load_json(text: str):
    """Inline JSON or a path to a JSON file."""
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    return json.loads(Path(text).read_text())


def _space(args):
    from .metric import MetricSpec

    if getattr(args, "space_file", None):
        return MetricSpec.from_json(args.space_file)
    return MetricSpec.named(args.space)


def _emit(doc, out: str | None) -> None:
    text = json.dumps(_plain(doc), indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["experiment", "quantity", "value", "uncertainty", "provenance"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})


def _summary(rep: Report) -> str:
    failed = [c["name"] for c in rep.criteria if not c["passed"]]
    status = "PASS" if rep.passed else "FAIL " + ",".join(failed)
    return f"{rep.experiment}: {status} ({rep.wall_clock:.1f}s)"


# -- subcommands ----------------------------------------------------------------

def cmd_run(args) -> int:
    doc = _load_json(args.config) if args.config else {}
    config = ExperimentConfig.from_json(doc, args.experiment)
    if args.seed is not None:
        config.seed = args.seed
    rep = run_experiment(config)
    out = args.out or config.out
    _emit(rep.to_json(), out)
    if args.csv:
        _write_csv(Path(args.csv), rep.rows())
    print(_summary(rep), file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_all(args) -> int:
    overrides = _load_json(args.config) if args.config else {}
    out_dir = Path(args.out) if args.out else None
    rows, ok = [], True
    for name in EXPERIMENTS:
        rep = run_experiment(ExperimentConfig(name, args.seed, dict(overrides.get(name, {}))))
        ok &= rep.passed
        rows.extend(rep.rows())
        if out_dir is not None:
            _emit(rep.to_json(), str(out_dir / f"{name}.json"))
        print(_summary(rep), file=sys.stderr)
    if args.csv:
        _write_csv(Path(args.csv), rows)
    return 0 if ok else 1


def _size_function(args) -> SizeFunction:
    if args.kind == "hausdorff":
        return SizeFunction.hausdorff(args.alpha, args.c)
    return SizeFunction.spherical(args.alpha, args.c)


def cmd_measure(args) -> int:
    from .metric import Cloud, set_from_json

    space = _space(args)
    target = set_from_json(_load_json(args.target))
    candidates = None
    if args.candidates:
        candidates = [(frozenset(c["set"]), float(c["size"])) for c in _load_json(args.candidates)]
    z = None if candidates is not None else _size_function(args)
    if space.kind == "finite" and candidates is None:
        candidates = ball_candidates(space)
    if space.kind == "finite" and not isinstance(target, Cloud):
        raise ValueError("finite spaces take {\"cloud\": [labels]} targets")
    ladder = approx_measure_ladder(space, target, z, _floats(args.delta_ladder), args.strategy, candidates,
                                   exact=args.exact)
    _emit(ladder.to_json(), args.out)
    return 0


def _measure(doc, space):
    if "arclength" in doc:
        a = doc["arclength"]
        return CurveMeasure.arclength(a["start"], a["end"])
    if "vertical" in doc:
        v = doc["vertical"]
        return CurveMeasure.intrinsic(hb.CurveSpec.vertical_segment(float(v["length"]), v.get("base", (0, 0, 0))))
    if "cloud" in doc:
        pts = doc["cloud"]
        pts = pts if pts and isinstance(pts[0], str) else np.asarray(pts, dtype=float)
        return WeightedCloud(pts, np.asarray(doc["weights"], dtype=float))
    raise ValueError(f"unrecognised measure description: {sorted(doc)}")


def cmd_density(args) -> int:
    space = _space(args)
    mu = _measure(_load_json(args.measure), space)
    point = args.point if space.kind == "finite" else _floats(args.point)
    ladder = _floats(args.ladder)
    if args.mode == "centered":
        est = centered_density(space, mu, args.alpha, point, ladder)
    else:
        budget = SearchBudget(**_load_json(args.budget)) if args.budget else None
        est = federer_density(space, mu, SizeFunction.spherical(args.alpha, args.c), point, ladder, budget)
    _emit(est.to_json(), args.out)
    return 0


def cmd_heisenberg(args) -> int:
    if args.action == "distance":
        p, q = np.array(_floats(args.p)), np.array(_floats(args.q))
        fn = hb.cc_distance if args.metric == "cc" else hb.koranyi_distance
        _emit({"metric": args.metric, "p": p, "q": q, "distance": float(fn(p, q))}, args.out)
    elif args.action == "profile":
        profile = hb.unit_ball_profile(args.metric, (args.radii, args.angles))
        rows = profile.to_rows()
        fh = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            writer = csv.writer(fh)
            writer.writerow(["radius", "t_low", "t_high"])
            writer.writerows(rows)
        finally:
            if args.out:
                fh.close()
    elif args.action == "alpha-beta":
        alpha, beta, arg = hb.alpha_beta(hb.unit_ball_profile(args.metric, (args.radii, args.angles)))
        _emit({"metric": args.metric, "alpha": alpha, "beta": beta, "argmax_radius": arg,
               "ratio": alpha / beta}, args.out)
    elif args.action == "curve-measure":
        curve = hb.CurveSpec.from_json(_load_json(args.curve))
        curve.check()
        interval = tuple(_floats(args.interval)) if args.interval else None
        _emit({"intrinsic_measure": hb.intrinsic_measure(curve, interval)}, args.out)
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmtlab", description="Covering measures and densities in metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=sorted(EXPERIMENTS))
    run.add_argument("--config", help="JSON file or inline JSON with parameter overrides")
    run.add_argument("--out", help="report path (default: stdout)")
    run.add_argument("--seed", type=int)
    run.add_argument("--csv", help="also write quantities as CSV")
    run.set_defaults(func=cmd_run)

    everything = sub.add_parser("all", help="run every experiment")
    everything.add_argument("--seed", type=int, default=42)
    everything.add_argument("--config", help="JSON mapping experiment -> parameter overrides")
    everything.add_argument("--out", help="directory for per-experiment reports")
    everything.add_argument("--csv")
    everything.set_defaults(func=cmd_all)

    def space_args(p):
        p.add_argument("--space", default="euclidean2", help="euclidean<N>, koranyi or cc")
        p.add_argument("--space-file", help="finite metric space JSON {labels, distances}")

    meas = sub.add_parser("measure-estimate", help="delta-premeasure ladder for a set")
    space_args(meas)
    meas.add_argument("--target", required=True, help="set JSON (cloud, ball, segment, vertical)")
    meas.add_argument("--kind", choices=["hausdorff", "spherical"], default="hausdorff")
    meas.add_argument("--alpha", type=float, default=1.0)
    meas.add_argument("--c", type=float, default=1.0)
    meas.add_argument("--delta-ladder", required=True, help="comma-separated, strictly decreasing")
    meas.add_argument("--strategy", default=None, choices=["auto", "net", "offset", "greedy"])
    meas.add_argument("--candidates", help="finite spaces: JSON list of {set, size}")
    meas.add_argument("--exact", action="store_true", help="finite spaces: branch and bound")
    meas.add_argument("--out")
    meas.set_defaults(func=cmd_measure)

    dens = sub.add_parser("density", help="Federer or centred density at a point")
    space_args(dens)
    dens.add_argument("--measure", required=True, help="JSON: arclength, vertical or weighted cloud")
    dens.add_argument("--point", required=True, help="comma-separated coordinates or a label")
    dens.add_argument("--mode", choices=["federer", "centered"], default="federer")
    dens.add_argument("--alpha", type=float, default=1.0)
    dens.add_argument("--c", type=float, default=1.0)
    dens.add_argument("--ladder", required=True, help="epsilon (federer) or radius (centered) ladder")
    dens.add_argument("--budget", help="JSON search budget overrides")
    dens.add_argument("--out")
    dens.set_defaults(func=cmd_density)

    heis = sub.add_parser("heisenberg", help="Heisenberg group utilities")
    heis.add_argument("action", choices=["distance", "profile", "alpha-beta", "curve-measure"])
    heis.add_argument("--metric", choices=["cc", "koranyi"], default="cc")
    heis.add_argument("--p", default="0,0,0")
    heis.add_argument("--q", default="0,0,0")
    heis.add_argument("--radii", type=int, default=64)
    heis.add_argument("--angles", type=int, default=256)
    heis.add_argument("--curve", help="curve JSON {interval, nodes, positions, derivatives}")
    heis.add_argument("--interval", help="sub-interval a,b")
    heis.add_argument("--out")
    heis.set_defaults(func=cmd_heisenberg)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"gmtlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
