"""Command-line entry point: ``riemannian-ds {gen-dataset,train,rollout,bench}``.

Exit status is 0 on success and 2 when an input fails validation.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import lasa
from .benchmark import BenchmarkConfig, run_benchmark
from .learning import DEFAULT_GAIN, RiemannianDS, export_trajectory_csv, train
from .manifolds import SPD, DomainError, mandel_unvectorize

log = logging.getLogger("riemannian_ds")


def _parse_point(text, manifold):
    vals = np.array([float(v) for v in text.replace(" ", "").split(",") if v])
    if isinstance(manifold, SPD):
        return mandel_unvectorize(vals)
    return vals


def _start_point(text, model):
    if "," not in text:
        idx = int(text)
        if not 0 <= idx < len(model.starts):
            raise ValueError(f"demo index {idx} out of range (model has {len(model.starts)} starts)")
        return model.starts[idx]
    return _parse_point(text, model.manifold)


def cmd_gen_dataset(args):
    paths = lasa.generate_dataset(args.input, args.manifold, args.out)
    for p in paths:
        print(p)


def cmd_train(args):
    cls = lasa.load_riemannian_class(args.cls)
    demos = cls.demos if args.points is None else lasa.downsample(cls.demos, args.points)
    model = train(demos, args.k_gauss, k=args.gain, seed=args.seed, anchor_starts=args.anchor_starts)
    model.save(args.model_out)
    log.info("trained %s (%d components) -> %s", cls.name, model.diffeo.n_components, args.model_out)


def cmd_rollout(args):
    model = RiemannianDS.load(args.model)
    start = _start_point(args.start, model)
    dt = model.dt if args.dt is None else args.dt
    if args.switch_goal is not None:
        if args.at is None:
            raise ValueError("--switch-goal needs --at")
        new_goal = _parse_point(args.switch_goal, model.manifold)
        traj = model.rollout_with_goal_switch(start, args.steps, args.at, new_goal,
                                              k_goal=args.k_goal, dt=dt)
        goal = new_goal
    else:
        traj = model.rollout(start, args.steps, dt)
        goal = model.goal
    export_trajectory_csv(args.out, traj, dt, goal, model.manifold)


def cmd_bench(args):
    methods = [m for m in args.methods.split(",") if m]
    cfg = BenchmarkConfig(args.dataset, methods, args.k_gauss, args.points, args.seed,
                          args.gain, args.workers, args.include_multimodal)
    report = run_benchmark(cfg)
    report.save(args.report)
    for key, agg in report.aggregates.items():
        print(f"{key:<16} rmse {agg['rmse_mean']:.4f} +- {agg['rmse_std']:.4f}  "
              f"time {agg['time_mean']:.3f} +- {agg['time_std']:.3f} s  ({agg['n_classes']} classes)")


def build_parser():
    p = argparse.ArgumentParser(prog="riemannian-ds",
                                description="Learn stable motions on unit quaternions and SPD matrices.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dataset", help="convert 2-D handwriting classes to UQ or SPD classes")
    g.add_argument("--input", required=True, help="directory of .csv or .mat classes")
    g.add_argument("--manifold", required=True, choices=["uq", "spd"])
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_dataset)

    t = sub.add_parser("train", help="fit a model to one class file")
    t.add_argument("--class", dest="cls", required=True)
    t.add_argument("--k-gauss", type=int, default=10)
    t.add_argument("--gain", type=float, default=DEFAULT_GAIN)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--points", type=int, default=None, help="downsample demos first")
    t.add_argument("--anchor-starts", action="store_true", help="pin rollouts to the demo starts")
    t.add_argument("--model-out", required=True)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("rollout", help="generate a trajectory from a saved model")
    r.add_argument("--model", required=True)
    r.add_argument("--start", required=True, help="comma-separated point or demo index")
    r.add_argument("--steps", type=int, required=True)
    r.add_argument("--dt", type=float, default=None)
    r.add_argument("--switch-goal", default=None, help="comma-separated new goal")
    r.add_argument("--at", type=int, default=None)
    r.add_argument("--k-goal", type=float, default=None, help="goal dynamics gain (default: instant)")
    r.add_argument("--out", default="/dev/stdout")
    r.set_defaults(func=cmd_rollout)

    b = sub.add_parser("bench", help="benchmark methods on a generated dataset")
    b.add_argument("--dataset", required=True)
    b.add_argument("--methods", default="rdsl,normalize,cholesky")
    b.add_argument("--k-gauss", type=int, default=10)
    b.add_argument("--points", type=int, default=100)
    b.add_argument("--gain", type=float, default=DEFAULT_GAIN)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--include-multimodal", action="store_true")
    b.add_argument("--report", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ValueError, DomainError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
