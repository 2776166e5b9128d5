"""Benchmark harness: accuracy and training time on the Riemannian LASA classes.

Methods
-------
``rdsl``
    The manifold learner from :mod:`riemannian_ds.learning`.
``normalize``
    Unit quaternions treated as vectors in R^4: linear base system,
    Euclidean GMM diffeomorphism, each output sample renormalized.
``cholesky``
    SPD matrices mapped to the Mandel-scaled entries of their Cholesky
    factor, learned in that Euclidean space and rebuilt as ``L L^T``.
"""

import concurrent.futures
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lasa
from .learning import DEFAULT_GAIN, DemonstrationSet, train
from .manifolds import Euclidean

log = logging.getLogger(__name__)

METHODS_FOR = {"uq": ("rdsl", "normalize"), "spd": ("rdsl", "cholesky")}
EVAL_STEPS = 100


def evaluate_rmse(model, demos, n_steps=EVAL_STEPS):
    """Mean over demos of the per-demo RMSE (Riemannian distance) over ``n_steps`` samples."""
    if demos.length < n_steps:
        raise ValueError(f"demonstrations have {demos.length} samples, need {n_steps}")
    m = demos.manifold
    per_demo = []
    for demo in demos.demos:
        traj = model.rollout(demo[0], n_steps)
        d = np.array([m.dist(p, q) for p, q in zip(traj, demo[:n_steps])])
        per_demo.append(np.sqrt(np.mean(d ** 2)))
    return float(np.mean(per_demo))


# ---------------------------------------------------------------------------
# Euclidean baselines


def _chol_vec(p):
    c = np.linalg.cholesky(p)
    return np.array([c[0, 0], c[1, 1], np.sqrt(2.0) * c[1, 0]])


def _chol_unvec(v):
    c = np.array([[v[0], 0.0], [v[2] / np.sqrt(2.0), v[1]]])
    return c @ c.T


class EuclideanBaseline:
    """Learn in a flat chart and map samples back onto the manifold."""

    def __init__(self, to_flat, from_flat):
        self.to_flat = to_flat
        self.from_flat = from_flat
        self.model = None

    def fit(self, demos, n_components=10, k=DEFAULT_GAIN, seed=0):
        flat = np.array([[self.to_flat(p) for p in demo] for demo in demos.demos])
        goal = self.to_flat(demos.goal)
        flat_demos = DemonstrationSet(flat, demos.dt, goal, Euclidean(len(goal)))
        self.model = train(flat_demos, n_components, k=k, seed=seed)
        return self

    def rollout(self, start, steps=None, dt=None):
        traj = self.model.rollout(self.to_flat(start), steps, dt)
        return np.array([self.from_flat(x) for x in traj])


def _normalize(x):
    n = np.linalg.norm(x)
    if n < 1e-12:
        raise FloatingPointError("cannot normalize a zero vector")
    return x / n


def normalize_baseline():
    return EuclideanBaseline(lambda q: np.asarray(q, dtype=float), _normalize)


def cholesky_baseline():
    return EuclideanBaseline(_chol_vec, _chol_unvec)


def fixed_chart_baseline(manifold, origin):
    """Learn in the single tangent space at ``origin`` (``Log_origin`` chart)."""
    origin = manifold.check_point(origin)
    return EuclideanBaseline(
        lambda p: manifold.vec(origin, manifold.log(origin, p)),
        lambda x: manifold.exp(origin, manifold.unvec(origin, x)))


def baseline_normalize_train(demos, n_components=10, k=DEFAULT_GAIN, seed=0):
    return normalize_baseline().fit(demos, n_components, k, seed)


def baseline_cholesky_train(demos, n_components=10, k=DEFAULT_GAIN, seed=0):
    return cholesky_baseline().fit(demos, n_components, k, seed)


def fit_method(method, demos, n_components=10, k=DEFAULT_GAIN, seed=0):
    if method == "rdsl":
        return train(demos, n_components, k=k, seed=seed)
    if method == "normalize":
        return baseline_normalize_train(demos, n_components, k, seed)
    if method == "cholesky":
        return baseline_cholesky_train(demos, n_components, k, seed)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# benchmark


@dataclass
class BenchmarkConfig:
    dataset: str
    methods: list = field(default_factory=lambda: ["rdsl", "normalize", "cholesky"])
    n_components: int = 10
    points: int = 100
    seed: int = 0
    k: float = DEFAULT_GAIN
    workers: int = 1
    include_multimodal: bool = False


@dataclass
class BenchmarkReport:
    config: dict
    records: list
    aggregates: dict

    def to_dict(self):
        return {"config": self.config, "records": self.records, "aggregates": self.aggregates}

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        return cls(data["config"], data["records"], data["aggregates"])


def aggregate(records):
    groups = {}
    for r in records:
        groups.setdefault(f"{r['manifold']}/{r['method']}", []).append(r)
    out = {}
    for key, rs in sorted(groups.items()):
        rmse = np.array([r["rmse"] for r in rs])
        tt = np.array([r["training_seconds"] for r in rs])
        out[key] = {
            "n_classes": len(rs),
            "rmse_mean": float(rmse.mean()), "rmse_std": float(rmse.std()),
            "time_mean": float(tt.mean()), "time_std": float(tt.std()),
        }
    return out


def _run_class(path, cfg):
    cls = lasa.load_riemannian_class(path)
    demos = lasa.downsample(cls.demos, cfg.points)
    records = []
    for method in cfg.methods:
        if method not in METHODS_FOR[cls.manifold]:
            continue
        t0 = time.perf_counter()
        model = fit_method(method, demos, cfg.n_components, cfg.k, cfg.seed)
        elapsed = time.perf_counter() - t0
        rmse = evaluate_rmse(model, demos, min(EVAL_STEPS, demos.length))
        log.info("%s %s %s rmse=%.4f time=%.3fs", cls.name, cls.manifold, method, rmse, elapsed)
        records.append({"class": cls.name, "manifold": cls.manifold, "method": method,
                        "K": cfg.n_components, "rmse": rmse, "training_seconds": elapsed})
    return records


def run_benchmark(config):
    """Train and score every method on every class file under ``config.dataset``."""
    if not os.path.isdir(config.dataset):
        raise FileNotFoundError(f"dataset directory {config.dataset} does not exist")
    paths = lasa.list_classes(config.dataset, include_multimodal=config.include_multimodal)
    if config.methods and not paths:
        raise FileNotFoundError(f"no Riemannian class files in {config.dataset}")
    records = []
    if config.methods:
        if config.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(config.workers) as pool:
                for rs in pool.map(_run_class, paths, [config] * len(paths)):
                    records.extend(rs)
        else:
            for p in paths:
                records.extend(_run_class(p, config))
    return BenchmarkReport(asdict(config), records, aggregate(records))
