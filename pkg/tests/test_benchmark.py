import json

import numpy as np
import pytest

from riemannian_ds import lasa
from riemannian_ds.benchmark import (
    BenchmarkConfig, BenchmarkReport, aggregate, cholesky_baseline, evaluate_rmse,
    fixed_chart_baseline, fit_method, normalize_baseline, run_benchmark,
)
from riemannian_ds.manifolds import Sphere


class Replay:
    """Model that plays back a fixed trajectory."""

    def __init__(self, traj):
        self.traj = traj

    def rollout(self, start, steps=None, dt=None):
        return self.traj[:steps]


def test_rmse_of_exact_replay_is_zero(uq_demos):
    demos = lasa.downsample(uq_demos, 100)
    one = lasa.DemonstrationSet(demos.demos[:1], demos.dt, demos.goal)
    assert evaluate_rmse(Replay(demos.demos[0]), one) < 1e-12


def test_rmse_of_constant_goal_rollout(spd_demos):
    # staying at the goal scores the RMS distance of each demo to the goal
    m = spd_demos.manifold
    model = Replay(np.tile(spd_demos.goal, (100, 1, 1)))
    expected = np.mean([np.sqrt(np.mean([m.dist(p, spd_demos.goal) ** 2 for p in d])) for d in spd_demos.demos])
    assert evaluate_rmse(model, spd_demos) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        evaluate_rmse(model, spd_demos, 101)


def test_normalize_baseline_outputs_unit_quaternions(uq_demos):
    model = normalize_baseline().fit(uq_demos, 5)
    traj = model.rollout(uq_demos.starts[0])
    np.testing.assert_allclose(np.linalg.norm(traj, axis=1), 1.0, atol=1e-12)
    assert evaluate_rmse(model, uq_demos) < 0.1


def test_cholesky_baseline_outputs_spd(spd_demos):
    model = cholesky_baseline().fit(spd_demos, 5)
    traj = model.rollout(spd_demos.starts[0])
    assert np.linalg.eigvalsh(traj).min() > 0
    np.testing.assert_allclose(traj, np.swapaxes(traj, 1, 2))
    at_goal = model.rollout(spd_demos.goal, 20)
    assert spd_demos.manifold.dist(at_goal[-1], spd_demos.goal) < 1e-3


def test_fixed_chart_baseline_round_trips_points():
    n = lasa.n_shape_on_s2()
    model = fixed_chart_baseline(Sphere(2), [0.0, 0.0, 1.0])
    for p in n.demos[0, ::10]:
        assert Sphere(2).dist(model.from_flat(model.to_flat(p)), p) < 1e-12


def test_fit_method_dispatch(uq_demos):
    assert fit_method("normalize", uq_demos, 10).model is not None
    with pytest.raises(ValueError):
        fit_method("flow", uq_demos)


def test_aggregates_recompute_from_records():
    rng = np.random.default_rng(0)
    records = [{"class": f"c{i}", "manifold": man, "method": meth, "K": 10,
                "rmse": float(rng.random()), "training_seconds": float(rng.random())}
               for i in range(5) for man, meth in (("uq", "rdsl"), ("uq", "normalize"))]
    agg = aggregate(records)
    assert set(agg) == {"uq/rdsl", "uq/normalize"}
    sel = [r["rmse"] for r in records if r["method"] == "rdsl"]
    assert agg["uq/rdsl"]["rmse_mean"] == np.mean(sel)
    assert agg["uq/rdsl"]["rmse_std"] == np.std(sel)
    assert agg["uq/rdsl"]["n_classes"] == 5


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    for man in ("uq", "spd"):
        cls = lasa.synthetic_class(man)
        cls.name = "synthetic"
        lasa.save_riemannian_class(str(out / f"synthetic_{man}.csv"), cls)
    return str(out)


def test_benchmark_report_round_trip_and_determinism(tmp_path, small_dataset):
    cfg = BenchmarkConfig(small_dataset, ["rdsl", "normalize", "cholesky"], 5, 100, 0)
    report = run_benchmark(cfg)
    assert {r["method"] for r in report.records} == {"rdsl", "normalize", "cholesky"}
    assert len(report.records) == 4
    assert report.aggregates == aggregate(report.records)
    path = tmp_path / "report.json"
    report.save(path)
    back = BenchmarkReport.load(path)
    assert set(json.load(open(path))) == {"config", "records", "aggregates"}
    for key, agg in report.aggregates.items():
        assert float(f"{agg['rmse_mean']:.17g}") == back.aggregates[key]["rmse_mean"]
    again = run_benchmark(cfg)
    assert [r["rmse"] for r in again.records] == [r["rmse"] for r in report.records]


def test_benchmark_with_no_methods_is_empty(small_dataset):
    report = run_benchmark(BenchmarkConfig(small_dataset, []))
    assert report.records == [] and report.aggregates == {}


def test_benchmark_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        run_benchmark(BenchmarkConfig(str(tmp_path / "nope")))
    with pytest.raises(FileNotFoundError):
        run_benchmark(BenchmarkConfig(str(tmp_path)))
