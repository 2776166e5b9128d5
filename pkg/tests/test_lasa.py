import json

import numpy as np
import pytest

from riemannian_ds import lasa
from riemannian_ds.lasa import (
    SPD_GOAL, UQ_GOAL, EuclideanMotionClass, assemble_3d_demos, downsample, load_euclidean_class,
    load_riemannian_class, make_riemannian_class, project_to_spd, project_to_uq,
    save_euclidean_class, save_riemannian_class,
)
from riemannian_ds.manifolds import SPD, Sphere, mandel_vectorize


def toy_class(rng, n=50, name="Toy"):
    t = np.linspace(1, 0, n)[None, :, None]
    demos = rng.normal(size=(7, 1, 2)) * t + 0.05 * np.sin(7 * t) * t
    return EuclideanMotionClass(name, demos, 0.02)


def test_slices_pick_the_documented_rows():
    # demo i contributes rows 2i (x) and 2i+1 (y) of the 14 x L stack
    demos = np.arange(7 * 5 * 2, dtype=float).reshape(7, 5, 2)
    out = assemble_3d_demos(demos)
    assert out.shape == (4, 5, 3)
    stack = np.vstack([np.stack([d[:, 0], d[:, 1]]) for d in demos])
    assert stack.shape == (14, 5)
    np.testing.assert_array_equal(out[0].T, stack[[0, 1, 2]])
    np.testing.assert_array_equal(out[3].T, stack[[12, 13, 0]])
    # third row of the last slice wraps to demo 1's x row
    np.testing.assert_array_equal(out[3][:, 2], demos[0][:, 0])


def test_zero_input_maps_to_goal():
    zeros = np.zeros((4, 5, 3))
    uq, _ = project_to_uq(zeros)
    spd = project_to_spd(zeros)
    np.testing.assert_array_equal(uq.demos, np.tile(UQ_GOAL, (4, 5, 1)))
    np.testing.assert_allclose(spd.demos, np.tile(SPD_GOAL, (4, 5, 1, 1)), rtol=1e-14)


def test_projections_invert_through_log(rng):
    cls = toy_class(rng)
    v = assemble_3d_demos(cls)
    uq, scale = project_to_uq(v)
    assert np.abs(v * scale).max() == pytest.approx(1.0)
    s = Sphere(3)
    back = np.array([[s.log(UQ_GOAL, q)[1:] for q in demo] for demo in uq.demos])
    np.testing.assert_allclose(back, v * scale, atol=1e-12)
    spd = project_to_spd(v)
    m = SPD(2)
    back = np.array([[mandel_vectorize(m.log(SPD_GOAL, p)) for p in demo] for demo in spd.demos])
    np.testing.assert_allclose(back, v, atol=1e-10)


def test_class_must_end_at_origin():
    with pytest.raises(ValueError, match="origin"):
        EuclideanMotionClass("bad", np.ones((7, 10, 2)), 0.1)


def test_downsample_indices(uq_demos):
    full = lasa.synthetic_class("uq").demos
    small = downsample(full, 100)
    idx = np.round(np.linspace(0, 999, 100)).astype(int)
    np.testing.assert_array_equal(small.demos, full.demos[:, idx])
    assert small.dt == pytest.approx(full.dt * 10)
    assert downsample(full, 1000) is full
    with pytest.raises(ValueError):
        downsample(full, 1)


def test_euclidean_csv_round_trip(tmp_path, rng):
    cls = toy_class(rng)
    path = tmp_path / "Toy.csv"
    save_euclidean_class(path, cls)
    back = load_euclidean_class(str(path))
    np.testing.assert_array_equal(back.demos, cls.demos)
    assert back.dt == pytest.approx(cls.dt) and back.name == "Toy"


@pytest.mark.parametrize("manifold", ["uq", "spd"])
def test_riemannian_csv_round_trip(tmp_path, rng, manifold):
    cls = make_riemannian_class(toy_class(rng), manifold)
    path = str(tmp_path / f"toy_{manifold}.csv")
    save_riemannian_class(path, cls)
    back = load_riemannian_class(path)
    np.testing.assert_allclose(back.demos.demos, cls.demos.demos, rtol=1e-15, atol=1e-15)
    assert back.manifold == manifold and back.scale == cls.scale


def test_truncated_file_names_the_row(tmp_path, rng):
    path = str(tmp_path / "toy_uq.csv")
    save_riemannian_class(path, make_riemannian_class(toy_class(rng), "uq"))
    lines = open(path).read().splitlines()
    lines[5] = ",".join(lines[5].split(",")[:-1])
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="row 6"):
        load_riemannian_class(path)


def test_non_unit_quaternion_is_rejected(tmp_path, rng):
    path = str(tmp_path / "toy_uq.csv")
    save_riemannian_class(path, make_riemannian_class(toy_class(rng), "uq"))
    lines = open(path).read().splitlines()
    fields = lines[3].split(",")
    fields[2:] = ["0.9", "0.0", "0.0", "0.0"]
    lines[3] = ",".join(fields)
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="norm 0.9"):
        load_riemannian_class(path)


def test_generate_and_list_dataset(tmp_path, rng):
    src = tmp_path / "src"
    src.mkdir()
    for name in ("Alpha", "Multi_Models_1"):
        save_euclidean_class(src / f"{name}.csv", toy_class(rng, name=name))
    out = tmp_path / "out"
    for man in ("uq", "spd"):
        lasa.generate_dataset(str(src), man, str(out))
    assert len(lasa.list_classes(str(out))) == 2
    assert len(lasa.list_classes(str(out), include_multimodal=True)) == 4
    [p] = lasa.list_classes(str(out), manifold="spd")
    assert json.load(open(p[:-4] + ".json"))["manifold"] == "spd"
    with pytest.raises(FileNotFoundError):
        lasa.generate_dataset(str(tmp_path / "empty"), "uq", str(out))


def test_synthetic_classes():
    uq = lasa.synthetic_class("uq")
    assert uq.demos.demos.shape == (4, 1000, 4)
    spd = lasa.synthetic_class("spd")
    assert spd.demos.demos.shape == (4, 1000, 2, 2)
    n = lasa.n_shape_on_s2()
    z = n.demos[0, :, 2]
    assert z.max() > 0.5 and z.min() < -0.5


def test_real_lasa_class_if_installed():
    src = lasa.lasa_data_dir()
    if src is None:
        pytest.skip("handwriting data not installed")
    cls = lasa.load_lasa_mat(f"{src}/Angle.mat")
    assert cls.demos.shape == (7, 1000, 2)
    r = make_riemannian_class(cls, "uq")
    assert r.demos.demos.shape == (4, 1000, 4)
