import numpy as np
import pytest

from riemannian_ds import lasa, learning
from riemannian_ds.manifolds import SPD, Sphere, sym_expm


def random_sphere_point(rng, n):
    p = rng.normal(size=n + 1)
    return p / np.linalg.norm(p)


def random_spd(rng, d, spread=1.0):
    a = rng.normal(scale=spread, size=(d, d))
    return sym_expm(0.5 * (a + a.T))


def random_sym(rng, d, scale=1.0):
    a = rng.normal(scale=scale, size=(d, d))
    return 0.5 * (a + a.T)


def random_tangent(rng, m, base, scale=1.0):
    if isinstance(m, Sphere):
        return m.proj_tangent(base, rng.normal(scale=scale, size=m.ambient_dim))
    return random_sym(rng, m.d, scale)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def uq_demos():
    return lasa.downsample(lasa.synthetic_class("uq").demos, 100)


@pytest.fixture(scope="session")
def spd_demos():
    return lasa.downsample(lasa.synthetic_class("spd").demos, 100)


@pytest.fixture(scope="session")
def uq_model(uq_demos):
    return learning.train(uq_demos, 10)


@pytest.fixture(scope="session")
def spd_model(spd_demos):
    return learning.train(spd_demos, 10)


@pytest.fixture(scope="session")
def lasa_dir(tmp_path_factory):
    """Riemannian LASA classes for both manifolds, or None without the raw data."""
    src = lasa.lasa_data_dir()
    if src is None:
        return None
    out = tmp_path_factory.mktemp("riemannian_lasa")
    for man in ("uq", "spd"):
        lasa.generate_dataset(src, man, str(out))
    return str(out)


MANIFOLDS = [Sphere(2), Sphere(3), SPD(2), SPD(3)]


def sample_point(rng, m):
    return random_sphere_point(rng, m.n) if isinstance(m, Sphere) else random_spd(rng, m.d)
