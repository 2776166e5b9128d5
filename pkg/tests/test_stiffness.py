import numpy as np
import pytest

from riemannian_ds.learning import train
from riemannian_ds.manifolds import Sphere
from riemannian_ds.stiffness import (
    StiffnessProfile, angular_covariance, build_stiffness_demos, linear_covariance,
    stiffness_from_covariance, tangent_basis,
)


def test_opposite_positions_give_outer_product(rng):
    u = rng.normal(size=3)
    cov = linear_covariance(np.stack([np.tile(u, (4, 1)), np.tile(-u, (4, 1))]))
    np.testing.assert_allclose(cov, np.tile(np.outer(u, u), (4, 1, 1)), atol=1e-15)


def test_covariance_needs_two_demos():
    with pytest.raises(ValueError):
        linear_covariance(np.zeros((1, 5, 3)))
    with pytest.raises(ValueError):
        linear_covariance(np.zeros((5, 3)))


def test_stiffness_eigenvalue_formula():
    k = 1000.0
    prof = stiffness_from_covariance(np.diag([0.0, 1.0 / k, 1.0]), k)
    np.testing.assert_allclose(np.sort(prof.eigenvalues()[0]), [1.0 / (1.0 + 1.0 / k), k / 2, k], rtol=1e-12)


def test_zero_variance_gives_max_gain():
    prof = stiffness_from_covariance(np.zeros((5, 3, 3)), 150.0, units="Nm/rad")
    np.testing.assert_allclose(prof.samples, np.tile(150.0 * np.eye(3), (5, 1, 1)))
    assert prof.final_error() == 0.0


def test_strict_variant_does_not_reach_max_gain():
    prof = stiffness_from_covariance(np.zeros((3, 3)), 1000.0, strict=True)
    np.testing.assert_allclose(prof.samples[0], np.eye(3) / 1000.0)


def test_floor_and_input_checks():
    prof = stiffness_from_covariance(np.diag([1e6, 0.0, 0.0]), 100.0, floor=5.0)
    assert prof.eigenvalues().min() == pytest.approx(5.0)
    with pytest.raises(ValueError, match="step 0"):
        stiffness_from_covariance(np.diag([-1.0, 0.0, 0.0]), 100.0)
    with pytest.raises(ValueError):
        stiffness_from_covariance(np.zeros((3, 3)), 0.0)


def test_eigenvectors_follow_covariance(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    cov = q @ np.diag([0.5, 0.02, 0.001]) @ q.T
    k = stiffness_from_covariance(cov, 1000.0).samples[0]
    w, v = np.linalg.eigh(k)
    # largest variance direction is the softest axis
    assert abs(np.dot(v[:, 0], q[:, 0])) == pytest.approx(1.0, abs=1e-10)
    assert abs(np.dot(v[:, 2], q[:, 2])) == pytest.approx(1.0, abs=1e-10)


def test_response_is_monotone_in_variance():
    lam = np.linspace(0, 2, 50)
    k = np.array([stiffness_from_covariance(l * np.eye(3), 150.0).samples[0, 0, 0] for l in lam])
    assert np.all(np.diff(k) < 0)


def test_angular_covariance_of_symmetric_rotations(rng):
    goal = np.array([1.0, 0.0, 0.0, 0.0])
    s = Sphere(3)
    basis = tangent_basis(goal)
    np.testing.assert_allclose(basis @ basis.T, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(basis @ goal, 0.0, atol=1e-15)
    theta, u = 0.3, basis[1]
    demo = lambda sign: np.tile(s.exp(goal, sign * theta * u), (6, 1))
    cov = angular_covariance(np.stack([demo(1), demo(-1)]), goal)
    w, v = np.linalg.eigh(cov[0])
    np.testing.assert_allclose(w, [0.0, 0.0, theta ** 2], atol=1e-14)
    assert abs(v[1, 2]) == pytest.approx(1.0)


def test_csv_round_trip(tmp_path, rng):
    cov = np.array([np.cov(rng.normal(size=(3, 10))) for _ in range(8)])
    prof = stiffness_from_covariance(cov, 1000.0)
    path = tmp_path / "stiff.csv"
    prof.to_csv(path, 0.01)
    header = open(path).readline().strip()
    assert header == "t,k11,k22,k33,k12,k13,k23"
    back = StiffnessProfile.from_csv(path)
    np.testing.assert_array_equal(back.samples, prof.samples)
    assert back.max_gain == 1000.0 and back.units == "N/m"


def _profile_ending_at_goal(rng, k, n=40):
    scale = np.linspace(1.0, 0.0, n)[:, None, None]
    a = rng.normal(size=(3, 3))
    return stiffness_from_covariance(scale * (0.01 * (a @ a.T)), k)


def test_build_demos_and_train_on_stiffness(rng):
    profiles = [_profile_ending_at_goal(rng, 1000.0) for _ in range(3)]
    demos = build_stiffness_demos(profiles, 0.01)
    np.testing.assert_array_equal(demos.goal, 1000.0 * np.eye(3))
    model = train(demos, 3)
    traj = model.rollout(demos.starts[0], 120)
    assert model.manifold.dist(traj[-1], demos.goal) < 1e-3


def test_build_demos_errors(rng):
    with pytest.raises(ValueError):
        build_stiffness_demos([], 0.01)
    with pytest.raises(ValueError, match="different"):
        build_stiffness_demos([_profile_ending_at_goal(rng, 1000.0), _profile_ending_at_goal(rng, 150.0)], 0.01)
    soft = stiffness_from_covariance(np.tile(np.eye(3), (4, 1, 1)), 1000.0)
    with pytest.raises(ValueError, match="does not end"):
        build_stiffness_demos([soft], 0.01)


def test_constant_profile_trains_and_stays():
    prof = stiffness_from_covariance(np.zeros((20, 3, 3)), 150.0)
    demos = build_stiffness_demos([prof, prof], 0.01)
    traj = train(demos, 2).rollout(demos.goal, 30)
    np.testing.assert_allclose(traj, np.tile(150.0 * np.eye(3), (30, 1, 1)), rtol=1e-12)
