"""Learning stable dynamics on a manifold from demonstrations.

Training pipeline:

1. integrate the geodesic base system from every demonstration start,
2. express the goal and the demonstration in the tangent space of each base
   point (``a = Log_base(goal)``, ``b = Log_base(demo)``),
3. append identity pairs from a short goal tail and fit a joint GMM on the
   ``(a, b)`` pairs, then add the goal anchor, a broad background component
   (and optionally start anchors).

Reproduction runs the base system again and maps its tangent coordinate
through the learned diffeomorphism, ``demo_hat = Exp_base(psi(a))``.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .base_ds import GeodesicDS, GoalSwitcher, gain_from_normalized
from .gmm import COV_FLOOR, ANCHOR_COV, GmmDiffeomorphism, fit_em
from .manifolds import SPD, Euclidean, Sphere, get_manifold, manifold_for, mandel_vectorize

GOAL_TOL = 1e-6
IDENTITY_TOL = 1e-3
DEFAULT_GAIN = 5.0


def enforce_quaternion_continuity(raw, tol=1e-6):
    """Flip signs so consecutive quaternions have a positive dot product.

    ``q`` and ``-q`` encode the same rotation, so the output describes the
    same orientation trajectory without hemisphere jumps.
    """
    q = np.array(raw, dtype=float)
    if q.ndim != 2:
        raise ValueError("expected a (L, n) array of unit vectors")
    norms = np.linalg.norm(q, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError(f"sample {int(np.argmax(np.abs(norms - 1.0)))} is not unit norm")
    q /= norms[:, None]
    for i in range(1, len(q)):
        dot = np.dot(q[i - 1], q[i])
        if abs(dot) < tol:
            raise ValueError(f"samples {i - 1} and {i} are orthogonal; hemisphere is ambiguous")
        if dot < 0:
            q[i] = -q[i]
    return q


@dataclass
class DemonstrationSet:
    """D demonstrations of L manifold points sharing a goal.

    ``demos`` has shape ``(D, L) + point_shape``.
    """

    demos: np.ndarray
    dt: float
    goal: np.ndarray
    manifold: object = None

    def __post_init__(self):
        self.demos = np.asarray(self.demos, dtype=float)
        self.goal = np.asarray(self.goal, dtype=float)
        if self.manifold is None:
            self.manifold = manifold_for(self.goal)
        self.goal = self.manifold.check_point(self.goal)
        if self.demos.ndim != 2 + self.goal.ndim or self.demos.shape[2:] != self.goal.shape:
            raise ValueError(f"demos of shape {self.demos.shape} do not match goal {self.goal.shape}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for d, demo in enumerate(self.demos):
            for p in demo:
                self.manifold.check_point(p)
            gap = self.manifold.dist(demo[-1], self.goal)
            if gap > GOAL_TOL:
                raise ValueError(f"demonstration {d} ends {gap:.3e} away from the goal")
            if isinstance(self.manifold, Sphere):
                dots = np.einsum("li,li->l", demo[:-1], demo[1:])
                if np.any(dots <= 0):
                    raise ValueError(f"demonstration {d} has a sign discontinuity")

    @property
    def n_demos(self):
        return self.demos.shape[0]

    @property
    def length(self):
        return self.demos.shape[1]

    @property
    def starts(self):
        return self.demos[:, 0]


def generate_base_trajectories(demos, k=DEFAULT_GAIN):
    """Integrate the geodesic system from each demo start with gain k/(L dt)."""
    gain = gain_from_normalized(k, demos.length, demos.dt)
    ds = GeodesicDS(demos.goal, gain, demos.manifold)
    return np.array([ds.trajectory(s, demos.length, demos.dt) for s in demos.starts])


@dataclass
class TangentPairSet:
    """Vectorized tangent pairs; ``a[d, l]`` and ``b[d, l]`` share base ``base[d, l]``."""

    a: np.ndarray
    b: np.ndarray
    base: np.ndarray

    def flat(self):
        n = self.a.shape[-1]
        return self.a.reshape(-1, n), self.b.reshape(-1, n)


def build_tangent_pairs(demos, base):
    """``a = Log_base(goal)``, ``b = Log_base(demo)``, vectorized per manifold."""
    m = demos.manifold
    base = np.asarray(base, dtype=float)
    if base.shape != demos.demos.shape:
        raise ValueError("base trajectories and demonstrations are not aligned")
    a, b = [], []
    for base_d, demo_d in zip(base, demos.demos):
        a.append([m.vec(p, m.log(p, demos.goal)) for p in base_d])
        b.append([m.vec(p, m.log(p, q)) for p, q in zip(base_d, demo_d)])
    return TangentPairSet(np.array(a), np.array(b), base)


@dataclass
class RiemannianDS:
    """A trained stable system on a manifold."""

    manifold: object
    goal: np.ndarray
    k: float
    n_samples: int
    dt: float
    diffeo: GmmDiffeomorphism
    starts: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def gain(self):
        return gain_from_normalized(self.k, self.n_samples, self.dt)

    def base_system(self, goal=None):
        return GeodesicDS(self.goal if goal is None else goal, self.gain, self.manifold)

    def _output(self, base_pt, goal):
        m = self.manifold
        a = m.vec(base_pt, m.log(base_pt, goal))
        b = self.diffeo.forward(a)
        if not np.all(np.isfinite(b)):
            raise FloatingPointError("GMR produced a non-finite output")
        return m.exp(base_pt, m.unvec(base_pt, b))

    def rollout(self, start, steps=None, dt=None, mode="direct"):
        """Generate ``steps`` points starting from ``start``.

        ``mode="direct"`` evaluates ``Exp_base(psi(Log_base(goal)))`` along the
        base trajectory, which is the exact solution of the diffeomorphed
        dynamics given ``psi`` at the initial point. ``mode="velocity"``
        starts from ``b = 0`` and integrates ``db = J_psi(a) da`` with one
        Euler step per sample, where ``da`` is the change of the base
        coordinate between consecutive base points; it accumulates
        discretization error and is kept for comparison.
        """
        m = self.manifold
        steps = self.n_samples if steps is None else int(steps)
        dt = self.dt if dt is None else float(dt)
        base = self.base_system()
        a_pt = m.check_point(start)
        if mode == "direct":
            out = []
            for _ in range(steps):
                out.append(self._output(a_pt, self.goal))
                a_pt = base.step(a_pt, dt)
            return np.array(out)
        if mode != "velocity":
            raise ValueError(f"unknown rollout mode {mode!r}")
        a = m.vec(a_pt, m.log(a_pt, self.goal))
        b = m.vec(a_pt, m.zero_tangent(a_pt))
        out = []
        for _ in range(steps):
            out.append(m.exp(a_pt, m.unvec(a_pt, b)))
            nxt = base.step(a_pt, dt)
            a_next = m.vec(nxt, m.log(nxt, self.goal))
            b = b + self.diffeo.jacobian(a) @ (a_next - a)
            if not np.all(np.isfinite(b)):
                raise FloatingPointError("GMR Jacobian produced a non-finite output")
            a_pt, a = nxt, a_next
        return np.array(out)

    def rollout_with_goal_switch(self, start, steps, switch_at, new_goal, k_goal=None, dt=None):
        """Roll out and move the attractor to ``new_goal`` from step ``switch_at``.

        The goal follows the geodesic system ``dg/dt = k_goal Log_g(new_goal)``
        (``k_goal`` is normalized like the base gain; ``None`` switches
        instantly). The learned motion keeps running against the trained goal
        and every output sample is carried by the manifold isometry that
        takes the trained goal to the current one, so the attractor moves
        with the goal while psi is only queried where it was fitted.

        Start components are not re-anchored.
        """
        m = self.manifold
        dt = self.dt if dt is None else float(dt)
        new_goal = m.check_point(new_goal)
        a_pt = m.check_point(start)
        ds = self.base_system()
        goal = self.goal
        switcher = None
        out = []
        for step in range(int(steps)):
            if step == switch_at:
                if k_goal is None:
                    goal = new_goal
                else:
                    rate = gain_from_normalized(k_goal, self.n_samples, self.dt)
                    switcher = GoalSwitcher(goal, new_goal, rate, m)
            y = self._output(a_pt, self.goal)
            out.append(y if goal is self.goal else m.carry(self.goal, goal, y))
            a_pt = ds.step(a_pt, dt)
            if switcher is not None:
                goal = switcher.step(dt)
        return np.array(out)

    # -- serialization ----------------------------------------------------

    def to_dict(self):
        return {
            "manifold": self.manifold.name,
            "manifold_dim": self.manifold.dim,
            "goal": self.goal.tolist(),
            "k": self.k,
            "n_samples": self.n_samples,
            "dt": self.dt,
            "starts": np.asarray(self.starts).tolist(),
            "gmm": self.diffeo.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        m = get_manifold(data["manifold"], data["manifold_dim"])
        return cls(m, np.array(data["goal"], dtype=float), float(data["k"]),
                   int(data["n_samples"]), float(data["dt"]),
                   GmmDiffeomorphism.from_dict(data["gmm"]),
                   np.array(data["starts"], dtype=float))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def preprocess(demos):
    """Sign-align quaternion demos with the goal and remove hemisphere flips."""
    m = demos.manifold
    if not (isinstance(m, Sphere) and m.n == 3):
        return demos
    fixed = []
    for demo in demos.demos:
        q = enforce_quaternion_continuity(demo)
        if np.dot(q[-1], demos.goal) < 0:
            q = -q
        fixed.append(q)
    return DemonstrationSet(np.array(fixed), demos.dt, demos.goal, m)


def goal_tail_pairs(demos, base, steps=40, rate=0.5):
    """Identity pairs ``(a, a)`` from continuing each base trajectory past its end.

    Once a demonstration has reached the goal it stays there, so the demo
    tangent is ``Log_base(goal)`` and equals the base tangent. The base keeps
    converging with ``dt * gain = rate`` per step, so the tail covers
    ``|a|`` geometrically down to about ``(1 - rate)**steps`` of its last
    value and the fitted map is pinned to the identity close to zero
    instead of extrapolating there.
    """
    m = demos.manifold
    if steps <= 0:
        return np.empty((0, m.vector_dim))
    ds = GeodesicDS(demos.goal, rate / demos.dt, m)
    out = []
    for traj in base:
        p = traj[-1]
        for _ in range(steps):
            p = ds.step(p, demos.dt)
            out.append(m.vec(p, m.log(p, demos.goal)))
    return np.array(out)


def train(demos, n_components=10, k=DEFAULT_GAIN, seed=0, reg=COV_FLOOR,
          anchor_starts=False, tail_steps=40, tail_rate=0.5):
    """Fit a :class:`RiemannianDS` to a :class:`DemonstrationSet`.

    Parameters
    ----------
    demos : DemonstrationSet
    n_components : int
        Learned GMM components; the goal anchor and the background
        component come on top.
    k : float
        Normalized base gain, ``gain = k / (L dt)``.
    anchor_starts : bool
        Add a narrow component at ``(Log_start(goal), 0)`` per demonstration so
        rollouts leave exactly from the demonstrated starts. Off by default:
        these anchors share ``b = 0`` with the goal anchor and pull
        ``psi^-1(0)`` away from zero.
    tail_steps, tail_rate : int, float
        Goal tail, see :func:`goal_tail_pairs`.
    """
    demos = preprocess(demos)
    m = demos.manifold
    base = generate_base_trajectories(demos, k)
    a, b = build_tangent_pairs(demos, base).flat()
    tail = goal_tail_pairs(demos, base, tail_steps, tail_rate)
    a, b = np.vstack([a, tail]), np.vstack([b, tail])
    x = np.hstack([a, b])
    if np.all(np.ptp(x, axis=0) == 0):
        # nothing to learn: a single narrow component reproducing the constant pair
        n = a.shape[1]
        diffeo = GmmDiffeomorphism([1.0], [x[0]], [ANCHOR_COV * np.eye(2 * n)])
    else:
        diffeo = fit_em(a, b, n_components, seed=seed, reg=reg)
    diffeo = diffeo.augment_goal()
    radius = np.linalg.norm(x, axis=1).max()
    if radius > 0:
        diffeo = diffeo.augment_background(radius)
    if anchor_starts:
        for s in demos.starts:
            a0 = m.vec(s, m.log(s, demos.goal))
            if np.linalg.norm(a0) > 0:
                diffeo = diffeo.augment_start(a0, m.vec(s, m.zero_tangent(s)))
    # rollouts end about |psi(0)| (metric norm at the goal) away from the goal; a
    # narrow learned component can outweigh the goal anchor there
    drift = m.norm(demos.goal, m.unvec(demos.goal, diffeo.forward(np.zeros(a.shape[1]))))
    if drift > IDENTITY_TOL:
        warnings.warn(f"psi(0) has norm {drift:.2e}; rollouts stop short of the goal. "
                      "More components usually fix this.", RuntimeWarning, stacklevel=2)
    return RiemannianDS(m, demos.goal, float(k), demos.length, float(demos.dt), diffeo,
                        np.array(demos.starts))


# ---------------------------------------------------------------------------
# trajectory export


def point_coordinates(point):
    """Flat coordinates used in CSV files: the vector for spheres, Mandel for SPD."""
    point = np.asarray(point, dtype=float)
    if point.ndim == 2:
        return mandel_vectorize(point)
    return point


def coordinate_names(manifold):
    if isinstance(manifold, Sphere) and manifold.n == 3:
        return ["w", "x", "y", "z"]
    if isinstance(manifold, (Sphere, Euclidean)):
        return [f"c{i + 1}" for i in range(manifold.vector_dim)]
    return [f"m{i + 1}" for i in range(manifold.vector_dim)]


def export_trajectory_csv(path, trajectory, dt, goal, manifold=None):
    """Write one row per step: step, time, coordinates, distance to goal."""
    manifold = manifold or manifold_for(goal)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "t", *coordinate_names(manifold), "dist_to_goal"])
        for i, p in enumerate(trajectory):
            w.writerow([i, repr(i * dt), *[repr(float(c)) for c in point_coordinates(p)],
                        repr(manifold.dist(p, goal))])
