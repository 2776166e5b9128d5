"""Geodesic base dynamics, manifold Euler integration and goal switching."""

from dataclasses import dataclass

import numpy as np

from .manifolds import manifold_for


def gain_from_normalized(k, n_samples, dt):
    """Convert the dimensionless gain ``k`` into a rate ``k / (L dt)`` in 1/s.

    The same ``k`` gives the same trajectory shape at any temporal
    resolution, e.g. ``(L=100, dt=0.01)`` and ``(L=1000, dt=0.001)``.
    """
    if k <= 0 or dt <= 0:
        raise ValueError("gain and sampling time must be positive")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    return k / (n_samples * dt)


def integrate_step(a, v, dt, manifold=None):
    """One Euler step on the manifold: ``Exp_a(dt * v)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    manifold = manifold or manifold_for(a)
    return manifold.exp(a, dt * np.asarray(v, dtype=float))


def _check_step(gain, dt):
    if dt * gain >= 1.0:
        raise ValueError(f"step too large: dt*gain = {dt * gain:.3f} must stay below 1")


@dataclass(frozen=True)
class GeodesicDS:
    """Base system ``da/dt = gain * Log_a(goal)``; exponentially stable at ``goal``."""

    goal: np.ndarray
    gain: float
    manifold: object = None

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if self.manifold is None:
            object.__setattr__(self, "manifold", manifold_for(self.goal))
        object.__setattr__(self, "goal", self.manifold.check_point(self.goal))

    def velocity(self, a):
        return self.gain * self.manifold.log(a, self.goal)

    def step(self, a, dt):
        _check_step(self.gain, dt)
        return integrate_step(a, self.velocity(a), dt, self.manifold)

    def trajectory(self, start, n_samples, dt):
        """``n_samples`` points starting at ``start`` (inclusive)."""
        out = [self.manifold.check_point(start)]
        for _ in range(n_samples - 1):
            out.append(self.step(out[-1], dt))
        return np.array(out)


class GoalSwitcher:
    """Moves the attractor smoothly with ``dg/dt = gain * Log_g(g_new)``.

    Holds mutable state; do not share one instance between rollouts.
    """

    def __init__(self, current_goal, target_goal, gain, manifold=None):
        if not gain > 0:
            raise ValueError("gain must be positive")
        self.manifold = manifold or manifold_for(current_goal)
        self.current_goal = self.manifold.check_point(current_goal)
        self.target_goal = self.manifold.check_point(target_goal)
        self.gain = gain

    def step(self, dt):
        _check_step(self.gain, dt)
        v = self.gain * self.manifold.log(self.current_goal, self.target_goal)
        self.current_goal = integrate_step(self.current_goal, v, dt, self.manifold)
        return self.current_goal


def goal_switch_step(switcher, dt):
    return switcher.step(dt)
