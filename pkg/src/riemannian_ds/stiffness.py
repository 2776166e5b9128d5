"""Variable stiffness profiles from demonstration variability.

Low variance across demonstrations at a time step means the task is tight
there, so the stiffness is high. Each covariance ``Sigma = V diag(lam) V^T``
becomes ``K = V diag(1 / (lam + 1/k_max)) V^T``: zero variance gives
``k_max`` and larger variance gives a softer axis.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .learning import DemonstrationSet
from .manifolds import SPD, Sphere, symmetrize

PSD_TOL = 1e-10
RECOMMENDED_COMPONENTS = 15
LINEAR_MAX_GAIN = 1000.0   # N/m
ANGULAR_MAX_GAIN = 150.0   # Nm/rad


def _population_cov(x):
    """Per-step covariance of ``x`` with shape (D, L, n), divided by D."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 3:
        raise ValueError(f"expected (D, L, n) data, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ValueError("need at least two demonstrations to estimate a covariance")
    diff = x - x.mean(axis=0)
    return np.einsum("dli,dlj->lij", diff, diff) / x.shape[0]


def linear_covariance(positions):
    """Per-step population covariance of D aligned position demos, shape (L, 3, 3)."""
    return _population_cov(positions)


def tangent_basis(goal):
    """Orthonormal basis (rows) of the tangent space of the sphere at ``goal``.

    Gram-Schmidt on ``goal`` followed by the ambient axes, so the basis is a
    deterministic function of the goal.
    """
    goal = np.asarray(goal, dtype=float)
    vecs = [goal / np.linalg.norm(goal)]
    for e in np.eye(len(goal)):
        v = e - sum(np.dot(e, u) * u for u in vecs)
        n = np.linalg.norm(v)
        if n > 1e-6:
            vecs.append(v / n)
        if len(vecs) == len(goal):
            break
    return np.array(vecs[1:])


def angular_covariance(orientations, goal):
    """Per-step covariance of quaternion demos expressed in the tangent space at ``goal``.

    Returns an array of shape (L, 3, 3); the coordinates are taken in the
    basis from :func:`tangent_basis`.
    """
    q = np.asarray(orientations, dtype=float)
    goal = np.asarray(goal, dtype=float)
    s = Sphere(goal.shape[0] - 1)
    goal = s.check_point(goal)
    basis = tangent_basis(goal)
    coords = np.array([[basis @ s.log(goal, p) for p in demo] for demo in q])
    return _population_cov(coords)


@dataclass
class StiffnessProfile:
    """Sequence of SPD stiffness matrices with maximum gain ``max_gain``."""

    samples: np.ndarray
    max_gain: float
    units: str = "N/m"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.max_gain <= 0:
            raise ValueError("max_gain must be positive")

    def __len__(self):
        return len(self.samples)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.samples)

    def final_error(self):
        """Relative deviation of the last sample from ``max_gain * I``."""
        target = self.max_gain * np.eye(self.samples.shape[-1])
        return float(np.linalg.norm(self.samples[-1] - target) / np.linalg.norm(target))

    def to_csv(self, path, dt):
        """Write ``t,k11,k22,k33,k12,k13,k23`` rows plus a JSON sidecar."""
        d = self.samples.shape[-1]
        iu = np.triu_indices(d, 1)
        names = [f"k{i + 1}{i + 1}" for i in range(d)] + [f"k{i + 1}{j + 1}" for i, j in zip(*iu)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *names])
            for l, k in enumerate(self.samples):
                row = np.concatenate([np.diag(k), k[iu]])
                w.writerow([repr(l * dt), *[repr(float(v)) for v in row]])
        with open(_sidecar(path), "w") as fh:
            json.dump({"max_gain": self.max_gain, "units": self.units, "dt": dt}, fh)

    @classmethod
    def from_csv(cls, path):
        with open(_sidecar(path)) as fh:
            meta = json.load(fh)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = data.shape[1] - 1
        d = int(round((np.sqrt(8 * n + 1) - 1) / 2))
        iu = np.triu_indices(d, 1)
        samples = np.zeros((len(data), d, d))
        for l, row in enumerate(data[:, 1:]):
            samples[l][np.diag_indices(d)] = row[:d]
            samples[l][iu] = row[d:]
            samples[l][(iu[1], iu[0])] = row[d:]
        return cls(samples, meta["max_gain"], meta.get("units", ""))


def _sidecar(path):
    path = str(path)
    return (path[:-4] if path.endswith(".csv") else path) + ".json"


def stiffness_from_covariance(cov, max_gain, strict=False, floor=None, units="N/m"):
    """Map covariances to stiffness matrices with the same eigenvectors.

    Parameters
    ----------
    cov : array, shape (L, d, d)
        Symmetric PSD covariances.
    max_gain : float
        Stiffness reached at zero variance.
    strict : bool
        Use ``1 / (lam + max_gain)`` instead of ``1 / (lam + 1/max_gain)``.
        That variant does not reach ``max_gain`` at zero variance and is only
        kept for comparison.
    floor : float, optional
        Lower bound applied to every stiffness eigenvalue.
    """
    cov = np.asarray(cov, dtype=float)
    if max_gain <= 0:
        raise ValueError("max_gain must be positive")
    if cov.ndim == 2:
        cov = cov[None]
    out = np.empty_like(cov)
    offset = max_gain if strict else 1.0 / max_gain
    for l, c in enumerate(cov):
        lam, v = np.linalg.eigh(symmetrize(c))
        if lam[0] < -PSD_TOL:
            raise ValueError(f"covariance at step {l} has eigenvalue {lam[0]:.3e} < 0")
        k = 1.0 / (np.clip(lam, 0.0, None) + offset)
        if floor is not None:
            k = np.maximum(k, floor)
        out[l] = symmetrize((v * k) @ v.T)
    return StiffnessProfile(out, float(max_gain), units)


def build_stiffness_demos(profiles, dt):
    """Turn stiffness profiles into SPD demonstrations with goal ``max_gain * I``."""
    if not profiles:
        raise ValueError("need at least one profile")
    samples = np.array([p.samples for p in profiles])
    gains = {p.max_gain for p in profiles}
    if len(gains) != 1:
        raise ValueError("profiles have different maximum gains")
    d = samples.shape[-1]
    goal = gains.pop() * np.eye(d)
    scale = np.linalg.norm(goal)
    for i, p in enumerate(profiles):
        if np.linalg.norm(p.samples[-1] - goal) > 1e-6 * scale:
            raise ValueError(f"profile {i} does not end at max_gain * I")
    # snap the exact end value so the manifold goal check uses the shared goal
    samples[:, -1] = goal
    return DemonstrationSet(samples, dt, goal, SPD(d))
