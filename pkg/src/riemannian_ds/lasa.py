"""Riemannian LASA benchmark: build UQ / SPD demonstrations from 2-D handwriting data.

Every class of the LASA handwriting set holds 7 demonstrations of 1000
planar samples ending at the origin. Stacking them gives a 14 x 1000 matrix
``C`` (x and y rows per demo); four 3-row slices of it become 3-D tangent
trajectories that are shot onto the unit quaternion sphere (tangent space at
the identity quaternion) or the SPD cone (tangent space at ``diag(100, 100)``).
"""

import csv
import glob
import importlib.util
import json
import os
from dataclasses import dataclass

import numpy as np

from .learning import DemonstrationSet, point_coordinates
from .manifolds import SPD, Sphere, mandel_unvectorize

UQ_GOAL = np.array([1.0, 0.0, 0.0, 0.0])
SPD_GOAL = np.diag([100.0, 100.0])
SLICES = ([0, 1, 2], [4, 5, 6], [8, 9, 10], [12, 13, 0])
N_DEMOS = 7
N_SAMPLES = 1000
MULTIMODAL_PREFIX = "Multi_Models"


@dataclass
class EuclideanMotionClass:
    """One LASA class: ``demos`` is (7, 1000, 2) positions sampled every ``dt``."""

    name: str
    demos: np.ndarray
    dt: float

    def __post_init__(self):
        self.demos = np.asarray(self.demos, dtype=float)
        if self.demos.ndim != 3 or self.demos.shape[2] != 2:
            raise ValueError(f"expected (D, L, 2) positions, got {self.demos.shape}")
        end = np.abs(self.demos[:, -1]).max()
        if end > 1e-3:
            raise ValueError(f"class {self.name}: demonstrations end {end:.3g} away from the origin")


@dataclass
class RiemannianMotionClass:
    name: str
    manifold: str          # "uq" or "spd"
    demos: DemonstrationSet
    scale: float = 1.0     # factor applied to the tangent data before projection

    @property
    def goal(self):
        return self.demos.goal


def assemble_3d_demos(cls):
    """Four (1000, 3) tangent trajectories cut from the 14 x 1000 stack."""
    demos = np.asarray(cls.demos if isinstance(cls, EuclideanMotionClass) else cls, dtype=float)
    if demos.shape[0] != N_DEMOS or demos.shape[2] != 2:
        raise ValueError(f"need {N_DEMOS} planar demonstrations, got shape {demos.shape}")
    # rows 2i, 2i+1 are x, y of demo i
    c = demos.transpose(0, 2, 1).reshape(2 * N_DEMOS, -1)
    return np.stack([c[rows].T for rows in SLICES])


def project_to_uq(demos3d, dt=1.0):
    """Scale into [-1, 1] with one factor per class and map through Exp at the identity."""
    demos3d = np.asarray(demos3d, dtype=float)
    peak = np.abs(demos3d).max()
    scale = 1.0 / peak if peak > 0 else 1.0
    v = demos3d * scale
    if np.linalg.norm(v, axis=-1).max() >= np.pi:
        raise ValueError("scaled tangent data leaves the injectivity radius")
    sphere = Sphere(3)
    out = np.empty(v.shape[:2] + (4,))
    for d in range(v.shape[0]):
        for l in range(v.shape[1]):
            out[d, l] = sphere.exp(UQ_GOAL, np.concatenate([[0.0], v[d, l]]))
    return DemonstrationSet(out, dt, UQ_GOAL, sphere), scale


def project_to_spd(demos3d, dt=1.0):
    """Read each 3-vector as a Mandel tangent at diag(100, 100) and map through Exp."""
    demos3d = np.asarray(demos3d, dtype=float)
    spd = SPD(2)
    out = np.empty(demos3d.shape[:2] + (2, 2))
    for d in range(demos3d.shape[0]):
        for l in range(demos3d.shape[1]):
            out[d, l] = spd.exp(SPD_GOAL, mandel_unvectorize(demos3d[d, l]))
    return DemonstrationSet(out, dt, SPD_GOAL, spd)


def make_riemannian_class(cls, manifold):
    demos3d = assemble_3d_demos(cls)
    if manifold == "uq":
        demos, scale = project_to_uq(demos3d, cls.dt)
        return RiemannianMotionClass(cls.name, "uq", demos, scale)
    if manifold == "spd":
        return RiemannianMotionClass(cls.name, "spd", project_to_spd(demos3d, cls.dt))
    raise ValueError(f"unknown manifold {manifold!r}")


def downsample(demos, target):
    """Keep ``target`` evenly spaced samples, endpoints included; dt grows by L/target."""
    n = demos.length
    if not 2 <= target <= n:
        raise ValueError(f"target must lie in [2, {n}], got {target}")
    if target == n:
        return demos
    idx = np.round(np.linspace(0, n - 1, target)).astype(int)
    return DemonstrationSet(demos.demos[:, idx], demos.dt * n / target, demos.goal, demos.manifold)


# ---------------------------------------------------------------------------
# I/O


def lasa_data_dir():
    """Directory with the LASA ``.mat`` files bundled by ``pyLasaDataset`` 0.1.x, or None."""
    found = importlib.util.find_spec("pyLasaDataset")
    if found is None or found.origin is None:
        return None
    path = os.path.join(os.path.dirname(found.origin), "resources", "LASAHandwritingDataset", "DataSet")
    return path if os.path.isdir(path) else None


def load_lasa_mat(path):
    from scipy.io import loadmat

    mat = loadmat(path)
    demos = [d[0][0]["pos"].T for d in mat["demos"][0]]
    name = os.path.splitext(os.path.basename(path))[0]
    return EuclideanMotionClass(name, np.stack(demos), float(mat["dt"][0][0]))


def save_euclidean_class(path, cls):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["demo", "t", "x", "y"])
        for d, demo in enumerate(cls.demos):
            for l, (x, y) in enumerate(demo):
                w.writerow([d, repr(l * cls.dt), repr(float(x)), repr(float(y))])


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got is None or [h.strip() for h in got[:len(header)]] != header:
            raise ValueError(f"{path}: malformed header {got!r}, expected to start with {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(got):
                raise ValueError(f"{path}: row {lineno} has {len(row)} fields, expected {len(got)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno} is not numeric") from exc
    return got, np.array(rows).reshape(-1, len(got))


def _split_demos(data, path):
    ids = data[:, 0].astype(int)
    uniq = np.unique(ids)
    lengths = {int((ids == i).sum()) for i in uniq}
    if len(lengths) != 1:
        raise ValueError(f"{path}: demonstrations have inconsistent lengths {sorted(lengths)}")
    return [data[ids == i] for i in uniq]


def load_euclidean_class(path):
    _, data = _read_rows(path, ["demo", "t", "x", "y"])
    demos = _split_demos(data, path)
    t = demos[0][:, 1]
    dt = float(t[1] - t[0]) if len(t) > 1 else 1.0
    name = os.path.splitext(os.path.basename(path))[0]
    return EuclideanMotionClass(name, np.stack([d[:, 2:4] for d in demos]), dt)


def _sidecar(path):
    return os.path.splitext(path)[0] + ".json"


def save_riemannian_class(path, cls):
    """CSV ``demo,t,c1..cK`` plus a JSON sidecar with manifold metadata."""
    demos = cls.demos
    k = 4 if cls.manifold == "uq" else 3
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["demo", "t", *[f"c{i + 1}" for i in range(k)]])
        for d, demo in enumerate(demos.demos):
            for l, p in enumerate(demo):
                w.writerow([d, repr(l * demos.dt), *[repr(float(c)) for c in point_coordinates(p)]])
    meta = {
        "name": cls.name,
        "manifold": cls.manifold,
        "goal": point_coordinates(demos.goal).tolist(),
        "dt": demos.dt,
        "n_demos": demos.n_demos,
        "length": demos.length,
        "scale": cls.scale,
    }
    with open(_sidecar(path), "w") as fh:
        json.dump(meta, fh, indent=2)


def load_riemannian_class(path):
    with open(_sidecar(path)) as fh:
        meta = json.load(fh)
    manifold = meta["manifold"]
    header, data = _read_rows(path, ["demo", "t"])
    k = 4 if manifold == "uq" else 3
    if len(header) != 2 + k:
        raise ValueError(f"{path}: expected {k} coordinate columns for {manifold}")
    demos = _split_demos(data, path)
    if len(demos) != meta["n_demos"] or len(demos[0]) != meta["length"]:
        raise ValueError(f"{path}: shape disagrees with metadata")
    coords = np.stack([d[:, 2:] for d in demos])
    if manifold == "uq":
        norms = np.linalg.norm(coords, axis=-1)
        bad = np.argwhere(np.abs(norms - 1.0) > 1e-6)
        if len(bad):
            d, l = bad[0]
            raise ValueError(f"{path}: demo {d} sample {l} has norm {norms[d, l]:.6f}")
        points, goal, m = coords, np.array(meta["goal"]), Sphere(3)
    else:
        points = np.array([[mandel_unvectorize(c) for c in demo] for demo in coords])
        eig = np.linalg.eigvalsh(points)[..., 0]
        bad = np.argwhere(eig <= 0)
        if len(bad):
            d, l = bad[0]
            raise ValueError(f"{path}: demo {d} sample {l} is not positive definite")
        goal, m = mandel_unvectorize(meta["goal"]), SPD(2)
    demos = DemonstrationSet(points, float(meta["dt"]), goal, m)
    return RiemannianMotionClass(meta.get("name", os.path.splitext(os.path.basename(path))[0]),
                                 manifold, demos, float(meta.get("scale", 1.0)))


def iter_euclidean_classes(directory):
    """Yield every class in ``directory`` from ``*.csv`` or LASA ``*.mat`` files."""
    paths = sorted(glob.glob(os.path.join(directory, "*.csv")) + glob.glob(os.path.join(directory, "*.mat")))
    if not paths:
        raise FileNotFoundError(f"no .csv or .mat classes in {directory}")
    for p in paths:
        yield load_lasa_mat(p) if p.endswith(".mat") else load_euclidean_class(p)


def generate_dataset(input_dir, manifold, out_dir):
    """Convert every Euclidean class in ``input_dir``; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for cls in iter_euclidean_classes(input_dir):
        path = os.path.join(out_dir, f"{cls.name}_{manifold}.csv")
        save_riemannian_class(path, make_riemannian_class(cls, manifold))
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# synthetic data for when the handwriting set is not installed


def synthetic_tangent_demos(n_demos=4, n_samples=1000, radius=1.0, seed=0):
    """Sinusoidal 3-D curves that converge to the origin, shape (D, L, 3)."""
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, 1.0, n_samples)
    decay = (1.0 - s) ** 2
    out = []
    for d in range(n_demos):
        phase = rng.uniform(-0.3, 0.3, size=3)
        amp = 1.0 + rng.uniform(-0.1, 0.1, size=3)
        curve = np.stack([
            -amp[0] * (1.0 - s),
            amp[1] * 0.5 * np.sin(2.0 * np.pi * s + phase[1]) * decay + 0.3 * phase[0] * decay,
            amp[2] * 0.4 * np.cos(np.pi * s + phase[2]) * decay,
        ], axis=1)
        out.append(curve)
    out = np.array(out)
    out -= out[:, -1:]
    return radius * out / np.abs(out).max()


def synthetic_class(manifold, n_samples=1000, dt=0.01, seed=0):
    """A 4-demo class built from :func:`synthetic_tangent_demos`."""
    demos3d = synthetic_tangent_demos(n_samples=n_samples, seed=seed)
    if manifold == "uq":
        demos, scale = project_to_uq(demos3d, dt)
        return RiemannianMotionClass("synthetic", "uq", demos, scale)
    # SPD benchmark scale: tangent entries of a few tens around diag(100, 100)
    return RiemannianMotionClass("synthetic", "spd", project_to_spd(40.0 * demos3d, dt), 40.0)


def n_shape_on_s2(n_samples=100, dt=0.01):
    """An "N"-shaped path on S^2 running from the northern to the southern hemisphere.

    Built in spherical coordinates from three strokes that each cross the
    equator: down to the southern hemisphere, back up along a diagonal and
    down again to end near the south pole. Returns a one-demo
    :class:`DemonstrationSet`.
    """
    s = np.linspace(0.0, 1.0, n_samples)
    # polar angle from the north pole, azimuth; the three strokes of an "N"
    knots_s = np.array([0.0, 1 / 3, 2 / 3, 1.0])
    polar = np.interp(s, knots_s, [0.3, 2.8, 1.0, 3.0])
    azim = np.interp(s, knots_s, [-0.9, -0.9, 0.9, 0.9])
    pts = np.stack([np.sin(polar) * np.cos(azim), np.sin(polar) * np.sin(azim), np.cos(polar)], axis=1)
    return DemonstrationSet(pts[None], dt, pts[-1], Sphere(2))


def list_classes(directory, manifold=None, include_multimodal=False):
    paths = sorted(glob.glob(os.path.join(directory, "*.csv")))
    out = []
    for p in paths:
        if not os.path.exists(_sidecar(p)):
            continue
        with open(_sidecar(p)) as fh:
            meta = json.load(fh)
        if manifold and meta["manifold"] != manifold:
            continue
        if not include_multimodal and meta.get("name", "").startswith(MULTIMODAL_PREFIX):
            continue
        out.append(p)
    return out
