"""Riemannian primitives for the unit sphere and the SPD cone.

Points and tangent vectors are plain numpy arrays. Sphere points are unit
vectors of shape ``(n + 1,)`` and their tangent vectors live in the same
ambient coordinates (orthogonal to the base point). SPD points are symmetric
positive definite ``(d, d)`` matrices and their tangent vectors are symmetric
``(d, d)`` matrices.

The module-level functions (:func:`exp_map`, :func:`log_map`, ...) dispatch on
the array rank: 1-D arrays are sphere points, 2-D arrays are SPD matrices.
"""

import numpy as np

SYM_TOL = 1e-10
UNIT_TOL = 1e-12
ZERO_DIST = 1e-10
ANTIPODAL_TOL = 1e-10
MIN_EIG = 1e-12


class DomainError(ValueError):
    """Input lies outside the domain where an operator is defined."""


class SingularityError(DomainError):
    """Log map or transport requested between antipodal sphere points."""


# ---------------------------------------------------------------------------
# symmetric matrix helpers


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def _check_symmetric(m, tol=SYM_TOL):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T)) > tol * max(1.0, np.max(np.abs(m))):
        raise DomainError("matrix is not symmetric")
    return symmetrize(m)


def _eig_apply(m, fn):
    w, v = np.linalg.eigh(m)
    return (v * fn(w)) @ v.T


def sym_expm(m):
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    return symmetrize(_eig_apply(_check_symmetric(m), np.exp))


def sym_logm(m):
    """Matrix logarithm of an SPD matrix via eigendecomposition.

    Raises
    ------
    DomainError
        If an eigenvalue is not larger than 1e-12.
    """
    m = _check_symmetric(m)
    w, v = np.linalg.eigh(m)
    if w[0] <= MIN_EIG:
        raise DomainError(f"logm needs positive eigenvalues, smallest is {w[0]:.3e}")
    return symmetrize((v * np.log(w)) @ v.T)


def sym_sqrtm(m):
    return symmetrize(_eig_apply(m, np.sqrt))


def sym_invsqrtm(m):
    return symmetrize(_eig_apply(m, lambda w: 1.0 / np.sqrt(w)))


def _sqrt_pair(m):
    w, v = np.linalg.eigh(m)
    s = np.sqrt(w)
    return symmetrize((v * s) @ v.T), symmetrize((v / s) @ v.T)


def mandel_vectorize(m):
    """Mandel vector of a symmetric matrix.

    Diagonal entries come first, followed by the upper off-diagonal entries
    in row order scaled by sqrt(2); for 2x2 this is ``(m11, m22, sqrt2*m12)``.
    """
    m = _check_symmetric(m)
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    return np.concatenate([np.diag(m), np.sqrt(2.0) * m[iu]])


def mandel_unvectorize(v):
    v = np.asarray(v, dtype=float)
    d = mandel_dim_to_size(v.shape[-1])
    m = np.diag(v[:d])
    iu = np.triu_indices(d, 1)
    off = v[d:] / np.sqrt(2.0)
    m[iu] = off
    m[(iu[1], iu[0])] = off
    return m


def mandel_dim_to_size(p):
    d = int(round((np.sqrt(8 * p + 1) - 1) / 2))
    if d * (d + 1) // 2 != p:
        raise DomainError(f"{p} is not a valid Mandel vector length")
    return d


# ---------------------------------------------------------------------------
# manifolds


class Sphere:
    """Unit sphere S^n embedded in R^(n+1); n=3 gives unit quaternions."""

    name = "sphere"

    def __init__(self, n=3):
        self.n = self.dim = n
        self.ambient_dim = n + 1

    def __repr__(self):
        return f"Sphere(n={self.n})"

    @property
    def vector_dim(self):
        return self.ambient_dim

    def check_point(self, p, tol=1e-6):
        """Validate a point; renormalizes deviations below ``tol``."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.ambient_dim,):
            raise DomainError(f"expected shape ({self.ambient_dim},), got {p.shape}")
        nrm = np.linalg.norm(p)
        if not np.isfinite(nrm) or abs(nrm - 1.0) > tol:
            raise DomainError(f"sphere point has norm {nrm}")
        return p / nrm

    def proj_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        return v - np.dot(base, v) * base

    def check_tangent(self, base, v, tol=1e-8):
        v = np.asarray(v, dtype=float)
        if abs(np.dot(base, v)) > tol * (1.0 + np.linalg.norm(v)):
            raise DomainError("vector is not tangent to the sphere at the base point")
        return self.proj_tangent(base, v)

    def norm(self, base, v):
        return float(np.linalg.norm(v))

    def exp(self, base, v):
        v = self.check_tangent(base, v)
        nv = np.linalg.norm(v)
        if nv >= np.pi:
            raise DomainError(f"tangent norm {nv:.6f} outside the injectivity radius pi")
        if nv < 1e-16:
            return np.array(base, dtype=float)
        p = base * np.cos(nv) + v * (np.sin(nv) / nv)
        return p / np.linalg.norm(p)

    def log(self, base, target):
        dot = float(np.dot(base, target))
        if abs(dot + 1.0) < ANTIPODAL_TOL:
            raise SingularityError("log map undefined at the antipodal point")
        u = target - dot * base
        nu = np.linalg.norm(u)
        d = np.arctan2(nu, dot)
        if d < ZERO_DIST:
            return np.zeros_like(base, dtype=float)
        return u * (d / nu)

    def dist(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        dot = float(np.dot(a, b))
        nu = np.linalg.norm(b - dot * a)
        return float(np.arctan2(nu, dot))

    def transport(self, start, end, v):
        v = np.asarray(v, dtype=float)
        d = self.dist(start, end)
        if d < ZERO_DIST:
            return self.proj_tangent(end, v)
        u = self.log(start, end)
        w = self.log(end, start)
        out = v - (np.dot(u, v) / d**2) * (u + w)
        return self.proj_tangent(end, out)

    def carry(self, start, end, p):
        """Apply the rotation that moves ``start`` to ``end`` along their geodesic to ``p``.

        On tangent vectors at ``start`` this agrees with :meth:`transport`.
        """
        x, y, p = (np.asarray(z, dtype=float) for z in (start, end, p))
        c = 1.0 + np.dot(x, y)
        if c < 1e-12:
            raise SingularityError("antipodal points have no unique connecting rotation")
        out = p - (np.dot(x + y, p) / c) * (x + y) + 2.0 * np.dot(x, p) * y
        return out / np.linalg.norm(out)

    def vec(self, base, v):
        return np.asarray(v, dtype=float)

    def unvec(self, base, x):
        return self.proj_tangent(base, np.asarray(x, dtype=float))

    def zero_tangent(self, base):
        return np.zeros(self.ambient_dim)


class SPD:
    """Cone of d x d symmetric positive definite matrices, affine-invariant metric."""

    name = "spd"

    def __init__(self, d=2):
        self.d = self.dim = d

    def __repr__(self):
        return f"SPD(d={self.d})"

    @property
    def vector_dim(self):
        return self.d * (self.d + 1) // 2

    def check_point(self, p, tol=SYM_TOL):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.d, self.d):
            raise DomainError(f"expected shape ({self.d}, {self.d}), got {p.shape}")
        p = _check_symmetric(p, tol)
        if np.linalg.eigvalsh(p)[0] <= 0:
            raise DomainError("matrix is not positive definite")
        return p

    def proj_tangent(self, base, v):
        return symmetrize(v)

    def check_tangent(self, base, v, tol=SYM_TOL):
        return _check_symmetric(v, tol)

    def norm(self, base, v):
        isq = sym_invsqrtm(base)
        return float(np.linalg.norm(isq @ v @ isq, "fro"))

    def exp(self, base, v):
        v = self.check_tangent(base, v)
        sq, isq = _sqrt_pair(base)
        return symmetrize(sq @ sym_expm(symmetrize(isq @ v @ isq)) @ sq)

    def log(self, base, target):
        sq, isq = _sqrt_pair(base)
        return symmetrize(sq @ sym_logm(symmetrize(isq @ target @ isq)) @ sq)

    def dist(self, a, b):
        isq = sym_invsqrtm(a)
        w = np.linalg.eigvalsh(symmetrize(isq @ b @ isq))
        return float(np.sqrt(np.sum(np.log(w) ** 2)))

    def transport(self, start, end, v):
        # E v E^T with E = (end start^-1)^(1/2), the Levi-Civita transport
        # along the connecting geodesic.
        sq, isq = _sqrt_pair(start)
        e = sq @ sym_sqrtm(symmetrize(isq @ end @ isq)) @ isq
        return symmetrize(e @ v @ e.T)

    def carry(self, start, end, p):
        """Congruence ``E p E^T`` that maps ``start`` to ``end``; an isometry of the cone."""
        sq, isq = _sqrt_pair(start)
        e = sq @ sym_sqrtm(symmetrize(isq @ end @ isq)) @ isq
        return symmetrize(e @ np.asarray(p, dtype=float) @ e.T)

    def vec(self, base, v):
        return mandel_vectorize(v)

    def unvec(self, base, x):
        return mandel_unvectorize(x)

    def zero_tangent(self, base):
        return np.zeros((self.d, self.d))


class Euclidean:
    """Flat R^n with identity exp/log; used for the Euclidean baselines."""

    name = "euclidean"

    def __init__(self, n):
        self.n = self.dim = n

    def __repr__(self):
        return f"Euclidean(n={self.n})"

    @property
    def vector_dim(self):
        return self.n

    def check_point(self, p, tol=None):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise DomainError(f"expected shape ({self.n},), got {p.shape}")
        return p

    def proj_tangent(self, base, v):
        return np.asarray(v, dtype=float)

    check_tangent = proj_tangent

    def norm(self, base, v):
        return float(np.linalg.norm(v))

    def exp(self, base, v):
        return np.asarray(base, dtype=float) + v

    def log(self, base, target):
        return np.asarray(target, dtype=float) - base

    def dist(self, a, b):
        return float(np.linalg.norm(np.asarray(b, dtype=float) - a))

    def transport(self, start, end, v):
        return np.asarray(v, dtype=float)

    def carry(self, start, end, p):
        return np.asarray(p, dtype=float) + (np.asarray(end, dtype=float) - start)

    def vec(self, base, v):
        return np.asarray(v, dtype=float)

    def unvec(self, base, x):
        return np.asarray(x, dtype=float)

    def zero_tangent(self, base):
        return np.zeros(self.n)


def manifold_for(point):
    """Pick the manifold matching the shape of ``point``."""
    point = np.asarray(point)
    if point.ndim == 1:
        return Sphere(point.shape[0] - 1)
    if point.ndim == 2 and point.shape[0] == point.shape[1]:
        return SPD(point.shape[0])
    raise DomainError(f"no manifold for points of shape {point.shape}")


def get_manifold(name, dim):
    """Build a manifold from its tag; ``dim`` is n for spheres and d for SPD."""
    name = name.lower()
    if name in ("sphere", "uq", "s3", "s2"):
        return Sphere(dim)
    if name == "spd":
        return SPD(dim)
    if name == "euclidean":
        return Euclidean(dim)
    raise ValueError(f"unknown manifold {name!r}")


def exp_map(base, v):
    return manifold_for(base).exp(np.asarray(base, dtype=float), v)


def log_map(base, target):
    return manifold_for(base).log(np.asarray(base, dtype=float), np.asarray(target, dtype=float))


def parallel_transport(start, end, v):
    return manifold_for(start).transport(
        np.asarray(start, dtype=float), np.asarray(end, dtype=float), v)


def distance(a, b):
    return manifold_for(a).dist(a, b)


def metric_norm(base, v):
    return manifold_for(base).norm(np.asarray(base, dtype=float), v)
