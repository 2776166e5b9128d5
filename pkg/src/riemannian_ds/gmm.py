"""Joint GMM over tangent-space pairs and the GMR diffeomorphism built on it.

A :class:`GmmDiffeomorphism` models the joint density of stacked ``(a, b)``
vectors. Conditioning on ``a`` gives the forward map ``psi(a) = E[b | a]``,
conditioning on ``b`` gives the approximate inverse ``E[a | b]``.
"""

import json
import warnings
from functools import cached_property

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.special import logsumexp

COV_FLOOR = 1e-8
ANCHOR_PRIOR = 0.01
ANCHOR_COV = 1e-5
BACKGROUND_PRIOR = 1e-3
_LOG_2PI = np.log(2.0 * np.pi)


def _log_gauss(x, mean, chol):
    """Log density of rows of ``x`` under N(mean, L L^T)."""
    diff = np.atleast_2d(x) - mean
    z = np.linalg.solve(chol, diff.T)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (mean.shape[0] * _LOG_2PI + logdet + np.sum(z * z, axis=0))


class _Block:
    """Cached conditioning terms for one direction (input block -> output block)."""

    def __init__(self, priors, means, covs, inp, out):
        self.log_priors = np.log(priors)
        self.mu_in = means[:, inp]
        self.mu_out = means[:, out]
        s_in = covs[:, inp][:, :, inp]
        s_out_in = covs[:, out][:, :, inp]
        self.chol = np.linalg.cholesky(s_in)
        self.prec = np.linalg.inv(s_in)
        self.prec = 0.5 * (self.prec + np.transpose(self.prec, (0, 2, 1)))
        # regression matrices Sigma_oi Sigma_ii^-1, shape (K, n_out, n_in)
        self.gain = np.einsum("kij,kjl->kil", s_out_in, self.prec)

    def log_weighted(self, x):
        x = np.atleast_2d(x)
        cols = [lp + _log_gauss(x, m, c)
                for lp, m, c in zip(self.log_priors, self.mu_in, self.chol)]
        return np.stack(cols, axis=1)

    def responsibilities(self, x):
        """Posterior component weights, shape (N, K); log-sum-exp normalized."""
        x = np.atleast_2d(x)
        lw = self.log_weighted(x)
        bad = ~np.all(np.isfinite(lw), axis=1)
        if np.any(bad):
            # fall back to the Mahalanobis-nearest component
            diff = x[bad][:, None, :] - self.mu_in[None]
            maha = np.einsum("nki,kij,nkj->nk", diff, self.prec, diff)
            lw[bad] = np.where(np.arange(lw.shape[1]) == np.argmin(maha, axis=1)[:, None],
                               0.0, -np.inf)
        return np.exp(lw - logsumexp(lw, axis=1, keepdims=True))

    def local_means(self, x):
        """Per-component conditional means, shape (N, K, n_out)."""
        diff = np.atleast_2d(x)[:, None, :] - self.mu_in[None]
        return self.mu_out[None] + np.einsum("koi,nki->nko", self.gain, diff)

    def predict(self, x):
        h = self.responsibilities(x)
        return np.einsum("nk,nko->no", h, self.local_means(x))

    def jacobian(self, x):
        x = np.atleast_2d(x)
        h = self.responsibilities(x)
        local = self.local_means(x)
        diff = x[:, None, :] - self.mu_in[None]
        pd = np.einsum("kij,nkj->nki", self.prec, diff)  # Sigma^-1 (x - mu), (N, K, n)
        mix = np.einsum("nk,nki->ni", h, pd)
        dh = h[:, :, None] * (mix[:, None, :] - pd)        # dh_k/dx, (N, K, n)
        return (np.einsum("nk,koi->noi", h, self.gain)
                + np.einsum("nko,nki->noi", local, dh))


class GmmDiffeomorphism:
    """Gaussian mixture over ``(a, b)`` with GMR in both directions.

    Parameters
    ----------
    priors : array, shape (K,)
    means : array, shape (K, 2n)
    covariances : array, shape (K, 2n, 2n)
    n_learned : int, optional
        Number of leading components obtained from EM. Anchor components
        added later sit after them and never have their priors rescaled.
    """

    def __init__(self, priors, means, covariances, n_learned=None):
        self.priors = np.array(priors, dtype=float)
        self.means = np.array(means, dtype=float)
        self.covariances = np.array(covariances, dtype=float)
        self.n_learned = len(self.priors) if n_learned is None else int(n_learned)
        k, d = self.means.shape
        if d % 2 or self.covariances.shape != (k, d, d) or self.priors.shape != (k,):
            raise ValueError("inconsistent GMM parameter shapes")
        if np.any(self.priors <= 0) or abs(self.priors.sum() - 1.0) > 1e-10:
            raise ValueError("priors must be positive and sum to one")
        self.dim = d // 2
        self.fit_history = []

    def __repr__(self):
        return (f"GmmDiffeomorphism(dim={self.dim}, components={len(self.priors)}, "
                f"learned={self.n_learned})")

    @property
    def n_components(self):
        return len(self.priors)

    @cached_property
    def _fwd(self):
        n = self.dim
        return _Block(self.priors, self.means, self.covariances, slice(0, n), slice(n, 2 * n))

    @cached_property
    def _inv(self):
        n = self.dim
        return _Block(self.priors, self.means, self.covariances, slice(n, 2 * n), slice(0, n))

    @staticmethod
    def _shape_out(x, y):
        return y[0] if np.ndim(x) == 1 else y

    def forward(self, a):
        """psi(a) = E[b | a]."""
        return self._shape_out(a, self._fwd.predict(a))

    def inverse(self, b):
        """psi^-1(b) = E[a | b]."""
        return self._shape_out(b, self._inv.predict(b))

    def jacobian(self, a):
        """Jacobian of :meth:`forward`, ``J[i, j] = d psi_i / d a_j``."""
        return self._shape_out(a, self._fwd.jacobian(a))

    def responsibilities(self, a):
        return self._shape_out(a, self._fwd.responsibilities(a))

    def inverse_responsibilities(self, b):
        return self._shape_out(b, self._inv.responsibilities(b))

    # -- augmentation -----------------------------------------------------

    def _with_component(self, prior, mean, cov):
        priors = self.priors.copy()
        k = self.n_learned
        learned = priors[:k] - prior / k
        if np.any(learned <= 0):
            warnings.warn("subtractive prior rescaling would make a prior non-positive; "
                          "scaling learned priors proportionally instead", RuntimeWarning)
            learned = priors[:k] * (1.0 - prior / priors[:k].sum())
        priors[:k] = learned
        return GmmDiffeomorphism(
            np.append(priors, prior),
            np.vstack([self.means, mean]),
            np.concatenate([self.covariances, cov[None]]),
            n_learned=k,
        )

    def augment_goal(self, prior=ANCHOR_PRIOR, cov_scale=ANCHOR_COV):
        """Add a narrow component at the origin so psi and its inverse fix 0."""
        d = 2 * self.dim
        return self._with_component(prior, np.zeros(d), cov_scale * np.eye(d))

    def augment_start(self, a0, b0=None, prior=ANCHOR_PRIOR, cov_scale=ANCHOR_COV):
        """Add a narrow component at ``(a0, b0)`` pinning psi(a0) to b0.

        ``b0`` defaults to zero: a rollout starts at the demonstrated point,
        whose tangent coordinate at the start is zero.
        """
        d = 2 * self.dim
        a0 = np.asarray(a0, dtype=float)
        b0 = np.zeros(self.dim) if b0 is None else np.asarray(b0, dtype=float)
        return self._with_component(prior, np.concatenate([a0, b0]), cov_scale * np.eye(d))

    def augment_background(self, radius, prior=BACKGROUND_PRIOR):
        """Add a broad zero-mean component with no a-b coupling.

        Far from the data it outweighs the narrow learned components, so
        psi decays to zero (follow the base system) instead of extrapolating
        their regression slopes. On the data its weight is negligible.
        """
        d = 2 * self.dim
        return self._with_component(prior, np.zeros(d), float(radius) ** 2 * np.eye(d))

    # -- serialization ----------------------------------------------------

    def to_dict(self):
        return {
            "dim": self.dim,
            "n_learned": self.n_learned,
            "components": [
                {"prior": float(p), "mean": m.tolist(), "covariance": c.ravel().tolist()}
                for p, m, c in zip(self.priors, self.means, self.covariances)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        d = 2 * int(data["dim"])
        comps = data["components"]
        return cls(
            [c["prior"] for c in comps],
            [c["mean"] for c in comps],
            [np.reshape(c["covariance"], (d, d)) for c in comps],
            n_learned=data.get("n_learned"),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def augment_goal_component(g, prior=ANCHOR_PRIOR, cov_scale=ANCHOR_COV):
    return g.augment_goal(prior, cov_scale)


def augment_start_component(g, a0, b0=None, prior=ANCHOR_PRIOR, cov_scale=ANCHOR_COV):
    return g.augment_start(a0, b0, prior, cov_scale)


def gmr_forward(g, a):
    return g.forward(a)


def gmr_inverse(g, b):
    return g.inverse(b)


def gmr_jacobian(g, a):
    return g.jacobian(a)


# ---------------------------------------------------------------------------
# EM


def _m_step(x, resp, reg):
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    means = (resp.T @ x) / nk[:, None]
    covs = np.empty((len(nk), x.shape[1], x.shape[1]))
    for k in range(len(nk)):
        diff = x - means[k]
        covs[k] = (resp[:, k, None] * diff).T @ diff / nk[k]
        covs[k] = 0.5 * (covs[k] + covs[k].T) + reg * np.eye(x.shape[1])
    return nk / nk.sum(), means, covs


def _e_step(x, priors, means, covs):
    chols = np.linalg.cholesky(covs)
    lw = np.stack([np.log(p) + _log_gauss(x, m, c)
                   for p, m, c in zip(priors, means, chols)], axis=1)
    ll = logsumexp(lw, axis=1)
    return np.exp(lw - ll[:, None]), float(ll.sum())


def fit_em(a, b, n_components, seed=0, reg=COV_FLOOR, tol=1e-6, max_iter=300):
    """Fit a joint GMM on stacked ``[a, b]`` rows by EM.

    Initialization uses k-means++ seeding followed by Lloyd iterations, so the
    result is deterministic for a given ``seed``. ``reg`` is added to every
    covariance diagonal at each M-step. Iteration stops when the relative
    change in log-likelihood drops below ``tol`` or after ``max_iter`` steps.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError("input and output blocks must have the same shape")
    x = np.hstack([a, b])
    n, d = x.shape
    if n_components < 1:
        raise ValueError("need at least one component")
    if n < n_components * (d + 1):
        raise ValueError(f"{n} pairs are too few for {n_components} components in {d} dims")
    if np.all(np.ptp(x, axis=0) == 0):
        raise ValueError("all training pairs are identical")

    if n_components == 1:
        labels = np.zeros(n, dtype=int)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, labels = kmeans2(x, n_components, iter=20, minit="++", seed=seed)
    resp = np.zeros((n, n_components))
    resp[np.arange(n), labels] = 1.0
    # empty clusters get a uniform sliver so the M-step stays defined
    empty = resp.sum(axis=0) == 0
    if np.any(empty):
        resp[:, empty] = 1.0 / n
        resp /= resp.sum(axis=1, keepdims=True)
    priors, means, covs = _m_step(x, resp, reg)

    history = []
    for _ in range(max_iter):
        resp, ll = _e_step(x, priors, means, covs)
        history.append(ll)
        if len(history) > 1 and abs(ll - history[-2]) <= tol * abs(history[-2]):
            break
        priors, means, covs = _m_step(x, resp, reg)

    model = GmmDiffeomorphism(priors / priors.sum(), means, covs)
    model.fit_history = history
    return model
