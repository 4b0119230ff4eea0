"""Exponential families through their Bregman divergences.

Two families are supported:

* spherical Gaussian with known variance ``sigma2``, divergence
  ``||x - mu||^2 / (2 sigma2)``, conjugate Gaussian prior on the mean with
  prior mean ``tau / eta`` and per-coordinate variance ``sigma2 / eta``;
* multinomial, divergence ``KL(x || mu)`` on simplex rows, conjugate
  ``Dirichlet(tau)`` prior on raw count rows.

The deterministic algorithms only need :func:`divergence` and
:func:`cluster_mean`; the Gibbs sampler needs the likelihood, marginal and
posterior helpers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .core import DataMatrix, Kind


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    MULTINOMIAL = "multinomial"


@dataclass(frozen=True)
class DivergenceModel:
    family: Family = Family.GAUSSIAN
    sigma2: float = 0.5
    laplace_alpha: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.GAUSSIAN and not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.laplace_alpha < 0:
            raise ValueError("laplace_alpha must be nonnegative")

    @classmethod
    def gaussian(cls, sigma2: float = 0.5) -> "DivergenceModel":
        return cls(Family.GAUSSIAN, sigma2=sigma2)

    @classmethod
    def multinomial(cls, laplace_alpha: float = 0.3) -> "DivergenceModel":
        return cls(Family.MULTINOMIAL, laplace_alpha=laplace_alpha)

    @property
    def is_gaussian(self) -> bool:
        return self.family is Family.GAUSSIAN


def default_sigma2(values: np.ndarray) -> float:
    """Mean per-coordinate variance of the data, divided by 10."""
    v = float(np.mean(np.var(np.asarray(values, dtype=float), axis=0)))
    return v / 10.0 if v > 0 else 1.0


@dataclass(frozen=True, eq=False)
class PriorParams:
    tau: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float).reshape(-1)
        if not np.all(np.isfinite(tau)):
            raise ValueError("tau must be finite")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        object.__setattr__(self, "tau", tau)


def default_prior(model: DivergenceModel, values: np.ndarray) -> PriorParams:
    """Weakly informative prior matched to the data scale.

    Gaussian: prior mean at the data mean, ``eta`` chosen so the prior
    variance of a cluster mean equals the average data variance.
    Multinomial: flat Dirichlet(1, ..., 1).
    """
    values = np.asarray(values, dtype=float)
    d = values.shape[1]
    if model.is_gaussian:
        var = float(np.mean(np.var(values, axis=0)))
        eta = model.sigma2 / var if var > 0 else 1.0
        return PriorParams(tau=eta * values.mean(axis=0), eta=eta)
    return PriorParams(tau=np.ones(d), eta=1.0)


def laplace_smooth(x, alpha: float) -> np.ndarray:
    """Additive smoothing of a count vector onto the simplex."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("counts must be nonnegative")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    total = x.sum(axis=-1, keepdims=True) + x.shape[-1] * alpha
    if np.any(total <= 0):
        raise ValueError("all-zero count vector cannot be normalised without smoothing")
    return (x + alpha) / total


def prepare(model: DivergenceModel, data: DataMatrix | np.ndarray) -> np.ndarray:
    """Representation the divergence operates on.

    Gaussian rows pass through. Multinomial count rows are Laplace smoothed;
    real-valued rows are taken to be proportions and renormalised.
    """
    if isinstance(data, DataMatrix):
        values, kind = data.values, data.kind
    else:
        values, kind = np.asarray(data, dtype=float), Kind.REAL
    if model.is_gaussian:
        return np.asarray(values, dtype=float)
    if kind is Kind.COUNTS:
        return laplace_smooth(values, model.laplace_alpha)
    return laplace_smooth(values, 0.0)


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def divergence(model: DivergenceModel, x, mu) -> float:
    """D(x, mu) for a single pair of points."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if x.shape != mu.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {mu.shape}")
    if model.is_gaussian:
        diff = x - mu
        return float(diff @ diff) / (2.0 * model.sigma2)
    if np.any(mu <= 0):
        raise ValueError("mu has a zero coordinate; smooth the data first")
    val = float(np.sum(_xlogx(x)) - x @ np.log(mu))
    return max(val, 0.0)


def divergences(model: DivergenceModel, x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """D(x, c) against every row of ``centers``."""
    if model.is_gaussian:
        diff = centers - x
        return np.einsum("kd,kd->k", diff, diff) / (2.0 * model.sigma2)
    if np.any(centers <= 0):
        raise ValueError("center has a zero coordinate; smooth the data first")
    return np.maximum(np.sum(_xlogx(x)) - np.log(centers) @ x, 0.0)


def divergence_matrix(model: DivergenceModel, X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """n x K matrix of D(x_i, c_k)."""
    X = np.asarray(X, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if model.is_gaussian:
        sq = (
            np.einsum("nd,nd->n", X, X)[:, None]
            - 2.0 * X @ centers.T
            + np.einsum("kd,kd->k", centers, centers)[None, :]
        )
        return np.maximum(sq, 0.0) / (2.0 * model.sigma2)
    if np.any(centers <= 0):
        raise ValueError("center has a zero coordinate; smooth the data first")
    ent = _xlogx(X).sum(axis=1)
    return np.maximum(ent[:, None] - X @ np.log(centers).T, 0.0)


def divergence_rows(model: DivergenceModel, X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Row-wise D(X[i], M[i]); ``M`` may be a single row broadcast to all."""
    X = np.asarray(X, dtype=float)
    M = np.broadcast_to(np.asarray(M, dtype=float), X.shape)
    if model.is_gaussian:
        diff = X - M
        return np.einsum("nd,nd->n", diff, diff) / (2.0 * model.sigma2)
    if np.any(M <= 0):
        raise ValueError("center has a zero coordinate; smooth the data first")
    return np.maximum(_xlogx(X).sum(axis=1) - np.einsum("nd,nd->n", X, np.log(M)), 0.0)


def cluster_mean(model: DivergenceModel, members) -> np.ndarray:
    """Arithmetic mean, the minimiser of total divergence for any family."""
    members = np.asarray(members, dtype=float)
    if members.ndim == 1:
        members = members[None, :]
    if members.shape[0] == 0:
        raise ValueError("cannot take the mean of an empty cluster")
    return members.mean(axis=0)


# Likelihood / marginal / posterior pieces used by the Gibbs sampler.

def _log_multinomial_coef(x: np.ndarray) -> np.ndarray:
    return gammaln(x.sum(axis=-1) + 1.0) - gammaln(x + 1.0).sum(axis=-1)


def _check_counts(x: np.ndarray):
    if np.any(x < 0) or np.any(np.abs(x - np.round(x)) > 1e-9):
        raise ValueError("multinomial marginal needs nonnegative integer counts")


def log_likelihood(model: DivergenceModel, x: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """log p(x | theta_k) for each row of ``thetas``.

    Gaussian ``theta`` is the mean vector; multinomial ``theta`` is a
    probability vector and ``x`` a raw count row.
    """
    x = np.asarray(x, dtype=float)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    d = x.shape[-1]
    if model.is_gaussian:
        diff = thetas - x
        sq = np.einsum("kd,kd->k", diff, diff)
        return -sq / (2.0 * model.sigma2) - 0.5 * d * math.log(2.0 * math.pi * model.sigma2)
    with np.errstate(divide="ignore"):
        logt = np.log(thetas)
    nz = x > 0
    return _log_multinomial_coef(x) + logt[:, nz] @ x[nz]


def log_marginal(model: DivergenceModel, prior: PriorParams, x) -> float:
    """log of the prior predictive density of a single observation."""
    return log_marginal_cluster(model, prior, np.asarray(x, dtype=float)[None, :])


def log_marginal_cluster(model: DivergenceModel, prior: PriorParams, X) -> float:
    """log of the joint prior predictive of a group of observations sharing one parameter."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    if prior.tau.size != d:
        raise ValueError(f"prior dimension {prior.tau.size} != data dimension {d}")
    if n == 0:
        return 0.0
    if model.is_gaussian:
        s2 = model.sigma2
        c = 1.0 / prior.eta
        y = X - prior.tau / prior.eta
        sum_sq = float(np.sum(y * y))
        col = y.sum(axis=0)
        quad = (sum_sq - c / (1.0 + n * c) * float(col @ col)) / s2
        logdet = d * (n * math.log(s2) + math.log1p(n * c))
        return -0.5 * (n * d * math.log(2.0 * math.pi) + logdet + quad)
    _check_counts(X)
    tau = prior.tau
    if np.any(tau <= 0):
        raise ValueError("Dirichlet parameters must be positive")
    post = tau + X.sum(axis=0)
    log_b = lambda a: float(gammaln(a).sum() - gammaln(a.sum()))  # noqa: E731
    return float(_log_multinomial_coef(X).sum()) + log_b(post) - log_b(tau)


def sample_posterior(model: DivergenceModel, prior: PriorParams, sum_x: np.ndarray, count: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Draw a cluster parameter from its conjugate posterior."""
    if model.is_gaussian:
        prec = prior.eta + count
        mean = (prior.tau + sum_x) / prec
        return mean + rng.standard_normal(mean.shape) * math.sqrt(model.sigma2 / prec)
    theta = rng.dirichlet(prior.tau + sum_x)
    # gamma underflow on tiny concentrations would give log(0) later
    theta = np.maximum(theta, 1e-300)
    return theta / theta.sum()
