"""Multivariate Gaussian mixture fitted by Expectation-Maximization.

Data points are the 3-dimensional variance feature rows. All density work is
done in log space: per-component log densities come from a Cholesky
factorization of the covariance, and posteriors/log-likelihoods use
log-sum-exp, so the tiny densities typical of variance features never
underflow.

The E-step computes responsibilities

    r_nk = pi_k N(x_n | mu_k, Sigma_k) / sum_j pi_j N(x_n | mu_j, Sigma_j)

and the M-step re-estimates, with N_k = sum_n r_nk,

    mu_k    = sum_n r_nk x_n / N_k
    Sigma_k = sum_n r_nk (x_n - mu_k)(x_n - mu_k)^T / N_k + reg_eps * I
    pi_k    = N_k / N

which are the stationarity conditions of the log-likelihood
L = sum_n log sum_k pi_k N(x_n | mu_k, Sigma_k).
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DataError, NumericalError

_LOG_2PI = np.log(2.0 * np.pi)

# A component whose responsibility mass falls below this is treated as empty
# and reseeded.
EMPTY_COMPONENT_MASS = 1e-10
_MAX_RESEEDS = 3


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component: mean, covariance, and its cached factorization."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)
    log_det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64)
        cov = np.array(self.cov, dtype=np.float64)
        d = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (d, d):
            raise DataError(f"mean/covariance shapes do not match: {mean.shape} vs {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DataError("non-finite component parameters")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise NumericalError("covariance is not symmetric within 1e-12")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"covariance is not positive-definite: {exc}") from exc
        mean.setflags(write=False)
        cov.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "log_det", 2.0 * float(np.sum(np.log(np.diag(chol)))))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class MixtureParams:
    """K Gaussian components plus their mixing weights (weights sum to 1)."""

    components: tuple[GaussianComponent, ...]
    weights: np.ndarray

    def __post_init__(self):
        components = tuple(self.components)
        weights = np.array(self.weights, dtype=np.float64)
        if len(components) < 1:
            raise DataError("a mixture needs at least one component")
        if weights.shape != (len(components),):
            raise DataError("one weight per component required")
        if np.any(weights < 0) or np.any(weights > 1):
            raise DataError("mixing weights must lie in [0, 1]")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise DataError(f"mixing weights sum to {weights.sum()!r}, expected 1")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise DataError("components disagree on dimension")
        weights.setflags(write=False)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim


@dataclass(frozen=True)
class EmConfig:
    """Fit configuration. `tol` is the absolute log-likelihood change that counts
    as converged; `reg_eps` is the ridge added to every covariance diagonal."""

    k: int
    max_iters: int = 500
    tol: float = 1e-6
    reg_eps: float = 1e-6
    seed: int = 0
    covariance_mode: str = "full"

    def __post_init__(self):
        if self.k < 1:
            raise DataError("k must be at least 1")
        if self.max_iters < 1:
            raise DataError("max_iters must be at least 1")
        if not self.tol > 0:
            raise DataError("tol must be positive")
        if self.reg_eps < 0:
            raise DataError("reg_eps must be non-negative")
        if self.covariance_mode not in ("full", "diag"):
            raise DataError(f"unknown covariance_mode {self.covariance_mode!r}")


@dataclass
class EmTrace:
    """Per-iteration log-likelihoods plus convergence bookkeeping.

    `log_likelihoods[0]` is the likelihood of the initial parameters and each
    later entry follows one E/M update, so the sequence is non-decreasing (up
    to 1e-9 slack) unless a reseed event intervenes. `reseeds` records
    (iteration, component) pairs where an empty component was reinitialized.
    """

    log_likelihoods: list[float] = field(default_factory=list)
    n_iters: int = 0
    converged: bool = False
    reseeds: list[tuple[int, int]] = field(default_factory=list)


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"data must be an (N, d) array, got shape {x.shape}")
    if x.shape[0] == 0:
        raise DataError("empty data")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite data point")
    return x


def _log_densities(x: np.ndarray, components: Sequence[GaussianComponent]) -> np.ndarray:
    """Log N(x_n | mu_k, Sigma_k) for all points and components, shape (N, K)."""
    n = x.shape[0]
    out = np.empty((n, len(components)))
    for k, comp in enumerate(components):
        diff = (x - comp.mean).T
        z = solve_triangular(comp.chol, diff, lower=True)
        maha = np.sum(z * z, axis=0)
        out[:, k] = -0.5 * (comp.dim * _LOG_2PI + comp.log_det + maha)
    return out


def _log_joint(x: np.ndarray, params: MixtureParams) -> np.ndarray:
    """log pi_k + log N(x_n | ...), the unnormalized log posteriors."""
    with np.errstate(divide="ignore"):  # zero weights are legal -> -inf
        log_w = np.log(params.weights)
    return _log_densities(x, params.components) + log_w


def gaussian_pdf(x, comp: GaussianComponent) -> float:
    """Multivariate normal density at one point, evaluated via log space."""
    pt = np.asarray(x, dtype=np.float64)
    if pt.shape != (comp.dim,) or not np.all(np.isfinite(pt)):
        raise DataError(f"point must be a finite {comp.dim}-vector")
    return float(np.exp(_log_densities(pt[None, :], [comp])[0, 0]))


def log_likelihood(data, params: MixtureParams) -> float:
    """L = sum_n log sum_k pi_k N(x_n | mu_k, Sigma_k), via log-sum-exp."""
    x = _as_data(data)
    return float(np.sum(logsumexp(_log_joint(x, params), axis=1)))


def e_step(data, params: MixtureParams) -> np.ndarray:
    """Responsibility matrix r_nk; each row sums to 1."""
    resp, _ = _e_step_with_norm(_as_data(data), params)
    return resp


def _e_step_with_norm(x: np.ndarray, params: MixtureParams):
    log_joint = _log_joint(x, params)
    log_norm = logsumexp(log_joint, axis=1)
    if not np.all(np.isfinite(log_norm)):
        raise NumericalError("mixture density vanished for some data point")
    resp = np.exp(log_joint - log_norm[:, None])
    return resp, log_norm


def m_step(data, resp, reg_eps: float = 1e-6, covariance_mode: str = "full") -> MixtureParams:
    """Closed-form parameter re-estimation from responsibilities."""
    x = _as_data(data)
    r = np.asarray(resp, dtype=np.float64)
    n, d = x.shape
    if r.shape[0] != n or r.ndim != 2:
        raise DataError("responsibilities must be (N, K) aligned with the data")
    mass = r.sum(axis=0)
    empty = np.nonzero(mass < EMPTY_COMPONENT_MASS)[0]
    if empty.size:
        raise NumericalError(f"component {int(empty[0])} has no responsibility mass")

    weights = mass / n
    weights = weights / weights.sum()
    components = []
    for k in range(r.shape[1]):
        mu = (r[:, k] @ x) / mass[k]
        diff = x - mu
        cov = (diff.T * r[:, k]) @ diff / mass[k]
        if covariance_mode == "diag":
            cov = np.diag(np.diag(cov))
        cov = cov + reg_eps * np.eye(d)
        components.append(GaussianComponent(mean=mu, cov=cov))
    return MixtureParams(components=tuple(components), weights=weights)


def _global_cov(x: np.ndarray, reg_eps: float, covariance_mode: str) -> np.ndarray:
    cov = np.cov(x.T, bias=True)
    cov = np.atleast_2d(cov)
    if covariance_mode == "diag":
        cov = np.diag(np.diag(cov))
    # starting covariances stay factorizable even with reg_eps=0 and flat data
    return cov + max(reg_eps, 1e-12) * np.eye(x.shape[1])


def _seed_means(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++-style seeding: next mean drawn with probability proportional to
    squared distance from the nearest already-chosen mean."""
    n = x.shape[0]
    means = np.empty((k, x.shape[1]))
    means[0] = x[rng.integers(n)]
    for i in range(1, k):
        dist_sq = np.min(
            np.sum((x[:, None, :] - means[None, :i, :]) ** 2, axis=2), axis=1
        )
        total = dist_sq.sum()
        if total > 0:
            probs = dist_sq / total
            means[i] = x[rng.choice(n, p=probs)]
        else:  # all remaining points coincide with chosen means
            means[i] = x[rng.integers(n)]
    return means


def initialize(data, config: EmConfig) -> MixtureParams:
    """Seeded starting parameters: k-means++ means, global covariance, uniform weights."""
    x = _as_data(data)
    n = x.shape[0]
    if n < config.k:
        raise DataError(f"need at least k={config.k} data points, got {n}")
    rng = np.random.default_rng(config.seed)
    if config.k == 1:
        means = x.mean(axis=0)[None, :]
    else:
        means = _seed_means(x, config.k, rng)
    cov = _global_cov(x, config.reg_eps, config.covariance_mode)
    components = tuple(GaussianComponent(mean=m, cov=cov) for m in means)
    weights = np.full(config.k, 1.0 / config.k)
    return MixtureParams(components=components, weights=weights)


def _reseed_component(
    x: np.ndarray, params: MixtureParams, k_empty: int, config: EmConfig
) -> MixtureParams:
    """Move an empty component to the point the mixture explains worst."""
    log_norm = logsumexp(_log_joint(x, params), axis=1)
    worst = int(np.argmin(log_norm))
    cov = _global_cov(x, config.reg_eps, config.covariance_mode)
    components = list(params.components)
    components[k_empty] = GaussianComponent(mean=x[worst].copy(), cov=cov)
    weights = params.weights.copy()
    weights[k_empty] = 1.0 / params.k
    weights = weights / weights.sum()
    return MixtureParams(components=tuple(components), weights=weights)


def fit(data, config: EmConfig):
    """Run EM until the log-likelihood change drops below tol or max_iters.

    Returns (MixtureParams, responsibility matrix, EmTrace); the responsibilities
    correspond to the returned parameters.
    """
    x = _as_data(data)
    params = initialize(x, config)
    trace = EmTrace()

    def checked_e_step(params, iteration):
        # Reseed any component whose posterior mass has collapsed to zero.
        for _ in range(_MAX_RESEEDS + 1):
            resp, log_norm = _e_step_with_norm(x, params)
            mass = resp.sum(axis=0)
            empty = np.nonzero(mass < EMPTY_COMPONENT_MASS)[0]
            if empty.size == 0:
                return params, resp, float(log_norm.sum())
            if len(trace.reseeds) >= _MAX_RESEEDS:
                raise NumericalError(
                    f"component {int(empty[0])} stayed empty after "
                    f"{_MAX_RESEEDS} reseeds (iteration {iteration}); "
                    "try a smaller k or different seed"
                )
            trace.reseeds.append((iteration, int(empty[0])))
            params = _reseed_component(x, params, int(empty[0]), config)
        raise NumericalError("reseed loop failed to produce a live component")

    params, resp, ll = checked_e_step(params, 0)
    trace.log_likelihoods.append(ll)
    for iteration in range(1, config.max_iters + 1):
        params = m_step(x, resp, reg_eps=config.reg_eps, covariance_mode=config.covariance_mode)
        params, resp, ll = checked_e_step(params, iteration)
        trace.log_likelihoods.append(ll)
        trace.n_iters = iteration
        if abs(ll - trace.log_likelihoods[-2]) < config.tol:
            trace.converged = True
            break
    return params, resp, trace
