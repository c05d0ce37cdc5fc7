"""Exact Gaussian process regression.

A :class:`TrainedGP` bundles a dataset, a kernel and the cached Cholesky
factorization of ``K + noise * I``; prediction, posterior sampling and the
log marginal likelihood all reuse that factorization. Hyperparameters are
trained by maximizing the log marginal likelihood with a derivative-free
simplex search in log-parameter space, restarted from scale-aware random
initializations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize

from .errors import ConditioningError, DomainError, InsufficientDataError, ShapeError
from .kernels import KernelSpec, kernel_matrix

# Jitter escalation ladder: fractions of the mean diagonal of K, tried in
# order until the Cholesky succeeds.
_JITTER_START = 1e-10
_JITTER_STOP = 1e-4
_JITTER_FACTOR = 10.0

# Predictive variances in [-VAR_CLAMP, 0) are rounding noise and clamped to 0;
# anything below -VAR_CLAMP indicates real conditioning trouble.
_VAR_CLAMP = 1e-10


@dataclass(frozen=True)
class GPDataset:
    """Inputs (n, d), targets (n,) and a fixed observation noise variance."""

    inputs: np.ndarray
    targets: np.ndarray
    noise_variance: float

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        y = np.atleast_1d(np.asarray(self.targets, dtype=np.float64))
        if x.ndim != 2:
            raise ShapeError("inputs must be an (n, d) matrix")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ShapeError(f"targets length {y.shape} does not match {x.shape[0]} input rows")
        if x.shape[0] < 1:
            raise InsufficientDataError("a GP dataset needs at least one observation")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise DomainError("inputs and targets must be finite")
        nv = float(self.noise_variance)
        if not np.isfinite(nv) or nv < 0:
            raise DomainError("noise_variance must be finite and >= 0")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "noise_variance", nv)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dimension(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class TrainedGP:
    """An exact GP posterior with cached factorization.

    ``chol_factor`` is the lower Cholesky factor of ``K + noise * I`` and
    ``alpha`` solves ``(K + noise * I) alpha = targets``. Instances are
    immutable; every operation on one is pure.
    """

    dataset: GPDataset
    kernel: KernelSpec
    chol_factor: np.ndarray
    alpha: np.ndarray

    @classmethod
    def from_params(cls, dataset: GPDataset, kernel: KernelSpec) -> "TrainedGP":
        """Build the cached factorization for fixed hyperparameters."""
        if kernel.dimension != dataset.dimension:
            raise ShapeError(
                f"kernel dimension {kernel.dimension} != data dimension {dataset.dimension}"
            )
        K = kernel_matrix(kernel, dataset.inputs)
        L = _factorize(K, dataset.noise_variance)
        alpha = solve_triangular(
            L.T, solve_triangular(L, dataset.targets, lower=True), lower=False
        )
        return cls(dataset=dataset, kernel=kernel, chol_factor=L, alpha=alpha)


def _factorize(K: np.ndarray, noise_variance: float) -> np.ndarray:
    """Lower Cholesky of K + noise * I, escalating jitter on failure."""
    n = K.shape[0]
    base = K + noise_variance * np.eye(n)
    if not np.all(np.isfinite(base)):
        raise ConditioningError("covariance matrix contains non-finite entries")
    mean_diag = max(float(np.mean(np.diag(K))), np.finfo(np.float64).tiny)
    attempted = []
    jitter = 0.0
    while True:
        try:
            return cholesky(base + jitter * np.eye(n), lower=True)
        except np.linalg.LinAlgError:
            pass
        jitter = _JITTER_START * mean_diag if jitter == 0.0 else jitter * _JITTER_FACTOR
        if jitter > _JITTER_STOP * mean_diag:
            raise ConditioningError(
                f"Cholesky failed after jitter escalation (attempted {attempted})",
                jitter_levels=attempted,
            )
        attempted.append(jitter)


def log_marginal_likelihood(gp: TrainedGP) -> float:
    """log p(y | X, kernel) from the cached factorization."""
    n = gp.dataset.n
    fit_term = -0.5 * float(gp.dataset.targets @ gp.alpha)
    logdet_term = -float(np.sum(np.log(np.diag(gp.chol_factor))))
    return fit_term + logdet_term - 0.5 * n * np.log(2.0 * np.pi)


def predict(gp: TrainedGP, queries) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and (noise-free) variance at the query rows.

    Returns
    -------
    mean, variance : ndarray, shape (m,)
        Variances are clamped to >= 0; values below -1e-10 that survive a
        truncated-spectral recomputation raise a conditioning error rather
        than being silently repaired.
    """
    X = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if X.shape[1] != gp.dataset.dimension:
        raise ShapeError(
            f"query dimension {X.shape[1]} != training dimension {gp.dataset.dimension}"
        )
    k_star = kernel_matrix(gp.kernel, gp.dataset.inputs, X)
    mean = k_star.T @ gp.alpha
    v = solve_triangular(gp.chol_factor, k_star, lower=True)
    variance = gp.kernel.signal_variance - np.sum(v**2, axis=0)
    low = float(np.min(variance)) if variance.size else 0.0
    if low < -_VAR_CLAMP:
        variance = _spectral_variance(gp, k_star)
        low = float(np.min(variance))
        if low < -_VAR_CLAMP:
            raise ConditioningError(f"predictive variance {low} below clamp threshold")
    return mean, np.maximum(variance, 0.0)


def _spectral_variance(gp: TrainedGP, k_star: np.ndarray) -> np.ndarray:
    """Quadratic-form variance via a truncated eigendecomposition.

    On severely ill-conditioned systems the Cholesky route loses enough
    precision for sv - ||v||^2 to dip visibly negative. Discarding
    eigenvalues below machine precision times the largest (a truncated
    pseudo-inverse) never overshoots the quadratic form, so the result is
    nonnegative up to rounding.
    """
    K = kernel_matrix(gp.kernel, gp.dataset.inputs)
    A = K + gp.dataset.noise_variance * np.eye(K.shape[0])
    w, u = np.linalg.eigh(0.5 * (A + A.T))
    cutoff = np.finfo(np.float64).eps * float(np.max(w)) * K.shape[0]
    keep = w > cutoff
    proj = u[:, keep].T @ k_star
    quad = np.sum(proj**2 / w[keep, None], axis=0)
    return gp.kernel.signal_variance - quad


def posterior_covariance(gp: TrainedGP, queries) -> np.ndarray:
    """Full posterior covariance matrix over the query rows."""
    X = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    k_star = kernel_matrix(gp.kernel, gp.dataset.inputs, X)
    k_ss = kernel_matrix(gp.kernel, X)
    v = solve_triangular(gp.chol_factor, k_star, lower=True)
    return k_ss - v.T @ v


def sample_posterior(gp: TrainedGP, queries, count: int, rng_seed: int) -> np.ndarray:
    """Draw ``count`` joint posterior samples at the query rows.

    Sampling factors the posterior covariance by symmetric eigendecomposition
    with negative eigenvalues clamped to zero, which tolerates the degenerate
    (zero-variance) posteriors that arise at noise-free training inputs.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    X = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    mean, _ = predict(gp, X)
    cov = posterior_covariance(gp, X)
    cov = 0.5 * (cov + cov.T)
    try:
        w, u = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"posterior covariance factorization failed: {exc}") from exc
    scale = max(float(np.max(np.abs(w))), 1.0)
    if float(np.min(w)) < -1e-8 * scale:
        raise ConditioningError(f"posterior covariance has eigenvalue {np.min(w)}")
    factor = u * np.sqrt(np.maximum(w, 0.0))
    rng = np.random.default_rng(rng_seed)
    z = rng.standard_normal((X.shape[0], count))
    return (mean[:, None] + factor @ z).T


def _lml_for_kernel(data: GPDataset, kernel: KernelSpec) -> float:
    return log_marginal_likelihood(TrainedGP.from_params(data, kernel))


def _param_bounds(data: GPDataset) -> tuple[np.ndarray, np.ndarray]:
    """Log-space hyperparameter box, scaled to the data.

    Lengthscales are confined to [1e-3, 3] times the per-dimension input
    range and the signal variance to [1e-8, 1e6] times the target variance.
    Flat likelihood directions (irrelevant inputs, perfectly dependent
    targets) otherwise let the simplex drift to scales that destroy both
    the conditioning of downstream predictions and every exploration
    signal: beyond a few input ranges a stationary kernel is
    indistinguishable from a trend, but its posterior variance collapses.
    """
    ranges = np.ptp(data.inputs, axis=0)
    ranges = np.where(ranges > 0, ranges, 1.0)
    tv = float(np.var(data.targets))
    if tv <= 0:
        tv = 1.0
    lo = np.log(np.concatenate([1e-3 * ranges, [1e-8 * tv]]))
    hi = np.log(np.concatenate([3.0 * ranges, [1e6 * tv]]))
    return lo, hi


def _nm_objective(log_params, data: GPDataset, kind: str, lo, hi) -> float:
    if np.any(log_params < lo) or np.any(log_params > hi):
        return np.inf
    ls = np.exp(log_params[:-1])
    sv = float(np.exp(log_params[-1]))
    try:
        kernel = KernelSpec(kind=kind, lengthscales=ls, signal_variance=sv)
        return -_lml_for_kernel(data, kernel)
    except ConditioningError:
        return np.inf


def _restart_inits(
    data: GPDataset, init: KernelSpec, restarts: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Log-space starting points: the user's init plus scale-aware draws.

    Random lengthscales are log-uniform in [0.05, 2] times the per-dimension
    input range; signal variance starts at the target variance.
    """
    d = data.dimension
    ranges = np.ptp(data.inputs, axis=0)
    ranges = np.where(ranges > 0, ranges, 1.0)
    sv0 = float(np.var(data.targets))
    if sv0 <= 0:
        sv0 = 1.0
    starts = [np.log(np.concatenate([init.lengthscales, [init.signal_variance]]))]
    for _ in range(restarts - 1):
        frac = np.exp(rng.uniform(np.log(0.05), np.log(2.0), size=d))
        starts.append(np.log(np.concatenate([frac * ranges, [sv0]])))
    return starts


def fit(
    data: GPDataset,
    init: KernelSpec,
    restarts: int,
    rng_seed: int,
    sv_floor: float | None = None,
) -> TrainedGP:
    """Train kernel hyperparameters by marginal-likelihood maximization.

    Runs a Nelder-Mead simplex search in log-parameter space from
    ``restarts`` starting points (the provided ``init`` first, then
    randomized ones) and keeps the best optimum found inside the scaled
    hyperparameter box. Deterministic given ``rng_seed``.

    ``sv_floor`` optionally raises the lower signal-variance bound; callers
    with outside knowledge of the response scale (e.g. a multi-fidelity
    trainer pooling targets across levels) use it to stop one-observation
    datasets from freezing the variance at that single value.
    """
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    if init.dimension != data.dimension:
        raise ShapeError(
            f"init kernel dimension {init.dimension} != data dimension {data.dimension}"
        )
    rng = np.random.default_rng(rng_seed)
    lo, hi = _param_bounds(data)
    if sv_floor is not None and sv_floor > 0:
        lo[-1] = min(np.log(sv_floor), hi[-1] - 1e-3)
    inset = 1e-6
    best_val = np.inf
    best_params = None
    for start in _restart_inits(data, init, restarts, rng):
        start = np.clip(start, lo + inset, hi - inset)
        res = minimize(
            _nm_objective,
            start,
            args=(data, init.kind, lo, hi),
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 400 * start.size},
        )
        candidate = np.clip(res.x, lo, hi)
        val = _nm_objective(candidate, data, init.kind, lo, hi)
        if val < best_val:
            best_val = val
            best_params = candidate
    if best_params is None or not np.isfinite(best_val):
        raise ConditioningError("no restart produced a finite marginal likelihood")
    kernel = KernelSpec(
        kind=init.kind,
        lengthscales=np.exp(best_params[:-1]),
        signal_variance=float(np.exp(best_params[-1])),
    )
    return TrainedGP.from_params(data, kernel)
