"""Closed-form posteriors and maximum-likelihood hyperparameter training.

Everything latent is a linear image of the signal x, so the posterior
over any block (time, real spectrum, imaginary spectrum) is obtained by
conditioning x on the stacked observations and pushing the result
through the block operators. Computing the x-space posterior once and
mapping it per block makes the identity "spectral posterior mean equals
the transform of the temporal posterior mean" structural rather than
approximate.

Numerical strategy:

* positive observation noise -> one Cholesky of the observation
  covariance, reused for likelihood value, posterior mean and posterior
  covariance;
* zero observation noise on some active side -> the observation
  covariance is typically singular (exact constraints), so solves use a
  thresholded eigendecomposition instead of a jitter shift, which keeps
  posterior variance at observed entries at roundoff level;
* a complete noiseless side pins the signal exactly (the transform is a
  bijection), so the posterior collapses to a point mass evaluated
  directly, with zero covariance.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from .errors import InvalidInputError, NumericalError
from .fourier import SpectrumPair, inverse
from .kernels import KernelSpec, PERIODIC, build_covariance, jittered_cholesky
from .model import JointGaussianModel
from .observation import ObservationSet, assemble

BLOCK_ORDER = ("time", "real", "imag")


@dataclass(frozen=True)
class PosteriorResult:
    """Posterior mean and covariance over the requested latent blocks.

    Blocks are stacked in the canonical order time, real, imag; each
    block has length ``size``. ``marginal_std`` is the square root of
    the covariance diagonal with tiny negative roundoff clipped to zero.
    """

    blocks: tuple[str, ...]
    mean: np.ndarray
    covariance: np.ndarray
    marginal_std: np.ndarray
    size: int

    def block_slice(self, name: str) -> slice:
        if name not in self.blocks:
            raise InvalidInputError(f"block {name!r} not in result {self.blocks}")
        i = self.blocks.index(name)
        return slice(i * self.size, (i + 1) * self.size)

    def block_mean(self, name: str) -> np.ndarray:
        return self.mean[self.block_slice(name)]

    def block_cov(self, name: str) -> np.ndarray:
        s = self.block_slice(name)
        return self.covariance[s, s]

    def block_std(self, name: str) -> np.ndarray:
        return self.marginal_std[self.block_slice(name)]


@dataclass(frozen=True)
class LikelihoodEvaluation:
    """Marginal likelihood of the observations plus cached pieces."""

    log_likelihood: float
    obs_mean: np.ndarray
    obs_cov: np.ndarray
    factor: object  # CholeskyFactor of obs_cov (with any jitter applied)


def _normalize_blocks(blocks) -> tuple[str, ...]:
    wanted = tuple(blocks)
    if not wanted:
        raise InvalidInputError("at least one block must be requested")
    for b in wanted:
        if b not in BLOCK_ORDER:
            raise InvalidInputError(f"unknown block {b!r}; expected subset of {BLOCK_ORDER}")
    return tuple(b for b in BLOCK_ORDER if b in wanted)


def _block_operator(model: JointGaussianModel, name: str) -> np.ndarray | None:
    """Matrix T with block = T @ x; None stands for the identity."""
    if name == "time":
        return None
    if name == "real":
        return model.op.real_part.T
    return model.op.imag_part.T


def _require_observations(obs: ObservationSet):
    if obs is None or obs.is_empty:
        raise InvalidInputError("inference needs a non-empty observation set")


def _exact_signal(model: JointGaussianModel, obs: ObservationSet) -> np.ndarray | None:
    """Signal pinned exactly by a complete noiseless side, if any.

    A complete noiseless observation of either representation
    determines the signal through the bijection, making the posterior a
    point mass no matter what else was observed.
    """
    t = obs.temporal
    if t is not None and t.selection.count == model.size and t.noise_variance == 0.0:
        return t.values.copy()
    f = obs.spectral
    if f is not None and f.selection.count == model.size and f.noise_variance == 0.0:
        if t is None or t.selection.count == 0 or t.noise_variance > 0.0:
            return inverse(model.op, SpectrumPair(f.real_values, f.imag_values))
    return None


def _degenerate_result(model, x_star, blocks) -> PosteriorResult:
    parts = []
    for name in blocks:
        t = _block_operator(model, name)
        parts.append(x_star if t is None else t @ x_star)
    mean = np.concatenate(parts)
    dim = mean.size
    return PosteriorResult(
        blocks=blocks,
        mean=mean,
        covariance=np.zeros((dim, dim)),
        marginal_std=np.zeros(dim),
        size=model.size,
    )


def _pinv_solver(s: np.ndarray):
    """Solve against a PSD matrix through a thresholded eigenbasis."""
    w, v = np.linalg.eigh(s)
    cutoff = np.finfo(float).eps * max(w.max(), 0.0) * s.shape[0]
    keep = w > cutoff
    v_keep = v[:, keep]
    w_keep = w[keep]

    def solve(b: np.ndarray) -> np.ndarray:
        proj = v_keep.T @ b
        return v_keep @ (proj / w_keep[:, None] if proj.ndim == 2 else proj / w_keep)

    return solve


def _chol_solver(factor):
    lower = factor.matrix
    if np.any(np.diagonal(lower) <= 0):
        raise NumericalError("observation covariance factor is singular")

    def solve(b: np.ndarray) -> np.ndarray:
        half = solve_triangular(lower, b, lower=True)
        return solve_triangular(lower.T, half, lower=False)

    return solve


def _marginal_std(diag: np.ndarray) -> np.ndarray:
    worst = diag.min() if diag.size else 0.0
    if worst < -1e-10:
        raise NumericalError(
            f"posterior variance fell below roundoff tolerance: {worst:.3e}"
        )
    return np.sqrt(np.clip(diag, 0.0, None))


def log_likelihood(model: JointGaussianModel, obs: ObservationSet) -> LikelihoodEvaluation:
    """Log marginal likelihood of the stacked observations.

    Evaluated through one triangular factorization of the observation
    covariance; a jitter ladder covers the zero-noise corner, which is
    tolerated here but refused by training.
    """
    _require_observations(obs)
    system = assemble(model, obs)
    a = system.matrix
    obs_mean = a @ model.mean
    obs_cov = a @ model.sigma @ a.T + np.diag(system.noise)
    factor = jittered_cholesky(obs_cov)
    lower = factor.matrix
    diag = np.diagonal(lower)
    if np.any(diag <= 0):
        raise NumericalError("observation covariance is numerically singular")
    resid = system.values - obs_mean
    half = solve_triangular(lower, resid, lower=True)
    quad = float(half @ half)
    logdet = 2.0 * float(np.sum(np.log(diag)))
    m = resid.size
    value = -0.5 * (quad + logdet + m * np.log(2.0 * np.pi))
    if not np.isfinite(value):
        raise NumericalError("log-likelihood evaluated to a non-finite value")
    return LikelihoodEvaluation(
        log_likelihood=value, obs_mean=obs_mean, obs_cov=obs_cov, factor=factor
    )


def posterior(
    model: JointGaussianModel,
    obs: ObservationSet,
    blocks=BLOCK_ORDER,
) -> PosteriorResult:
    """Gaussian conditioning of the requested blocks on the observations."""
    _require_observations(obs)
    blocks = _normalize_blocks(blocks)

    x_star = _exact_signal(model, obs)
    if x_star is not None:
        return _degenerate_result(model, x_star, blocks)

    system = assemble(model, obs)
    a = system.matrix
    sigma = model.sigma
    cross = a @ sigma  # covariance between observations and the signal
    obs_cov = cross @ a.T + np.diag(system.noise)

    noiseless = bool(np.any(system.noise == 0.0))
    if noiseless:
        solve = _pinv_solver(obs_cov)
    else:
        solve = _chol_solver(jittered_cholesky(obs_cov))

    resid = system.values - a @ model.mean
    mean_x = model.mean + cross.T @ solve(resid)
    cov_x = sigma - cross.T @ solve(cross)
    cov_x = 0.5 * (cov_x + cov_x.T)

    mats = [_block_operator(model, name) for name in blocks]
    means = [mean_x if t is None else t @ mean_x for t in mats]
    rows = []
    for ta in mats:
        left = cov_x if ta is None else ta @ cov_x
        rows.append([left if tb is None else left @ tb.T for tb in mats])
    cov = np.block(rows)
    cov = 0.5 * (cov + cov.T)
    return PosteriorResult(
        blocks=blocks,
        mean=np.concatenate(means),
        covariance=cov,
        marginal_std=_marginal_std(np.diagonal(cov).copy()),
        size=model.size,
    )


def _temporal_only(obs: ObservationSet):
    _require_observations(obs)
    if obs.spectral is not None and obs.spectral.selection.count:
        raise InvalidInputError("this path takes temporal observations only")
    return obs.temporal


def _spectral_only(obs: ObservationSet):
    _require_observations(obs)
    if obs.temporal is not None and obs.temporal.selection.count:
        raise InvalidInputError("this path takes spectral observations only")
    return obs.spectral


def spectral_posterior_given_time(
    model: JointGaussianModel, obs: ObservationSet
) -> PosteriorResult:
    """Spectrum posterior from temporal observations, written out directly.

    Implements the stacked-operator expressions for the zero-prior-mean
    case explicitly; it must agree with :func:`posterior` restricted to
    the spectral blocks, and its mean is the transform of the temporal
    posterior mean.
    """
    temporal = _temporal_only(obs)
    if np.any(model.mean != 0.0):
        raise InvalidInputError(
            "the direct spectral-posterior expressions assume a zero prior mean; "
            "use posterior() for general means"
        )
    x_star = _exact_signal(model, obs)
    blocks = ("real", "imag")
    if x_star is not None:
        return _degenerate_result(model, x_star, blocks)

    idx = temporal.selection.indices
    sigma_ht = model.sigma[:, idx]
    gram = sigma_ht[idx, :] + temporal.noise_variance * np.eye(idx.size)
    stacked = np.vstack([model.op.real_part.T, model.op.imag_part.T])

    if temporal.noise_variance == 0.0:
        solve = _pinv_solver(gram)
    else:
        solve = _chol_solver(jittered_cholesky(gram))
    mean = stacked @ (sigma_ht @ solve(temporal.values))
    inner = model.sigma - sigma_ht @ solve(sigma_ht.T)
    cov = stacked @ inner @ stacked.T
    cov = 0.5 * (cov + cov.T)
    return PosteriorResult(
        blocks=blocks,
        mean=mean,
        covariance=cov,
        marginal_std=_marginal_std(np.diagonal(cov).copy()),
        size=model.size,
    )


def spectral_covariance_woodbury(
    model: JointGaussianModel, obs: ObservationSet
) -> np.ndarray:
    """Spectrum posterior covariance through the inverted-precision form.

    Rewrites the conditional covariance as the congruence of
    ``(sigma^-1 + H H^T / noise)^-1`` by the stacked operators. Needs
    strictly positive temporal noise and an invertible temporal
    covariance; useful as an independent route to cross-check the
    direct subtraction formula.
    """
    temporal = _temporal_only(obs)
    if temporal.noise_variance <= 0.0:
        raise InvalidInputError("the precision form requires positive temporal noise")
    factor = jittered_cholesky(model.sigma)
    eye = np.eye(model.size)
    sigma_inv = _chol_solver(factor)(eye)
    precision = sigma_inv.copy()
    idx = temporal.selection.indices
    precision[idx, idx] += 1.0 / temporal.noise_variance
    precision = 0.5 * (precision + precision.T)
    inner = _chol_solver(jittered_cholesky(precision))(eye)
    stacked = np.vstack([model.op.real_part.T, model.op.imag_part.T])
    cov = stacked @ inner @ stacked.T
    return 0.5 * (cov + cov.T)


def temporal_posterior_given_spectrum(
    model: JointGaussianModel, obs: ObservationSet
) -> PosteriorResult:
    """Time-block posterior from spectrum observations only."""
    _spectral_only(obs)
    return posterior(model, obs, blocks=("time",))


@dataclass
class TrainingConfig:
    """Derivative-free training settings.

    Restart starting points are scattered log-uniformly up to
    ``spread_decades`` decades around the initial hyperparameters;
    restart 0 always starts exactly at the initial values. Noise
    variances are held fixed unless the corresponding flag is set.
    """

    restarts: int = 5
    max_iterations: int = 500
    tolerance: float = 1e-6
    spread_decades: float = 2.0
    seed: int = 0
    train_time_noise: bool = False
    train_freq_noise: bool = False


@dataclass(frozen=True)
class TrainingReport:
    initial_spec: KernelSpec
    final_spec: KernelSpec
    initial_noise: tuple[float | None, float | None]
    final_noise: tuple[float | None, float | None]
    initial_log_likelihood: float
    log_likelihood: float
    trace: np.ndarray
    iterations: int
    converged: bool


def _pack_names(spec: KernelSpec, obs: ObservationSet, config: TrainingConfig):
    names = ["sigma2", "alpha"]
    if spec.family == PERIODIC:
        names.append("beta")
    if config.train_time_noise and obs.temporal is not None and obs.temporal.selection.count:
        names.append("noise_time")
    if config.train_freq_noise and obs.spectral is not None and obs.spectral.selection.count:
        names.append("noise_freq")
    return names


def _unpack(theta: np.ndarray, names, model: JointGaussianModel, obs: ObservationSet):
    values = dict(zip(names, np.exp(theta)))
    spec = KernelSpec(
        family=model.spec.family,
        sigma2=float(values["sigma2"]),
        alpha=float(values["alpha"]),
        beta=float(values["beta"]) if "beta" in values else None,
    )
    new_obs = obs
    if "noise_time" in values:
        new_obs = dataclasses.replace(
            new_obs,
            temporal=dataclasses.replace(
                new_obs.temporal, noise_variance=float(values["noise_time"])
            ),
        )
    if "noise_freq" in values:
        new_obs = dataclasses.replace(
            new_obs,
            spectral=dataclasses.replace(
                new_obs.spectral, noise_variance=float(values["noise_freq"])
            ),
        )
    return spec, new_obs


def train(
    model: JointGaussianModel,
    obs: ObservationSet,
    config: TrainingConfig | None = None,
) -> TrainingReport:
    """Maximize the observation likelihood over log-hyperparameters.

    Nelder-Mead simplex search with seeded random restarts; the best
    restart wins, ties broken by restart index, and the reported trace
    is the running best over all evaluations, so the final value never
    falls below the initial one.
    """
    config = config or TrainingConfig()
    _require_observations(obs)
    if obs.row_count < 2:
        raise InvalidInputError("training needs at least 2 observations")
    if model.spec is None:
        raise InvalidInputError("training needs a model built from a kernel spec")
    if obs.temporal is not None and obs.temporal.selection.count:
        if obs.temporal.noise_variance <= 0 and not config.train_time_noise:
            raise InvalidInputError("training requires positive temporal noise variance")
    if obs.spectral is not None and obs.spectral.selection.count:
        if obs.spectral.noise_variance <= 0 and not config.train_freq_noise:
            raise InvalidInputError("training requires positive spectral noise variance")

    names = _pack_names(model.spec, obs, config)
    init = {
        "sigma2": model.spec.sigma2,
        "alpha": model.spec.alpha,
        "beta": model.spec.beta,
        "noise_time": obs.temporal.noise_variance if obs.temporal else None,
        "noise_freq": obs.spectral.noise_variance if obs.spectral else None,
    }
    theta0 = np.array([np.log(init[name]) for name in names])
    if not np.all(np.isfinite(theta0)):
        raise InvalidInputError("initial hyperparameters must be strictly positive")

    evaluations: list[float] = []

    def objective(theta: np.ndarray) -> float:
        try:
            spec, candidate_obs = _unpack(theta, names, model, obs)
            sigma = build_covariance(model.grid, spec)
            candidate = dataclasses.replace(model, sigma=sigma, spec=spec)
            value = log_likelihood(candidate, candidate_obs).log_likelihood
        except (NumericalError, InvalidInputError, FloatingPointError):
            evaluations.append(-np.inf)
            return np.inf
        evaluations.append(value)
        return -value

    initial_ll = -objective(theta0)
    candidates = []
    if np.isfinite(initial_ll):
        candidates.append((initial_ll, theta0, False, 0))
    iterations = 0
    spread = config.spread_decades * np.log(10.0)
    for restart in range(config.restarts):
        if restart == 0:
            start = theta0
        else:
            rng = np.random.default_rng([config.seed, restart])
            start = theta0 + rng.uniform(-spread, spread, size=theta0.size)
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "maxiter": config.max_iterations,
                "xatol": config.tolerance,
                "fatol": config.tolerance,
            },
        )
        iterations += int(result.nit)
        if np.isfinite(result.fun):
            candidates.append((-float(result.fun), result.x, bool(result.success), restart))

    if not candidates:
        raise NumericalError("no training restart produced a finite likelihood")

    best = max(candidates, key=lambda c: c[0])
    best_ll, best_theta, best_converged, _ = best
    final_spec, final_obs = _unpack(np.asarray(best_theta), names, model, obs)

    trace = np.maximum.accumulate(
        np.array([v if np.isfinite(v) else -np.inf for v in evaluations])
    )
    return TrainingReport(
        initial_spec=model.spec,
        final_spec=final_spec,
        initial_noise=(init["noise_time"], init["noise_freq"]),
        final_noise=(
            final_obs.temporal.noise_variance if final_obs.temporal else None,
            final_obs.spectral.noise_variance if final_obs.spectral else None,
        ),
        initial_log_likelihood=float(initial_ll),
        log_likelihood=float(best_ll),
        trace=trace,
        iterations=iterations,
        converged=best_converged,
    )
