"""Joint Gaussian prior over a signal and its spectrum pair.

A multivariate normal prior on the time series x induces, through the
linear DFT, a joint Gaussian over the stacked vector [x, Xr, Xi]. The
3N x 3N joint covariance has the rank of the temporal covariance, so it
is never factorized directly: samples are always drawn hierarchically
(draw x, then transform), which sidesteps the deliberate rank
deficiency of the joint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError
from .fourier import (
    FourierOperator,
    FourierOperator2D,
    SpectrumPair,
    build_operator,
    build_operator_2d,
    forward,
)
from .kernels import KernelSpec, TimeGrid, build_covariance, jittered_cholesky


@dataclass(frozen=True)
class JointGaussianModel:
    """Prior mean/covariance of the signal plus its transform operator.

    ``spec`` is kept when the covariance came from a kernel family so
    that hyperparameter training can rebuild it; models assembled from a
    raw covariance (e.g. the 2D product kernel) may leave it ``None``.
    """

    grid: TimeGrid
    mean: np.ndarray
    sigma: np.ndarray
    op: FourierOperator | FourierOperator2D
    spec: KernelSpec | None = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        n = self.op.size
        if mean.shape != (n,):
            raise InvalidInputError(
                f"mean has shape {mean.shape}, expected ({n},)"
            )
        if sigma.shape != (n, n):
            raise InvalidInputError(
                f"covariance has shape {sigma.shape}, expected ({n}, {n})"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", sigma)

    @property
    def size(self) -> int:
        return self.op.size


def build_model(
    grid: TimeGrid, spec: KernelSpec, mean: np.ndarray | None = None
) -> JointGaussianModel:
    """Assemble the joint model from a kernel on a 1D grid.

    The prior mean defaults to zero; it is exposed for completeness but
    excluded from hyperparameter training.
    """
    sigma = build_covariance(grid, spec)
    if mean is None:
        mean = np.zeros(grid.size)
    return JointGaussianModel(
        grid=grid, mean=mean, sigma=sigma, op=build_operator(grid.size), spec=spec
    )


def build_model_2d(
    side: int, spec: KernelSpec, mean: np.ndarray | None = None
) -> JointGaussianModel:
    """Joint model for a side x side image flattened row-major.

    The pixel covariance is the product kernel
    ``k((r, c), (r', c')) = sigma2 * k0(r, r') * k0(c, c')`` evaluated on
    the vectorized pixel pairs, with unit-variance axis factors so the
    marginal variance is applied once. The transform is the Kronecker
    2D operator.
    """
    op = build_operator_2d(side)
    axis_grid = TimeGrid(np.arange(float(side)))
    axis_spec = KernelSpec(
        family=spec.family, sigma2=1.0, alpha=spec.alpha, beta=spec.beta
    )
    axis_cov = build_covariance(axis_grid, axis_spec)
    sigma = spec.sigma2 * np.kron(axis_cov, axis_cov)
    if mean is None:
        mean = np.zeros(op.size)
    grid = TimeGrid(np.arange(float(op.size)))
    return JointGaussianModel(grid=grid, mean=mean, sigma=sigma, op=op, spec=spec)


def joint_moments(model: JointGaussianModel) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the stacked vector [x, Xr, Xi].

    Blocks are laid out in that order; the covariance is the congruence
    of the temporal covariance by [I, Wr, Wi], hence symmetric and of
    the same rank as the temporal covariance.
    """
    wr, wi = model.op.real_part, model.op.imag_part
    m, sigma = model.mean, model.sigma
    mean = np.concatenate([m, wr.T @ m, wi.T @ m])
    s_wr = sigma @ wr
    s_wi = sigma @ wi
    cov = np.block(
        [
            [sigma, s_wr, s_wi],
            [s_wr.T, wr.T @ s_wr, wr.T @ s_wi],
            [s_wi.T, wi.T @ s_wr, wi.T @ s_wi],
        ]
    )
    return mean, 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class CovarianceBlocks:
    """Named blocks of the joint covariance.

    ``real_cov``/``imag_cov`` are the marginal spectrum covariances
    (even/odd in each frequency argument under index negation);
    ``time_real_cov``/``time_imag_cov`` are the cross-covariances
    between the signal and each spectrum part.
    """

    real_cov: np.ndarray
    imag_cov: np.ndarray
    time_real_cov: np.ndarray
    time_imag_cov: np.ndarray


def covariance_blocks(model: JointGaussianModel) -> CovarianceBlocks:
    wr, wi = model.op.real_part, model.op.imag_part
    s_wr = model.sigma @ wr
    s_wi = model.sigma @ wi
    return CovarianceBlocks(
        real_cov=wr.T @ s_wr,
        imag_cov=wi.T @ s_wi,
        time_real_cov=s_wr,
        time_imag_cov=s_wi,
    )


@dataclass(frozen=True)
class FourierPairSample:
    """One draw of the signal together with its deterministic spectrum."""

    signal: np.ndarray
    spectrum: SpectrumPair


def sample_signals(
    model: JointGaussianModel, count: int, seed: int | list[int]
) -> np.ndarray:
    """Draw ``count`` signals as rows of a (count, N) array.

    Stream-splitting rule: a single generator seeded with ``seed``
    produces a (count, N) standard-normal block in one call; row i is
    sample i. Fixed seeds give bitwise-identical output.
    """
    if count < 1:
        raise InvalidInputError(f"count must be >= 1, got {count}")
    factor = jittered_cholesky(model.sigma)
    z = np.random.default_rng(seed).standard_normal((count, model.size))
    return model.mean[None, :] + z @ factor.matrix.T


def sample_pair(model: JointGaussianModel, seed: int | list[int]) -> FourierPairSample:
    """Hierarchical draw: sample the signal, then transform it.

    The spectrum given the signal is a point mass at the transform, so
    coupling is exact by construction.
    """
    x = sample_signals(model, 1, seed)[0]
    return FourierPairSample(signal=x, spectrum=forward(model.op, x))


@dataclass(frozen=True)
class PowerSpectrumSummary:
    """Monte Carlo power spectrum: per-sample powers plus summaries.

    ``lower``/``upper`` are the pointwise 2.5 / 97.5 empirical
    percentiles with linear interpolation.
    """

    samples: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix via its eigenbasis.

    Posterior covariances can be degenerate with roundoff-negative
    eigenvalues whose magnitude tracks the prior scale, not the (often
    tiny) posterior diagonal, so a relative jitter ladder cannot rescue
    a Cholesky here. Negatives within the absolute PSD roundoff budget
    (1e-8, scaled up for large covariances) are clipped to zero.
    """
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-8 * max(1.0, w.max()):
        raise NumericalError(
            f"matrix is too indefinite to sample from (min eigenvalue {w.min():.3e})"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))


def power_spectrum_samples(
    source,
    count: int = 1000,
    seed: int | list[int] = 0,
    op=None,
) -> PowerSpectrumSummary:
    """Sample per-frequency power ``p_k = Xr_k**2 + Xi_k**2``.

    ``source`` is either a :class:`JointGaussianModel` (prior power), a
    posterior result exposing a ``time`` block (posterior power), or an
    explicit ``(mean, covariance)`` pair over the signal. Sampling always
    goes through the signal domain and pushes each draw through the
    transform: the spectrum is a deterministic function of the signal,
    so this is exact and avoids factorizing a rank-deficient spectral
    covariance.
    """
    if count < 1:
        raise InvalidInputError(f"count must be >= 1, got {count}")
    if isinstance(source, JointGaussianModel):
        mean, cov, op = source.mean, source.sigma, source.op
    elif hasattr(source, "block_mean"):
        if op is None:
            raise InvalidInputError("op is required when sampling from a posterior")
        mean = source.block_mean("time")
        cov = source.block_cov("time")
    else:
        mean, cov = source
        if op is None:
            raise InvalidInputError("op is required with explicit moments")
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
    if mean.shape != (op.size,) or cov.shape != (op.size, op.size):
        raise InvalidInputError("moments do not match the operator size")

    root = _psd_sqrt(cov)
    z = np.random.default_rng(seed).standard_normal((count, op.size))
    signals = mean[None, :] + z @ root.T
    real = signals @ op.real_part
    imag = signals @ op.imag_part
    powers = real**2 + imag**2
    lower, upper = np.percentile(powers, [2.5, 97.5], axis=0)
    return PowerSpectrumSummary(
        samples=powers, mean=powers.mean(axis=0), lower=lower, upper=upper
    )
