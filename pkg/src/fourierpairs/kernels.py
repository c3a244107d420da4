"""Temporal covariance construction.

Two kernel families are supported:

* squared exponential, ``k(t, t') = sigma2 * exp(-alpha * (t - t')**2)``,
  which favours smooth, low-frequency signals; and
* periodic, ``k(t, t') = sigma2 * exp(-alpha * sin(beta * |t - t'|)**2)``,
  which encodes exact repetition with angular frequency ``beta``
  (period ``pi / beta`` in the units of the grid).

The rate ``alpha`` is expressed in the units of the grid supplied:
rescaling every time stamp by a factor ``c`` is equivalent to dividing
``alpha`` by ``c**2``, so a kernel stated on sample indices and the same
kernel stated on a unit interval are one and the same after rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError

SQUARED_EXPONENTIAL = "squared_exponential"
PERIODIC = "periodic"
KERNEL_FAMILIES = (SQUARED_EXPONENTIAL, PERIODIC)

# Relative jitter ladder used when a factorization fails: start four
# decades above double-precision noise and never exceed 1e-4 of the
# marginal variance scale.
JITTER_FLOOR = 1e-10
JITTER_CAP = 1e-4


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample locations shared by all operators."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidInputError(
                f"time grid needs at least 2 points, got shape {pts.shape}"
            )
        if not np.all(np.diff(pts) > 0):
            raise InvalidInputError("time grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        """Mean spacing; exact step for evenly sampled grids."""
        return float((self.points[-1] - self.points[0]) / (self.size - 1))

    @classmethod
    def regular(cls, size: int, start: float = 0.0, stop: float = 1.0) -> "TimeGrid":
        """Evenly sampled grid of ``size`` points spanning [start, stop]."""
        if size < 2:
            raise InvalidInputError(f"grid size must be >= 2, got {size}")
        return cls(np.linspace(float(start), float(stop), int(size)))


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its hyperparameters.

    ``beta`` is only meaningful for the periodic family and must be left
    ``None`` for the squared exponential.
    """

    family: str
    sigma2: float
    alpha: float
    beta: float | None = None

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InvalidInputError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise InvalidInputError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise InvalidInputError(f"alpha must be finite and > 0, got {self.alpha}")
        if self.family == PERIODIC:
            if self.beta is None or not np.isfinite(self.beta) or self.beta <= 0:
                raise InvalidInputError(
                    f"periodic kernel needs beta > 0, got {self.beta}"
                )
        elif self.beta is not None:
            raise InvalidInputError("beta is only valid for the periodic family")

    def to_dict(self) -> dict:
        out = {"family": self.family, "sigma2": self.sigma2, "alpha": self.alpha}
        if self.beta is not None:
            out["beta"] = self.beta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        beta = data.get("beta")
        return cls(
            family=str(data["family"]),
            sigma2=float(data["sigma2"]),
            alpha=float(data["alpha"]),
            beta=None if beta is None else float(beta),
        )


def build_covariance(grid: TimeGrid, spec: KernelSpec) -> np.ndarray:
    """Evaluate the kernel on all grid pairs.

    Returns the dense symmetric matrix ``K[i, j] = k(t_i, t_j)`` with
    diagonal exactly ``sigma2``.
    """
    if not isinstance(grid, TimeGrid):
        raise InvalidInputError("grid must be a TimeGrid")
    if not isinstance(spec, KernelSpec):
        raise InvalidInputError("spec must be a KernelSpec")
    lags = grid.points[:, None] - grid.points[None, :]
    if spec.family == SQUARED_EXPONENTIAL:
        return spec.sigma2 * np.exp(-spec.alpha * lags * lags)
    sines = np.sin(spec.beta * np.abs(lags))
    return spec.sigma2 * np.exp(-spec.alpha * sines * sines)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor together with the diagonal shift it needed."""

    matrix: np.ndarray
    jitter: float

    def reconstruct(self) -> np.ndarray:
        return self.matrix @ self.matrix.T


def jittered_cholesky(sigma: np.ndarray, jitter: float = 0.0) -> CholeskyFactor:
    """Cholesky factorization with an escalating diagonal shift.

    The matrix is first attempted with the caller's ``jitter``. On failure
    the shift climbs by decades from ``1e-10 * scale`` up to
    ``1e-4 * scale``, where ``scale`` is the mean diagonal entry (the
    marginal variance for kernel matrices). An all-zero matrix factors to
    the all-zero matrix, the degenerate but exact answer.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {sigma.shape}")
    if jitter < 0:
        raise InvalidInputError(f"jitter must be >= 0, got {jitter}")
    if not sigma.any():
        return CholeskyFactor(np.zeros_like(sigma), 0.0)

    scale = float(np.mean(np.diagonal(sigma)))
    if scale <= 0:
        scale = float(np.abs(sigma).max())
    eye = np.eye(sigma.shape[0])

    ladder = [jitter]
    step = JITTER_FLOOR * scale
    cap = JITTER_CAP * scale
    while step <= cap:
        if step > jitter:
            ladder.append(step)
        step *= 10.0

    for shift in ladder:
        try:
            lower = np.linalg.cholesky(sigma + shift * eye)
        except np.linalg.LinAlgError:
            continue
        return CholeskyFactor(lower, shift)
    raise NumericalError(
        f"matrix is not positive definite even with jitter {cap:.3e}"
    )
