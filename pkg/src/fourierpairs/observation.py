"""Observation model: which latent entries are seen, and with what noise.

Observations live in two domains. Temporal observations pick entries of
the signal; spectral observations pick entries of both spectrum parts
(real and imaginary share the same selection). Noise is independent
white Gaussian per domain, so the stacked noise covariance is diagonal
with a three-block structure.

Selections are stored as index lists and applied as gathers; a dense
0/1 matrix is materialized only on request (tests, oracles).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .fourier import forward
from .model import FourierPairSample, JointGaussianModel


@dataclass(frozen=True)
class SelectionMatrix:
    """Index-list form of a 0/1 selection of latent entries."""

    size: int
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.ndim != 1:
            raise InvalidInputError("indices must be a 1D sequence")
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.size:
                raise InvalidInputError(
                    f"indices must lie in [0, {self.size}), got range "
                    f"[{idx.min()}, {idx.max()}]"
                )
            if not np.all(np.diff(idx) > 0):
                raise InvalidInputError("indices must be strictly increasing (sorted, unique)")
        object.__setattr__(self, "indices", idx)

    @property
    def count(self) -> int:
        return self.indices.size

    def dense(self) -> np.ndarray:
        """The N x M matrix with a single 1 per column."""
        out = np.zeros((self.size, self.count))
        out[self.indices, np.arange(self.count)] = 1.0
        return out

    def gather(self, values: np.ndarray) -> np.ndarray:
        """Apply the transposed selection: pick the observed entries."""
        return np.asarray(values)[..., self.indices]


def make_selection(size: int, indices) -> SelectionMatrix:
    return SelectionMatrix(size=int(size), indices=np.asarray(indices, dtype=int))


@dataclass(frozen=True)
class TemporalObservations:
    selection: SelectionMatrix
    values: np.ndarray
    noise_variance: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.selection.count,):
            raise InvalidInputError(
                f"temporal values shape {vals.shape} does not match "
                f"{self.selection.count} selected indices"
            )
        if self.noise_variance < 0 or not np.isfinite(self.noise_variance):
            raise InvalidInputError(
                f"noise variance must be finite and >= 0, got {self.noise_variance}"
            )
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SpectralObservations:
    """Real and imaginary observations sharing one frequency selection."""

    selection: SelectionMatrix
    real_values: np.ndarray
    imag_values: np.ndarray
    noise_variance: float

    def __post_init__(self):
        re = np.asarray(self.real_values, dtype=float)
        im = np.asarray(self.imag_values, dtype=float)
        m = self.selection.count
        if re.shape != (m,) or im.shape != (m,):
            raise InvalidInputError(
                f"spectral values shapes {re.shape}/{im.shape} do not match "
                f"{m} selected frequencies"
            )
        if self.noise_variance < 0 or not np.isfinite(self.noise_variance):
            raise InvalidInputError(
                f"noise variance must be finite and >= 0, got {self.noise_variance}"
            )
        object.__setattr__(self, "real_values", re)
        object.__setattr__(self, "imag_values", im)


@dataclass(frozen=True)
class ObservationSet:
    """Observations from either or both domains; either side may be empty."""

    temporal: TemporalObservations | None = None
    spectral: SpectralObservations | None = None

    def __post_init__(self):
        if self.temporal is not None and self.spectral is not None:
            if self.temporal.selection.size != self.spectral.selection.size:
                raise InvalidInputError(
                    "temporal and spectral selections disagree on the latent size"
                )

    @property
    def is_empty(self) -> bool:
        t = self.temporal is None or self.temporal.selection.count == 0
        f = self.spectral is None or self.spectral.selection.count == 0
        return t and f

    @property
    def temporal_count(self) -> int:
        return 0 if self.temporal is None else self.temporal.selection.count

    @property
    def spectral_count(self) -> int:
        return 0 if self.spectral is None else self.spectral.selection.count

    @property
    def row_count(self) -> int:
        return self.temporal_count + 2 * self.spectral_count


@dataclass(frozen=True)
class AugmentedSystem:
    """Stacked linear observation system Y = matrix @ x + noise.

    Rows are ordered [temporal, spectral-real, spectral-imag]. ``noise``
    is the diagonal of the observation noise covariance.
    """

    matrix: np.ndarray
    noise: np.ndarray
    values: np.ndarray

    def dense_noise(self) -> np.ndarray:
        return np.diag(self.noise)


def assemble(model: JointGaussianModel, obs: ObservationSet) -> AugmentedSystem:
    """Build the dense observation rows by gathering operator rows."""
    n = model.size
    blocks, noises, values = [], [], []
    if obs.temporal is not None and obs.temporal.selection.count:
        sel = obs.temporal.selection
        if sel.size != n:
            raise InvalidInputError(
                f"temporal selection is over {sel.size} entries, model has {n}"
            )
        rows = np.zeros((sel.count, n))
        rows[np.arange(sel.count), sel.indices] = 1.0
        blocks.append(rows)
        noises.append(np.full(sel.count, obs.temporal.noise_variance))
        values.append(obs.temporal.values)
    if obs.spectral is not None and obs.spectral.selection.count:
        sel = obs.spectral.selection
        if sel.size != n:
            raise InvalidInputError(
                f"spectral selection is over {sel.size} entries, model has {n}"
            )
        blocks.append(model.op.real_part.T[sel.indices, :])
        blocks.append(model.op.imag_part.T[sel.indices, :])
        noises.append(np.full(2 * sel.count, obs.spectral.noise_variance))
        values.append(obs.spectral.real_values)
        values.append(obs.spectral.imag_values)
    if not blocks:
        raise InvalidInputError("observation set is empty")
    return AugmentedSystem(
        matrix=np.vstack(blocks),
        noise=np.concatenate(noises),
        values=np.concatenate(values),
    )


def apply_observation(model: JointGaussianModel, obs: ObservationSet, x: np.ndarray) -> np.ndarray:
    """Noiseless observation of a known signal, via gathers only.

    Independent of :func:`assemble`'s dense rows; the two paths must
    agree, which the tests exercise.
    """
    x = np.asarray(x, dtype=float)
    parts = []
    if obs.temporal is not None and obs.temporal.selection.count:
        parts.append(obs.temporal.selection.gather(x))
    if obs.spectral is not None and obs.spectral.selection.count:
        spectrum = forward(model.op, x)
        parts.append(obs.spectral.selection.gather(spectrum.real))
        parts.append(obs.spectral.selection.gather(spectrum.imag))
    if not parts:
        raise InvalidInputError("observation set is empty")
    return np.concatenate(parts)


def fraction_to_count(size: int, fraction: float) -> int:
    """Observed count for 'a fraction of N': floor, but at least one."""
    if not 0 < fraction <= 1:
        raise InvalidInputError(f"fraction must be in (0, 1], got {fraction}")
    return max(1, int(np.floor(fraction * size)))


def corrupt(
    truth: FourierPairSample,
    temporal_indices,
    spectral_indices,
    sigma2_time: float,
    sigma2_freq: float,
    seed: int | list[int],
) -> ObservationSet:
    """Observe a known pair at the given indices under white noise.

    Noise draws come from one generator seeded with ``seed`` in the
    fixed order temporal, spectral-real, spectral-imag, so results are
    reproducible.
    """
    n = truth.signal.size
    rng = np.random.default_rng(seed)
    temporal = None
    spectral = None
    t_idx = np.asarray(temporal_indices, dtype=int)
    f_idx = np.asarray(spectral_indices, dtype=int)
    if t_idx.size:
        sel = make_selection(n, t_idx)
        y = sel.gather(truth.signal) + np.sqrt(sigma2_time) * rng.standard_normal(sel.count)
        temporal = TemporalObservations(sel, y, sigma2_time)
    if f_idx.size:
        sel = make_selection(n, f_idx)
        yr = sel.gather(truth.spectrum.real) + np.sqrt(sigma2_freq) * rng.standard_normal(sel.count)
        yi = sel.gather(truth.spectrum.imag) + np.sqrt(sigma2_freq) * rng.standard_normal(sel.count)
        spectral = SpectralObservations(sel, yr, yi, sigma2_freq)
    return ObservationSet(temporal=temporal, spectral=spectral)
