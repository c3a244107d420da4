"""Classical Lomb-Scargle periodogram for irregularly sampled data.

The sinusoid dictionary is orthogonalised per frequency through the
usual delay factor, and the input is mean-subtracted. Power is the
classical unnormalized form (no floating mean, no PSD rescaling), which
is what the peak-location comparisons here need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class IrregularSamples:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 4:
            raise InvalidInputError(f"need at least 4 samples, got {t.size}")
        if v.shape != t.shape:
            raise InvalidInputError(
                f"times and values disagree: {t.shape} vs {v.shape}"
            )
        if not np.all(np.diff(t) > 0):
            raise InvalidInputError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def default_frequency_grid(count: int = 256, upper: float = 4.0 / np.pi) -> np.ndarray:
    """Evenly spaced comparison grid of ``count`` frequencies on (0, upper].

    Zero is excluded: the mean-subtracted periodogram is undefined there.
    """
    if count < 1 or upper <= 0:
        raise InvalidInputError("frequency grid needs count >= 1 and upper > 0")
    return np.linspace(0.0, upper, count + 1)[1:]


def lomb_scargle(samples: IrregularSamples, frequencies) -> np.ndarray:
    """Periodogram power at each frequency (cycles per time unit)."""
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise InvalidInputError("frequencies must be a non-empty 1D vector")
    if np.any(freqs <= 0):
        raise InvalidInputError("frequencies must be strictly positive")

    t = samples.times
    y = samples.values - samples.values.mean()
    omega = 2.0 * np.pi * freqs[:, None]

    # per-frequency delay makes the cosine/sine columns orthogonal
    tau = np.arctan2(
        np.sin(2.0 * omega * t[None, :]).sum(axis=1),
        np.cos(2.0 * omega * t[None, :]).sum(axis=1),
    ) / (2.0 * omega[:, 0])
    phase = omega * (t[None, :] - tau[:, None])
    cos_p = np.cos(phase)
    sin_p = np.sin(phase)

    cos_num = (y[None, :] * cos_p).sum(axis=1) ** 2
    sin_num = (y[None, :] * sin_p).sum(axis=1) ** 2
    cos_den = (cos_p * cos_p).sum(axis=1)
    sin_den = (sin_p * sin_p).sum(axis=1)

    power = 0.5 * np.divide(
        cos_num, cos_den, out=np.zeros_like(cos_num), where=cos_den > 1e-300
    )
    power += 0.5 * np.divide(
        sin_num, sin_den, out=np.zeros_like(sin_num), where=sin_den > 1e-300
    )
    return power
