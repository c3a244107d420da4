"""Evaluation metrics for temporal/spectral estimates and power spectra."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def _pair(truth, estimate) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(truth, dtype=float)
    e = np.asarray(estimate, dtype=float)
    if t.shape != e.shape or t.ndim != 1:
        raise InvalidInputError(
            f"metric inputs must be equal-length vectors, got {t.shape} and {e.shape}"
        )
    return t, e


def nmse(truth, estimate) -> float:
    """Squared error normalized by the squared norm of the truth.

    Saturates to ``inf`` when the truth norm underflows relative to the
    error (the normalization is then meaningless but well defined).
    """
    t, e = _pair(truth, estimate)
    denom = float(np.sum(t * t))
    if denom == 0.0:
        raise InvalidInputError("nmse is undefined for an identically zero truth")
    with np.errstate(over="ignore"):
        return float(np.sum((t - e) ** 2) / denom)


def l01(p, phat) -> float:
    """Fractional-power error, (1/K) * (sum_k |p_k - phat_k|**0.1)**10.

    The small exponent counts deviations more than it sizes them;
    the 1/K factor is applied outside the tenth power, exactly in the
    displayed order.
    """
    a, b = _pair(p, phat)
    return float(np.sum(np.abs(a - b) ** 0.1) ** 10 / a.size)


def kl_divergence(p, phat, floor: float = 0.0) -> float:
    """KL divergence between power spectra, natural log.

    Both inputs are normalized to sum to one internally, so callers pass
    raw power. Zero reference entries contribute nothing; a positive
    reference entry over a zero estimate entry is infinitely penalised
    and the divergence is ``+inf``. ``floor`` optionally lifts estimate
    entries before normalization (off by default) for benchmarking
    sweeps where infinities are unhelpful.
    """
    a, b = _pair(p, phat)
    if np.any(a < 0) or np.any(b < 0):
        raise InvalidInputError("power spectra must be nonnegative")
    if floor > 0:
        b = np.maximum(b, floor)
    ta, tb = a.sum(), b.sum()
    if ta == 0.0 or tb == 0.0:
        raise InvalidInputError("power spectra must not be identically zero")
    a = a / ta
    b = b / tb
    support = a > 0
    if np.any(b[support] == 0.0):
        return float("inf")
    return float(np.sum(a[support] * np.log(a[support] / b[support])))
