"""Dense real/imaginary DFT operators in one and two dimensions.

The transform is the symmetric 1/sqrt(N) normalization. Keeping the
cosine and sine parts as separate real matrices avoids complex-valued
random variables entirely: a real signal ``x`` maps to the pair
``(real_part.T @ x, imag_part.T @ x)``.

No FFT is used on purpose: the posterior algebra downstream is built
from dense O(N^3) solves, so the operator matrices are needed
explicitly and FFT savings would be immaterial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResourceLimitError

MAX_2D_SIDE = 64


def signed_frequency_indices(size: int) -> np.ndarray:
    """Map DFT column k = 0..N-1 to the signed index in [-N//2, ceil(N/2))."""
    k = np.arange(size)
    return np.where(k < (size + 1) // 2, k, k - size)


@dataclass(frozen=True)
class FourierOperator:
    """Real and imaginary parts of the unitary DFT matrix.

    ``real_part[n, k] = cos(2 pi n k / N) / sqrt(N)`` and
    ``imag_part[n, k] = -sin(2 pi n k / N) / sqrt(N)``.
    """

    size: int
    real_part: np.ndarray
    imag_part: np.ndarray
    freq_index: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        """Signed frequency index per DFT column (cycles per N samples)."""
        return self.freq_index


@dataclass(frozen=True)
class SpectrumPair:
    """Real and imaginary spectrum vectors of a real signal."""

    real: np.ndarray
    imag: np.ndarray

    def __post_init__(self):
        re = np.asarray(self.real, dtype=float)
        im = np.asarray(self.imag, dtype=float)
        if re.shape != im.shape or re.ndim != 1:
            raise InvalidInputError(
                f"spectrum parts must be equal-length vectors, got {re.shape} and {im.shape}"
            )
        object.__setattr__(self, "real", re)
        object.__setattr__(self, "imag", im)

    @property
    def size(self) -> int:
        return self.real.size

    @property
    def power(self) -> np.ndarray:
        return self.real**2 + self.imag**2


def build_operator(size: int) -> FourierOperator:
    """Construct the dense N x N operator pair.

    Columns above the Nyquist index are mirrored from the lower half
    (cosine copied, sine negated), which keeps the even/odd column
    structure exact in floating point rather than merely close.
    """
    if size < 2:
        raise InvalidInputError(f"transform length must be >= 2, got {size}")
    n = np.arange(size)
    half = size // 2
    angles = 2.0 * np.pi * ((n[:, None] * n[None, : half + 1]) % size) / size
    scale = 1.0 / np.sqrt(size)
    real = np.empty((size, size))
    imag = np.empty((size, size))
    real[:, : half + 1] = np.cos(angles) * scale
    imag[:, : half + 1] = -np.sin(angles) * scale
    imag[:, 0] = 0.0
    if size % 2 == 0:
        imag[:, half] = 0.0  # sin(pi * n) is identically zero
    for k in range(half + 1, size):
        real[:, k] = real[:, size - k]
        imag[:, k] = -imag[:, size - k]
    return FourierOperator(
        size=size,
        real_part=real,
        imag_part=imag,
        freq_index=signed_frequency_indices(size),
    )


def forward(op, x: np.ndarray) -> SpectrumPair:
    """Transform a real signal to its spectrum pair."""
    x = np.asarray(x, dtype=float)
    if x.shape != (op.size,):
        raise InvalidInputError(
            f"signal length {x.shape} does not match operator size {op.size}"
        )
    return SpectrumPair(real=op.real_part.T @ x, imag=op.imag_part.T @ x)


def inverse(op, spectrum: SpectrumPair) -> np.ndarray:
    """Recover the signal from its spectrum pair.

    Uses unitarity: ``x = real_part @ Xr + imag_part @ Xi``. For pairs
    that did not come from a real signal this returns the real-signal
    projection.
    """
    if spectrum.size != op.size:
        raise InvalidInputError(
            f"spectrum length {spectrum.size} does not match operator size {op.size}"
        )
    return op.real_part @ spectrum.real + op.imag_part @ spectrum.imag


@dataclass(frozen=True)
class FourierOperator2D:
    """Vectorized 2D DFT operator built from Kronecker products.

    Acts on images flattened in row-major order; ``size`` is the number
    of pixels (side squared). ``freq_pairs[j]`` holds the signed
    (row, column) frequency indices of vectorized spectrum entry j.
    """

    side: int
    size: int
    real_part: np.ndarray
    imag_part: np.ndarray
    freq_pairs: np.ndarray


def build_operator_2d(side: int) -> FourierOperator2D:
    """Kronecker expansion of the 2D transform ``W^T @ image @ W``.

    The dense pair is side^2 x side^2, so the practical bound is
    side <= 64 (about 270 MB for the two matrices at the limit).
    """
    if side < 2:
        raise InvalidInputError(f"image side must be >= 2, got {side}")
    if side > MAX_2D_SIDE:
        raise ResourceLimitError(
            f"dense 2D operator supports side <= {MAX_2D_SIDE}, got {side}"
        )
    base = build_operator(side)
    wr, wi = base.real_part, base.imag_part
    real = np.kron(wr, wr) - np.kron(wi, wi)
    imag = np.kron(wr, wi) + np.kron(wi, wr)
    signed = base.freq_index
    pairs = np.stack(
        [np.repeat(signed, side), np.tile(signed, side)], axis=1
    )
    return FourierOperator2D(
        side=side, size=side * side, real_part=real, imag_part=imag, freq_pairs=pairs
    )


def image_to_vec(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise InvalidInputError(f"expected a square image, got shape {image.shape}")
    return image.ravel()


def vec_to_image(values: np.ndarray, side: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (side * side,):
        raise InvalidInputError(
            f"vector of length {values.size} does not fold into {side}x{side}"
        )
    return values.reshape(side, side)
