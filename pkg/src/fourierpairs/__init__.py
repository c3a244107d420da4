"""Joint Gaussian modelling of signals and their DFT spectra.

A multivariate normal prior on a discrete-time signal induces, through
the linear Fourier transform, a joint Gaussian over the signal and both
parts of its spectrum. Partial, noise-corrupted observations from
either domain then update every representation in closed form, with
calibrated uncertainty. The package ships the numerical core, a small
HTTP service wrapping it, and a command-line client.
"""

from .baseline import IrregularSamples, lomb_scargle
from .errors import (
    FourierPairsError,
    InvalidInputError,
    NumericalError,
    ResourceLimitError,
)
from .fourier import (
    FourierOperator,
    FourierOperator2D,
    SpectrumPair,
    build_operator,
    build_operator_2d,
    forward,
    inverse,
)
from .inference import (
    PosteriorResult,
    TrainingConfig,
    TrainingReport,
    log_likelihood,
    posterior,
    spectral_covariance_woodbury,
    spectral_posterior_given_time,
    temporal_posterior_given_spectrum,
    train,
)
from .kernels import (
    KernelSpec,
    PERIODIC,
    SQUARED_EXPONENTIAL,
    TimeGrid,
    build_covariance,
    jittered_cholesky,
)
from .metrics import kl_divergence, l01, nmse
from .model import (
    CovarianceBlocks,
    FourierPairSample,
    JointGaussianModel,
    PowerSpectrumSummary,
    build_model,
    build_model_2d,
    covariance_blocks,
    joint_moments,
    power_spectrum_samples,
    sample_pair,
    sample_signals,
)
from .observation import (
    ObservationSet,
    SelectionMatrix,
    SpectralObservations,
    TemporalObservations,
    assemble,
    corrupt,
    fraction_to_count,
    make_selection,
)

__version__ = "0.1.0"

__all__ = [
    "FourierPairsError",
    "InvalidInputError",
    "NumericalError",
    "ResourceLimitError",
    "TimeGrid",
    "KernelSpec",
    "SQUARED_EXPONENTIAL",
    "PERIODIC",
    "build_covariance",
    "jittered_cholesky",
    "FourierOperator",
    "FourierOperator2D",
    "SpectrumPair",
    "build_operator",
    "build_operator_2d",
    "forward",
    "inverse",
    "JointGaussianModel",
    "CovarianceBlocks",
    "FourierPairSample",
    "PowerSpectrumSummary",
    "build_model",
    "build_model_2d",
    "joint_moments",
    "covariance_blocks",
    "sample_pair",
    "sample_signals",
    "power_spectrum_samples",
    "SelectionMatrix",
    "TemporalObservations",
    "SpectralObservations",
    "ObservationSet",
    "make_selection",
    "assemble",
    "corrupt",
    "fraction_to_count",
    "PosteriorResult",
    "TrainingConfig",
    "TrainingReport",
    "log_likelihood",
    "posterior",
    "spectral_posterior_given_time",
    "spectral_covariance_woodbury",
    "temporal_posterior_given_spectrum",
    "train",
    "nmse",
    "l01",
    "kl_divergence",
    "IrregularSamples",
    "lomb_scargle",
]
