"""Request/response models for the reconstruction service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..kernels import KernelSpec, TimeGrid


class KernelModel(BaseModel):
    family: Literal["squared_exponential", "periodic"]
    sigma2: float
    alpha: float
    beta: Optional[float] = None

    def to_spec(self) -> KernelSpec:
        return KernelSpec(
            family=self.family, sigma2=self.sigma2, alpha=self.alpha, beta=self.beta
        )

    @classmethod
    def from_spec(cls, spec: KernelSpec) -> "KernelModel":
        return cls(**spec.to_dict())


class GridModel(BaseModel):
    size: int = Field(ge=2)
    start: float = 0.0
    stop: float = 1.0

    def to_grid(self) -> TimeGrid:
        return TimeGrid.regular(self.size, self.start, self.stop)


class ObservationSpecModel(BaseModel):
    """How to synthesize observations from a sampled truth.

    Explicit index lists override the fractions for their domain.
    """

    time_fraction: float = 0.02
    freq_fraction: float = 0.02
    sigma2_time: float = 0.2
    sigma2_freq: float = 0.2
    time_indices: Optional[list[int]] = None
    freq_indices: Optional[list[int]] = None


class SampleRequest(BaseModel):
    kernel: KernelModel
    grid: GridModel
    seed: int = 0


class SampleResponse(BaseModel):
    files: dict[str, str]
    size: int
    seed: int


class ReconstructRequest(BaseModel):
    kernel: KernelModel
    grid: GridModel
    observations_csv: Optional[str] = None
    truth_csv: Optional[str] = None
    synthesize: bool = False
    observation: ObservationSpecModel = ObservationSpecModel()
    seed: int = 0


class ReconstructResponse(BaseModel):
    files: dict[str, str]
    observed_rows: int
    metrics: Optional[dict[str, str]] = None


class PeriodicityRequest(BaseModel):
    seed: int = 0
    size: int = Field(default=256, ge=8)
    start: float = 0.0
    stop: float = 10.0
    observation_count: int = 52
    sigma2_time: float = 0.25
    power_samples: int = Field(default=1000, ge=1)
    restarts: int = Field(default=5, ge=1)
    max_iterations: int = Field(default=300, ge=1)
    ls_grid_size: int = Field(default=256, ge=8)


class PeakModel(BaseModel):
    source: str
    frequency: str
    power: str


class PeriodicityResponse(BaseModel):
    files: dict[str, str]
    peaks: list[PeakModel]
    trained_kernel: KernelModel
    converged: bool


class TrainRequest(BaseModel):
    kernel: KernelModel
    grid: GridModel
    observations_csv: str
    restarts: int = Field(default=5, ge=1)
    max_iterations: int = Field(default=500, ge=1)
    seed: int = 0
    train_time_noise: bool = False
    train_freq_noise: bool = False


class TrainResponse(BaseModel):
    files: dict[str, str]
    final_kernel: KernelModel
    converged: bool
    iterations: int
    initial_log_likelihood: str
    log_likelihood: str


class MetricsRequest(BaseModel):
    truth_csv: str
    estimate_csv: str
    kind: Literal["series", "psd"] = "psd"


class MetricsResponse(BaseModel):
    files: dict[str, str]
    rows: dict[str, str]


class Reconstruct2DRequest(BaseModel):
    kernel: KernelModel
    side: int = Field(ge=2)
    mask_csv: Optional[str] = None
    spectrum_obs_csv: Optional[str] = None
    synthesize: bool = False
    coverage: float = 0.54
    sigma2_freq: float = 0.0
    seed: int = 0


class Reconstruct2DResponse(BaseModel):
    files: dict[str, str]
    side: int
    observed_frequencies: int
    metrics: Optional[dict[str, str]] = None


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    kind: Literal["validation", "numerical", "io"]
    message: str
