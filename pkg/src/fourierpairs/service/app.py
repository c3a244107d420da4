"""FastAPI application wrapping the experiment pipelines.

Every endpoint is a thin translation between the request model and the
corresponding runner in :mod:`fourierpairs.experiments`; responses carry
the rendered output files so clients decide where (and whether) to
write them. Errors are reported as a typed envelope the CLI maps onto
exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, experiments
from ..errors import InvalidInputError, NumericalError
from . import schemas


def handle_sample(req: schemas.SampleRequest) -> schemas.SampleResponse:
    result = experiments.run_sample(
        req.kernel.to_spec(), req.grid.to_grid(), seed=req.seed
    )
    return schemas.SampleResponse(files=result.files, **result.summary)


def handle_reconstruct(req: schemas.ReconstructRequest) -> schemas.ReconstructResponse:
    result = experiments.run_reconstruct(
        req.kernel.to_spec(),
        req.grid.to_grid(),
        observations_csv=req.observations_csv,
        truth_csv=req.truth_csv,
        synthesize=req.synthesize,
        time_fraction=req.observation.time_fraction,
        freq_fraction=req.observation.freq_fraction,
        sigma2_time=req.observation.sigma2_time,
        sigma2_freq=req.observation.sigma2_freq,
        time_indices=req.observation.time_indices,
        freq_indices=req.observation.freq_indices,
        seed=req.seed,
    )
    return schemas.ReconstructResponse(
        files=result.files,
        observed_rows=result.summary["observed_rows"],
        metrics=result.summary["metrics"],
    )


def handle_periodicity(req: schemas.PeriodicityRequest) -> schemas.PeriodicityResponse:
    result = experiments.run_periodicity(
        seed=req.seed,
        size=req.size,
        start=req.start,
        stop=req.stop,
        observation_count=req.observation_count,
        sigma2_time=req.sigma2_time,
        power_samples=req.power_samples,
        restarts=req.restarts,
        max_iterations=req.max_iterations,
        ls_grid_size=req.ls_grid_size,
    )
    return schemas.PeriodicityResponse(
        files=result.files,
        peaks=[schemas.PeakModel(**peak) for peak in result.summary["peaks"]],
        trained_kernel=schemas.KernelModel(**result.summary["trained_kernel"]),
        converged=result.summary["converged"],
    )


def handle_train(req: schemas.TrainRequest) -> schemas.TrainResponse:
    result = experiments.run_train(
        req.kernel.to_spec(),
        req.grid.to_grid(),
        req.observations_csv,
        restarts=req.restarts,
        max_iterations=req.max_iterations,
        seed=req.seed,
        train_time_noise=req.train_time_noise,
        train_freq_noise=req.train_freq_noise,
    )
    return schemas.TrainResponse(
        files=result.files,
        final_kernel=schemas.KernelModel(**result.summary["final_kernel"]),
        converged=result.summary["converged"],
        iterations=result.summary["iterations"],
        initial_log_likelihood=result.summary["initial_log_likelihood"],
        log_likelihood=result.summary["log_likelihood"],
    )


def handle_metrics(req: schemas.MetricsRequest) -> schemas.MetricsResponse:
    result = experiments.run_metrics(req.truth_csv, req.estimate_csv, kind=req.kind)
    return schemas.MetricsResponse(files=result.files, rows=result.summary["rows"])


def handle_reconstruct2d(
    req: schemas.Reconstruct2DRequest,
) -> schemas.Reconstruct2DResponse:
    result = experiments.run_reconstruct2d(
        req.kernel.to_spec(),
        req.side,
        mask_csv=req.mask_csv,
        spectrum_obs_csv=req.spectrum_obs_csv,
        synthesize=req.synthesize,
        coverage=req.coverage,
        sigma2_freq=req.sigma2_freq,
        seed=req.seed,
    )
    return schemas.Reconstruct2DResponse(files=result.files, **result.summary)


ENDPOINTS = {
    "/sample": (schemas.SampleRequest, handle_sample),
    "/reconstruct": (schemas.ReconstructRequest, handle_reconstruct),
    "/reconstruct2d": (schemas.Reconstruct2DRequest, handle_reconstruct2d),
    "/periodicity": (schemas.PeriodicityRequest, handle_periodicity),
    "/train": (schemas.TrainRequest, handle_train),
    "/metrics": (schemas.MetricsRequest, handle_metrics),
}


def dispatch(path: str, payload: dict) -> dict:
    """Run an endpoint in-process: same models, same handler, no HTTP."""
    if path not in ENDPOINTS:
        raise InvalidInputError(f"unknown endpoint {path!r}")
    request_model, handler = ENDPOINTS[path]
    return handler(request_model.model_validate(payload)).model_dump()


def create_app() -> FastAPI:
    app = FastAPI(title="fourierpairs service", version=__version__)

    @app.exception_handler(InvalidInputError)
    async def _invalid(request: Request, exc: InvalidInputError):
        body = schemas.ErrorBody(kind="validation", message=str(exc))
        return JSONResponse(status_code=400, content={"error": body.model_dump()})

    @app.exception_handler(NumericalError)
    async def _numerical(request: Request, exc: NumericalError):
        body = schemas.ErrorBody(kind="numerical", message=str(exc))
        return JSONResponse(status_code=500, content={"error": body.model_dump()})

    @app.exception_handler(OSError)
    async def _io(request: Request, exc: OSError):
        body = schemas.ErrorBody(kind="io", message=str(exc))
        return JSONResponse(status_code=500, content={"error": body.model_dump()})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/sample", response_model=schemas.SampleResponse)
    def sample(req: schemas.SampleRequest):
        return handle_sample(req)

    @app.post("/reconstruct", response_model=schemas.ReconstructResponse)
    def reconstruct(req: schemas.ReconstructRequest):
        return handle_reconstruct(req)

    @app.post("/reconstruct2d", response_model=schemas.Reconstruct2DResponse)
    def reconstruct2d(req: schemas.Reconstruct2DRequest):
        return handle_reconstruct2d(req)

    @app.post("/periodicity", response_model=schemas.PeriodicityResponse)
    def periodicity(req: schemas.PeriodicityRequest):
        return handle_periodicity(req)

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        return handle_train(req)

    @app.post("/metrics", response_model=schemas.MetricsResponse)
    def metrics(req: schemas.MetricsRequest):
        return handle_metrics(req)

    return app


app = create_app()
