"""Experiment pipelines behind the service endpoints and CLI commands.

Each runner validates its inputs, computes everything in memory and
returns the output files as rendered CSV text plus a small summary, so
callers only write files after the whole pipeline has succeeded. All
randomness is derived from the caller's seed; fixed seeds give
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import csvio
from .baseline import IrregularSamples, default_frequency_grid, lomb_scargle
from .errors import InvalidInputError
from .fourier import SpectrumPair, forward, signed_frequency_indices, vec_to_image
from .inference import TrainingConfig, TrainingReport, posterior, train
from .kernels import KernelSpec, TimeGrid
from .metrics import kl_divergence, l01, nmse
from .model import build_model, build_model_2d, power_spectrum_samples, sample_pair
from .observation import (
    ObservationSet,
    SpectralObservations,
    TemporalObservations,
    corrupt,
    fraction_to_count,
    make_selection,
)

MASK_HEADER = ("row", "col", "observed")
IMAGE_HEADER = ("row", "col", "value")
SPECTRUM_2D_OBS_HEADER = ("k_row", "k_col", "value_real", "value_imag", "noise_variance")
TIME_SERIES_HEADER = ("time", "value")
SPECTRUM_SAMPLE_HEADER = (
    "freq_index",
    "signed_freq_index",
    "frequency",
    "real",
    "imag",
    "power",
)
POWER_HEADER = ("freq_index", "frequency", "power_mean", "power_lower", "power_upper")
LS_HEADER = ("frequency", "power")
PEAK_HEADER = ("source", "frequency", "power")
TRACE_HEADER = ("evaluation", "best_log_likelihood")
REPORT_HEADER = ("field", "value")


@dataclass(frozen=True)
class ExperimentResult:
    files: dict[str, str]
    summary: dict


def grid_frequencies(grid: TimeGrid) -> np.ndarray:
    """Physical frequency of each signed DFT index, cycles per time unit."""
    return signed_frequency_indices(grid.size) / (grid.size * grid.spacing)


def _render_time_series(times, values) -> str:
    rows = (
        (csvio.format_float(t), csvio.format_float(v)) for t, v in zip(times, values)
    )
    return csvio.render_csv(TIME_SERIES_HEADER, rows)


def parse_time_series(text: str, grid: TimeGrid) -> np.ndarray:
    """Read a (time,value) file and check it sits on the model grid."""
    rows = csvio.split_rows(text, TIME_SERIES_HEADER, min_rows=1)
    if len(rows) != grid.size:
        raise InvalidInputError(
            f"expected {grid.size} rows matching the grid, got {len(rows)}"
        )
    values = np.empty(grid.size)
    for pos, (line, cells) in enumerate(rows):
        t = csvio.parse_float(cells[0], line)
        if not np.isclose(t, grid.points[pos], rtol=1e-9, atol=1e-12):
            raise InvalidInputError(
                f"line {line}: time {t} does not match grid point {grid.points[pos]}"
            )
        values[pos] = csvio.parse_float(cells[1], line)
    return values


def _render_spectrum_sample(grid: TimeGrid, spectrum: SpectrumPair) -> str:
    freqs = grid_frequencies(grid)
    signed = signed_frequency_indices(grid.size)
    rows = (
        (
            str(k),
            str(signed[k]),
            csvio.format_float(freqs[k]),
            csvio.format_float(spectrum.real[k]),
            csvio.format_float(spectrum.imag[k]),
            csvio.format_float(spectrum.real[k] ** 2 + spectrum.imag[k] ** 2),
        )
        for k in range(grid.size)
    )
    return csvio.render_csv(SPECTRUM_SAMPLE_HEADER, rows)


def run_sample(spec: KernelSpec, grid: TimeGrid, seed: int = 0) -> ExperimentResult:
    """Draw one signal/spectrum pair from the prior and export it."""
    model = build_model(grid, spec)
    pair = sample_pair(model, seed=seed)
    files = {
        "sample_time.csv": _render_time_series(grid.points, pair.signal),
        "sample_spectrum.csv": _render_spectrum_sample(grid, pair.spectrum),
    }
    return ExperimentResult(files=files, summary={"size": grid.size, "seed": seed})


def _posterior_files(post, prefix: str) -> dict[str, str]:
    files = {}
    if "time" in post.blocks:
        rows = csvio.render_posterior_rows(
            "time", post.block_mean("time"), post.block_std("time")
        )
        files[f"{prefix}_time.csv"] = csvio.render_csv(csvio.POSTERIOR_HEADER, rows)
    spec_rows = []
    for block in ("real", "imag"):
        if block in post.blocks:
            spec_rows.extend(
                csvio.render_posterior_rows(
                    block, post.block_mean(block), post.block_std(block)
                )
            )
    if spec_rows:
        files[f"{prefix}_spectrum.csv"] = csvio.render_csv(
            csvio.POSTERIOR_HEADER, spec_rows
        )
    return files


def synthesize_observations(
    spec: KernelSpec,
    grid: TimeGrid,
    time_fraction: float,
    freq_fraction: float,
    sigma2_time: float,
    sigma2_freq: float,
    seed: int,
    time_indices=None,
    freq_indices=None,
):
    """Sample a truth pair and observe each domain at random or given indices.

    Explicit index lists take precedence over the fractions; a fraction
    of zero (with no indices) leaves that domain unobserved.
    """
    model = build_model(grid, spec)
    pair = sample_pair(model, seed=seed)
    rng = np.random.default_rng([seed, 1])
    if time_indices is not None:
        t_idx = np.sort(np.asarray(time_indices, dtype=int))
    elif time_fraction > 0:
        count = fraction_to_count(grid.size, time_fraction)
        t_idx = np.sort(rng.choice(grid.size, count, replace=False))
    else:
        t_idx = []
    if freq_indices is not None:
        f_idx = np.sort(np.asarray(freq_indices, dtype=int))
    elif freq_fraction > 0:
        count = fraction_to_count(grid.size, freq_fraction)
        f_idx = np.sort(rng.choice(grid.size, count, replace=False))
    else:
        f_idx = []
    obs = corrupt(pair, t_idx, f_idx, sigma2_time, sigma2_freq, seed=[seed, 2])
    return pair, obs


def run_reconstruct(
    spec: KernelSpec,
    grid: TimeGrid,
    observations_csv: str | None = None,
    truth_csv: str | None = None,
    synthesize: bool = False,
    time_fraction: float = 0.02,
    freq_fraction: float = 0.02,
    sigma2_time: float = 0.2,
    sigma2_freq: float = 0.2,
    time_indices=None,
    freq_indices=None,
    seed: int = 0,
) -> ExperimentResult:
    """Posterior over signal and spectrum from observations in both domains.

    Either parse an observation file, or synthesize truth plus
    observations from the prior (the classic partial-observation study).
    A known truth adds error metrics over every representation.
    """
    if synthesize and observations_csv is not None:
        raise InvalidInputError("pass observations or synthesize, not both")
    files: dict[str, str] = {}
    truth = None
    if synthesize:
        pair, obs = synthesize_observations(
            spec,
            grid,
            time_fraction,
            freq_fraction,
            sigma2_time,
            sigma2_freq,
            seed,
            time_indices=time_indices,
            freq_indices=freq_indices,
        )
        truth = pair.signal
        files["truth_time.csv"] = _render_time_series(grid.points, truth)
        files["observations.csv"] = csvio.render_observations(obs)
    elif observations_csv is not None:
        obs = csvio.parse_observations(observations_csv, grid.size)
        if truth_csv is not None:
            truth = parse_time_series(truth_csv, grid)
    else:
        raise InvalidInputError("reconstruct needs observations or synthesize=True")

    model = build_model(grid, spec)
    post = posterior(model, obs, blocks=("time", "real", "imag"))
    files.update(_posterior_files(post, "posterior"))

    metric_rows = None
    if truth is not None:
        truth_spectrum = forward(model.op, truth)
        metric_rows = {
            "nmse_time": nmse(truth, post.block_mean("time")),
            "nmse_spectrum_real": nmse(truth_spectrum.real, post.block_mean("real")),
            "nmse_spectrum_imag": nmse(truth_spectrum.imag, post.block_mean("imag")),
        }
        files["metrics.csv"] = csvio.render_metrics(metric_rows)
    summary = {
        "size": grid.size,
        "observed_rows": obs.row_count,
        "metrics": None
        if metric_rows is None
        else {k: csvio.format_float(v) for k, v in metric_rows.items()},
    }
    return ExperimentResult(files=files, summary=summary)


def _training_files(report: TrainingReport, prefix: str = "training") -> dict[str, str]:
    fields = [
        ("initial_family", report.initial_spec.family),
        ("initial_sigma2", csvio.format_float(report.initial_spec.sigma2)),
        ("initial_alpha", csvio.format_float(report.initial_spec.alpha)),
    ]
    if report.initial_spec.beta is not None:
        fields.append(("initial_beta", csvio.format_float(report.initial_spec.beta)))
    fields += [
        ("final_family", report.final_spec.family),
        ("final_sigma2", csvio.format_float(report.final_spec.sigma2)),
        ("final_alpha", csvio.format_float(report.final_spec.alpha)),
    ]
    if report.final_spec.beta is not None:
        fields.append(("final_beta", csvio.format_float(report.final_spec.beta)))
    for label, value in (
        ("initial_noise_time", report.initial_noise[0]),
        ("initial_noise_freq", report.initial_noise[1]),
        ("final_noise_time", report.final_noise[0]),
        ("final_noise_freq", report.final_noise[1]),
    ):
        if value is not None:
            fields.append((label, csvio.format_float(value)))
    fields += [
        ("initial_log_likelihood", csvio.format_float(report.initial_log_likelihood)),
        ("final_log_likelihood", csvio.format_float(report.log_likelihood)),
        ("iterations", str(report.iterations)),
        ("converged", str(report.converged).lower()),
    ]
    trace_rows = (
        (str(i), csvio.format_float(v)) for i, v in enumerate(report.trace)
    )
    return {
        f"{prefix}_report.csv": csvio.render_csv(REPORT_HEADER, fields),
        f"{prefix}_trace.csv": csvio.render_csv(TRACE_HEADER, trace_rows),
    }


def run_train(
    spec: KernelSpec,
    grid: TimeGrid,
    observations_csv: str,
    restarts: int = 5,
    max_iterations: int = 500,
    seed: int = 0,
    train_time_noise: bool = False,
    train_freq_noise: bool = False,
) -> ExperimentResult:
    obs = csvio.parse_observations(observations_csv, grid.size)
    model = build_model(grid, spec)
    report = train(
        model,
        obs,
        TrainingConfig(
            restarts=restarts,
            max_iterations=max_iterations,
            seed=seed,
            train_time_noise=train_time_noise,
            train_freq_noise=train_freq_noise,
        ),
    )
    summary = {
        "final_kernel": report.final_spec.to_dict(),
        "converged": report.converged,
        "iterations": report.iterations,
        "initial_log_likelihood": csvio.format_float(report.initial_log_likelihood),
        "log_likelihood": csvio.format_float(report.log_likelihood),
    }
    return ExperimentResult(files=_training_files(report), summary=summary)


def run_metrics(truth_csv: str, estimate_csv: str, kind: str = "psd") -> ExperimentResult:
    """Compare two (index,value) series; power metrics only for PSDs."""
    if kind not in ("series", "psd"):
        raise InvalidInputError(f"kind must be 'series' or 'psd', got {kind!r}")
    truth = csvio.parse_series(truth_csv)
    estimate = csvio.parse_series(estimate_csv)
    rows = {"nmse": nmse(truth, estimate)}
    if kind == "psd":
        rows["l01"] = l01(truth, estimate)
        rows["kl"] = kl_divergence(truth, estimate)
    files = {"metrics.csv": csvio.render_metrics(rows)}
    tokens = {k: csvio.format_float(v) for k, v in rows.items()}
    return ExperimentResult(files=files, summary={"rows": tokens})


def _positive_local_maxima(power: np.ndarray, limit: int) -> np.ndarray:
    """Interior local maxima of the positive-frequency half [0, limit]."""
    half = power[: limit + 1]
    inner = np.flatnonzero((half[1:-1] > half[:-2]) & (half[1:-1] > half[2:])) + 1
    return inner[np.argsort(half[inner])[::-1]]


def run_periodicity(
    seed: int = 0,
    size: int = 256,
    start: float = 0.0,
    stop: float = 10.0,
    observation_count: int = 52,
    sigma2_time: float = 0.25,
    power_samples: int = 1000,
    restarts: int = 5,
    max_iterations: int = 300,
    ls_grid_size: int = 256,
) -> ExperimentResult:
    """Detect the tones of a two-sinusoid signal from sparse noisy samples.

    Draws ``observation_count`` grid times at random, trains a smooth
    kernel by maximum likelihood, and reports the Monte Carlo posterior
    power spectrum next to the classical periodogram baseline.
    """
    if observation_count < 4 or observation_count > size:
        raise InvalidInputError(
            f"observation count must be in [4, {size}], got {observation_count}"
        )
    grid = TimeGrid.regular(size, start, stop)
    t = grid.points
    truth = 10.0 * np.cos(2 * np.pi * 0.5 * t) - 5.0 * np.sin(2 * np.pi * 1.0 * t)

    rng = np.random.default_rng([seed, 1])
    idx = np.sort(rng.choice(size, observation_count, replace=False))
    noise = np.sqrt(sigma2_time) * np.random.default_rng([seed, 2]).standard_normal(
        observation_count
    )
    y = truth[idx] + noise

    obs = ObservationSet(
        temporal=TemporalObservations(make_selection(size, idx), y, sigma2_time)
    )

    # data-driven starting point: sample variance and the rate matching
    # the mean spacing of the observed times
    spacing = (t[idx][-1] - t[idx][0]) / max(observation_count - 1, 1)
    init = KernelSpec(
        family="squared_exponential",
        sigma2=max(float(np.var(y)), 1e-6),
        alpha=1.0 / (2.0 * spacing * spacing),
    )
    model = build_model(grid, init)
    report = train(
        model,
        obs,
        TrainingConfig(
            restarts=restarts, max_iterations=max_iterations, seed=seed
        ),
    )
    trained = build_model(grid, report.final_spec)

    post = posterior(trained, obs, blocks=("time", "real", "imag"))
    power = power_spectrum_samples(
        (post.block_mean("time"), post.block_cov("time")),
        count=power_samples,
        seed=[seed, 3],
        op=trained.op,
    )

    freqs = grid_frequencies(grid)
    limit = size // 2
    peak_order = _positive_local_maxima(power.mean, limit)

    ls_freqs = default_frequency_grid(ls_grid_size)
    ls_power = lomb_scargle(IrregularSamples(t[idx], y), ls_freqs)
    ls_order = np.argsort(ls_power)[::-1]

    peaks = [
        {"source": "posterior", "frequency": freqs[k], "power": power.mean[k]}
        for k in peak_order[:5]
    ]
    peaks += [
        {
            "source": "lomb_scargle",
            "frequency": ls_freqs[k],
            "power": ls_power[k],
        }
        for k in ls_order[:2]
    ]

    files = {
        "periodicity_truth.csv": _render_time_series(t, truth),
        "periodicity_observations.csv": csvio.render_observations(obs),
    }
    files.update(_posterior_files(post, "periodicity"))
    power_rows = (
        (
            str(k),
            csvio.format_float(freqs[k]),
            csvio.format_float(power.mean[k]),
            csvio.format_float(power.lower[k]),
            csvio.format_float(power.upper[k]),
        )
        for k in range(size)
    )
    files["periodicity_power.csv"] = csvio.render_csv(POWER_HEADER, power_rows)
    ls_rows = (
        (csvio.format_float(f), csvio.format_float(p))
        for f, p in zip(ls_freqs, ls_power)
    )
    files["periodicity_lomb_scargle.csv"] = csvio.render_csv(LS_HEADER, ls_rows)
    peak_rows = (
        (p["source"], csvio.format_float(p["frequency"]), csvio.format_float(p["power"]))
        for p in peaks
    )
    files["periodicity_peaks.csv"] = csvio.render_csv(PEAK_HEADER, peak_rows)
    files.update(_training_files(report))

    summary = {
        "peaks": [
            {
                "source": p["source"],
                "frequency": csvio.format_float(p["frequency"]),
                "power": csvio.format_float(p["power"]),
            }
            for p in peaks
        ],
        "trained_kernel": report.final_spec.to_dict(),
        "converged": report.converged,
    }
    return ExperimentResult(files=files, summary=summary)


def low_frequency_mask(side: int, coverage: float) -> np.ndarray:
    """0/1 frequency mask keeping the lowest-radius signed index pairs.

    An idealized acquisition pattern: dense at the centre of the
    frequency plane, empty outside, covering ``coverage`` of the grid.
    """
    if not 0 < coverage <= 1:
        raise InvalidInputError(f"coverage must be in (0, 1], got {coverage}")
    signed = signed_frequency_indices(side)
    radius = np.hypot(signed[:, None], signed[None, :]).ravel()
    count = max(1, int(np.floor(coverage * side * side)))
    keep = np.argsort(radius, kind="stable")[:count]
    mask = np.zeros(side * side)
    mask[keep] = 1.0
    return mask.reshape(side, side)


def _render_image(image: np.ndarray, header=IMAGE_HEADER) -> str:
    side = image.shape[0]
    rows = (
        (str(r), str(c), csvio.format_float(image[r, c]))
        for r in range(side)
        for c in range(side)
    )
    return csvio.render_csv(header, rows)


def parse_image(text: str, side: int, header=IMAGE_HEADER) -> np.ndarray:
    rows = csvio.split_rows(text, header, min_rows=1)
    if len(rows) != side * side:
        raise InvalidInputError(
            f"expected {side * side} rows for a {side}x{side} grid, got {len(rows)}"
        )
    out = np.full((side, side), np.nan)
    for line, cells in rows:
        r = csvio.parse_int(cells[0], line)
        c = csvio.parse_int(cells[1], line)
        if not (0 <= r < side and 0 <= c < side):
            raise InvalidInputError(f"line {line}: pixel ({r}, {c}) outside the grid")
        if not np.isnan(out[r, c]):
            raise InvalidInputError(f"line {line}: duplicate pixel ({r}, {c})")
        out[r, c] = csvio.parse_float(cells[2], line)
    return out


def parse_mask(text: str, side: int) -> np.ndarray:
    mask = parse_image(text, side, header=MASK_HEADER)
    if not np.all(np.isin(mask, (0.0, 1.0))):
        raise InvalidInputError("mask entries must be 0 or 1")
    return mask


def _render_spectrum_obs_2d(side, indices, real, imag, noise_variance) -> str:
    s2 = csvio.format_float(noise_variance)
    rows = (
        (
            str(j // side),
            str(j % side),
            csvio.format_float(re),
            csvio.format_float(im),
            s2,
        )
        for j, re, im in zip(indices, real, imag)
    )
    return csvio.render_csv(SPECTRUM_2D_OBS_HEADER, rows)


def parse_spectrum_obs_2d(text: str, side: int) -> SpectralObservations:
    rows = csvio.split_rows(text, SPECTRUM_2D_OBS_HEADER, min_rows=1)
    seen: dict[int, tuple[float, float]] = {}
    noise = None
    for line, cells in rows:
        kr = csvio.parse_int(cells[0], line)
        kc = csvio.parse_int(cells[1], line)
        if not (0 <= kr < side and 0 <= kc < side):
            raise InvalidInputError(
                f"line {line}: frequency ({kr}, {kc}) outside the {side}x{side} grid"
            )
        j = kr * side + kc
        if j in seen:
            raise InvalidInputError(f"line {line}: duplicate frequency ({kr}, {kc})")
        s2 = csvio.parse_float(cells[4], line)
        if s2 < 0 or np.isnan(s2):
            raise InvalidInputError(f"line {line}: noise variance must be >= 0")
        if noise is None:
            noise = s2
        elif noise != s2:
            raise InvalidInputError(f"line {line}: all rows must share one noise variance")
        seen[j] = (
            csvio.parse_float(cells[2], line),
            csvio.parse_float(cells[3], line),
        )
    idx = np.array(sorted(seen), dtype=int)
    return SpectralObservations(
        selection=make_selection(side * side, idx),
        real_values=np.array([seen[j][0] for j in idx]),
        imag_values=np.array([seen[j][1] for j in idx]),
        noise_variance=noise,
    )


def run_reconstruct2d(
    spec: KernelSpec,
    side: int,
    mask_csv: str | None = None,
    spectrum_obs_csv: str | None = None,
    synthesize: bool = False,
    coverage: float = 0.54,
    sigma2_freq: float = 0.0,
    seed: int = 0,
) -> ExperimentResult:
    """Image posterior from partial 2D spectrum observations.

    With ``synthesize`` the truth image is drawn from the prior and
    observed through a centre-dense mask of the requested coverage;
    otherwise a mask file and a spectrum observation file are parsed.
    """
    files: dict[str, str] = {}
    model = build_model_2d(side, spec)
    truth_vec = None

    if synthesize:
        if mask_csv is not None or spectrum_obs_csv is not None:
            raise InvalidInputError("pass input files or synthesize, not both")
        pair = sample_pair(model, seed=seed)
        truth_vec = pair.signal
        mask = low_frequency_mask(side, coverage)
        observed = np.flatnonzero(mask.ravel() == 1.0)
        noise_rng = np.random.default_rng([seed, 1])
        scale = np.sqrt(sigma2_freq)
        spectral = SpectralObservations(
            selection=make_selection(side * side, observed),
            real_values=pair.spectrum.real[observed]
            + scale * noise_rng.standard_normal(observed.size),
            imag_values=pair.spectrum.imag[observed]
            + scale * noise_rng.standard_normal(observed.size),
            noise_variance=sigma2_freq,
        )
        files["truth_image.csv"] = _render_image(vec_to_image(truth_vec, side))
        files["mask.csv"] = _render_image(mask, header=MASK_HEADER)
        files["spectrum_observations.csv"] = _render_spectrum_obs_2d(
            side,
            observed,
            spectral.real_values,
            spectral.imag_values,
            sigma2_freq,
        )
    else:
        if mask_csv is None or spectrum_obs_csv is None:
            raise InvalidInputError(
                "reconstruct2d needs a mask file and a spectrum observation file "
                "(or synthesize=True)"
            )
        mask = parse_mask(mask_csv, side)
        if not mask.any():
            raise InvalidInputError("mask selects no frequencies")
        spectral = parse_spectrum_obs_2d(spectrum_obs_csv, side)
        mask_idx = np.flatnonzero(mask.ravel() == 1.0)
        if not np.array_equal(mask_idx, spectral.selection.indices):
            raise InvalidInputError(
                "spectrum observations do not match the mask's frequencies"
            )

    obs = ObservationSet(spectral=spectral)
    post = posterior(model, obs, blocks=("time", "real", "imag"))

    mean_image = vec_to_image(post.block_mean("time"), side)
    std_image = vec_to_image(post.block_std("time"), side)
    files["image_mean.csv"] = _render_image(mean_image)
    files["image_std.csv"] = _render_image(std_image)

    spec_rows = []
    real_mean = post.block_mean("real")
    real_std = post.block_std("real")
    imag_mean = post.block_mean("imag")
    imag_std = post.block_std("imag")
    pairs = model.op.freq_pairs
    for j in range(side * side):
        spec_rows.append(
            (
                str(j // side),
                str(j % side),
                str(pairs[j, 0]),
                str(pairs[j, 1]),
                csvio.format_float(real_mean[j]),
                csvio.format_float(real_std[j]),
                csvio.format_float(imag_mean[j]),
                csvio.format_float(imag_std[j]),
            )
        )
    files["spectrum2d.csv"] = csvio.render_csv(
        (
            "k_row",
            "k_col",
            "signed_k_row",
            "signed_k_col",
            "real_mean",
            "real_std",
            "imag_mean",
            "imag_std",
        ),
        spec_rows,
    )

    metric_rows = None
    if truth_vec is not None:
        truth_spectrum = forward(model.op, truth_vec)
        metric_rows = {
            "nmse_spatial": nmse(truth_vec, post.block_mean("time")),
            "nmse_spectrum_real": nmse(truth_spectrum.real, real_mean),
            "nmse_spectrum_imag": nmse(truth_spectrum.imag, imag_mean),
        }
        files["metrics.csv"] = csvio.render_metrics(metric_rows)

    summary = {
        "side": side,
        "observed_frequencies": int(spectral.selection.count),
        "metrics": None
        if metric_rows is None
        else {k: csvio.format_float(v) for k, v in metric_rows.items()},
    }
    return ExperimentResult(files=files, summary=summary)
