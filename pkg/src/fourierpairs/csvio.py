"""CSV conventions shared by the service, the CLI and the file schemas.

Header rows are mandatory. Floats are written with 17 significant
digits so values round-trip exactly; infinities and NaN are emitted as
the literal tokens ``+inf``, ``-inf`` and ``nan``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError
from .observation import (
    ObservationSet,
    SpectralObservations,
    TemporalObservations,
    make_selection,
)

OBSERVATION_HEADER = ("domain", "index", "value_real", "value_imag", "noise_variance")
SERIES_HEADER = ("index", "value")
POSTERIOR_HEADER = ("block", "index", "mean", "std")
METRIC_HEADER = ("metric", "value")


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def parse_float(token: str, line: int) -> float:
    text = token.strip()
    if text == "+inf":
        return float("inf")
    if text == "-inf":
        return float("-inf")
    if text == "nan":
        return float("nan")
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"line {line}: cannot parse {token!r} as a number") from None


def render_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def split_rows(text: str, header, min_rows: int = 0) -> list[tuple[int, list[str]]]:
    """Split CSV text into (line_number, cells) pairs after checking the header."""
    lines = text.splitlines()
    if not lines:
        raise InvalidInputError("empty CSV input")
    got = tuple(cell.strip() for cell in lines[0].split(","))
    if got != tuple(header):
        raise InvalidInputError(
            f"line 1: expected header {','.join(header)!r}, got {lines[0]!r}"
        )
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise InvalidInputError(
                f"line {i}: expected {len(header)} columns, got {len(cells)}"
            )
        rows.append((i, cells))
    if len(rows) < min_rows:
        raise InvalidInputError(f"expected at least {min_rows} data rows, got {len(rows)}")
    return rows


def parse_int(token: str, line: int) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise InvalidInputError(f"line {line}: cannot parse {token!r} as an integer") from None


def render_series(values) -> str:
    rows = (
        (str(i), format_float(v)) for i, v in enumerate(np.asarray(values, dtype=float))
    )
    return render_csv(SERIES_HEADER, rows)


def parse_series(text: str) -> np.ndarray:
    rows = split_rows(text, SERIES_HEADER, min_rows=1)
    values = np.empty(len(rows))
    for pos, (line, cells) in enumerate(rows):
        idx = parse_int(cells[0], line)
        if idx != pos:
            raise InvalidInputError(
                f"line {line}: series indices must run 0,1,... (got {idx})"
            )
        values[pos] = parse_float(cells[1], line)
    return values


def render_observations(obs: ObservationSet) -> str:
    rows = []
    if obs.temporal is not None:
        s2 = format_float(obs.temporal.noise_variance)
        for idx, val in zip(obs.temporal.selection.indices, obs.temporal.values):
            rows.append(("time", str(idx), format_float(val), "", s2))
    if obs.spectral is not None:
        s2 = format_float(obs.spectral.noise_variance)
        for idx, re, im in zip(
            obs.spectral.selection.indices,
            obs.spectral.real_values,
            obs.spectral.imag_values,
        ):
            rows.append(("freq", str(idx), format_float(re), format_float(im), s2))
    return render_csv(OBSERVATION_HEADER, rows)


def parse_observations(text: str, size: int) -> ObservationSet:
    """Read an observation CSV back into an observation set.

    Rows may arrive in any order; indices must be unique per domain and
    every row of a domain must state the same noise variance.
    """
    rows = split_rows(text, OBSERVATION_HEADER, min_rows=1)
    time_rows: dict[int, float] = {}
    freq_rows: dict[int, tuple[float, float]] = {}
    noise = {"time": None, "freq": None}
    for line, cells in rows:
        domain = cells[0]
        if domain not in ("time", "freq"):
            raise InvalidInputError(
                f"line {line}: domain must be 'time' or 'freq', got {domain!r}"
            )
        idx = parse_int(cells[1], line)
        if not 0 <= idx < size:
            raise InvalidInputError(
                f"line {line}: index {idx} outside the latent range [0, {size})"
            )
        s2 = parse_float(cells[4], line)
        if s2 < 0 or math.isnan(s2):
            raise InvalidInputError(f"line {line}: noise variance must be >= 0")
        if noise[domain] is None:
            noise[domain] = s2
        elif noise[domain] != s2:
            raise InvalidInputError(
                f"line {line}: all {domain} rows must share one noise variance"
            )
        if domain == "time":
            if cells[3] != "":
                raise InvalidInputError(
                    f"line {line}: time rows must leave value_imag empty"
                )
            if idx in time_rows:
                raise InvalidInputError(f"line {line}: duplicate time index {idx}")
            time_rows[idx] = parse_float(cells[2], line)
        else:
            if idx in freq_rows:
                raise InvalidInputError(f"line {line}: duplicate freq index {idx}")
            freq_rows[idx] = (parse_float(cells[2], line), parse_float(cells[3], line))

    temporal = None
    spectral = None
    if time_rows:
        idx = np.array(sorted(time_rows), dtype=int)
        temporal = TemporalObservations(
            selection=make_selection(size, idx),
            values=np.array([time_rows[i] for i in idx]),
            noise_variance=noise["time"],
        )
    if freq_rows:
        idx = np.array(sorted(freq_rows), dtype=int)
        spectral = SpectralObservations(
            selection=make_selection(size, idx),
            real_values=np.array([freq_rows[i][0] for i in idx]),
            imag_values=np.array([freq_rows[i][1] for i in idx]),
            noise_variance=noise["freq"],
        )
    return ObservationSet(temporal=temporal, spectral=spectral)


def render_posterior_rows(block: str, mean, std) -> list[tuple[str, ...]]:
    return [
        (block, str(i), format_float(m), format_float(s))
        for i, (m, s) in enumerate(zip(mean, std))
    ]


def render_metrics(rows: dict[str, float]) -> str:
    return render_csv(
        METRIC_HEADER, ((name, format_float(value)) for name, value in rows.items())
    )
