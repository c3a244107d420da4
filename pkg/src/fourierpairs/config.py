"""INI experiment configuration shared by the CLI.

A config file mirrors the request payloads: ``[kernel]`` and ``[grid]``
describe the model, ``[observation]`` the synthetic acquisition,
``[run]`` the experiment kind and seed, plus optional ``[training]``,
``[periodicity]`` and ``[image]`` sections. Command-line flags override
file values.
"""

from __future__ import annotations

import configparser

from .errors import InvalidInputError

KINDS = ("sample", "reconstruct", "reconstruct2d", "periodicity", "train", "metrics")

_BOOLEANS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _get(parser, section, option, convert, default=None):
    if not parser.has_option(section, option):
        return default
    raw = parser.get(section, option).strip()
    try:
        if convert is bool:
            return _BOOLEANS[raw.lower()]
        return convert(raw)
    except (ValueError, KeyError):
        raise InvalidInputError(
            f"config [{section}] {option} = {raw!r} is not a valid {convert.__name__}"
        ) from None


def _int_list(parser, section, option):
    if not parser.has_option(section, option):
        return None
    raw = parser.get(section, option)
    try:
        return [int(token) for token in raw.replace(",", " ").split()]
    except ValueError:
        raise InvalidInputError(
            f"config [{section}] {option} must be a list of integers, got {raw!r}"
        ) from None


def load_config(path: str | None) -> dict:
    """Parse an experiment config into a nested plain dict."""
    out: dict = {}
    if path is None:
        return out
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise InvalidInputError(f"config {path}: {exc}") from None

    if parser.has_section("kernel"):
        kernel = {
            "family": _get(parser, "kernel", "family", str),
            "sigma2": _get(parser, "kernel", "sigma2", float),
            "alpha": _get(parser, "kernel", "alpha", float),
        }
        beta = _get(parser, "kernel", "beta", float)
        if beta is not None:
            kernel["beta"] = beta
        missing = [k for k, v in kernel.items() if v is None]
        if missing:
            raise InvalidInputError(
                f"config [kernel] is missing required options: {', '.join(missing)}"
            )
        out["kernel"] = kernel

    if parser.has_section("grid"):
        size = _get(parser, "grid", "size", int)
        if size is None:
            raise InvalidInputError("config [grid] needs a size option")
        out["grid"] = {
            "size": size,
            "start": _get(parser, "grid", "start", float, 0.0),
            "stop": _get(parser, "grid", "stop", float, 1.0),
        }

    if parser.has_section("observation"):
        observation = {
            "time_fraction": _get(parser, "observation", "time_fraction", float, 0.02),
            "freq_fraction": _get(parser, "observation", "freq_fraction", float, 0.02),
            "sigma2_time": _get(parser, "observation", "sigma2_time", float, 0.2),
            "sigma2_freq": _get(parser, "observation", "sigma2_freq", float, 0.2),
        }
        for option in ("time_indices", "freq_indices"):
            indices = _int_list(parser, "observation", option)
            if indices is not None:
                observation[option] = indices
        out["observation"] = observation

    if parser.has_section("run"):
        kind = _get(parser, "run", "kind", str)
        if kind is not None and kind not in KINDS:
            raise InvalidInputError(
                f"config [run] kind must be one of {', '.join(KINDS)}, got {kind!r}"
            )
        out["run"] = {"kind": kind, "seed": _get(parser, "run", "seed", int)}

    if parser.has_section("training"):
        out["training"] = {
            "restarts": _get(parser, "training", "restarts", int, 5),
            "max_iterations": _get(parser, "training", "max_iterations", int, 500),
            "train_time_noise": _get(parser, "training", "train_time_noise", bool, False),
            "train_freq_noise": _get(parser, "training", "train_freq_noise", bool, False),
        }

    if parser.has_section("periodicity"):
        out["periodicity"] = {
            "size": _get(parser, "periodicity", "size", int, 256),
            "start": _get(parser, "periodicity", "start", float, 0.0),
            "stop": _get(parser, "periodicity", "stop", float, 10.0),
            "observation_count": _get(parser, "periodicity", "observation_count", int, 52),
            "sigma2_time": _get(parser, "periodicity", "sigma2_time", float, 0.25),
            "power_samples": _get(parser, "periodicity", "power_samples", int, 1000),
            "restarts": _get(parser, "periodicity", "restarts", int, 5),
            "max_iterations": _get(parser, "periodicity", "max_iterations", int, 300),
            "ls_grid_size": _get(parser, "periodicity", "ls_grid_size", int, 256),
        }

    if parser.has_section("image"):
        side = _get(parser, "image", "side", int)
        if side is None:
            raise InvalidInputError("config [image] needs a side option")
        out["image"] = {
            "side": side,
            "coverage": _get(parser, "image", "coverage", float, 0.54),
            "sigma2_freq": _get(parser, "image", "sigma2_freq", float, 0.0),
        }

    return out


def check_kind(config: dict, command: str):
    kind = config.get("run", {}).get("kind")
    if kind is not None and kind != command:
        raise InvalidInputError(
            f"config declares kind {kind!r} but the {command!r} command was invoked"
        )


def require(config: dict, section: str, command: str) -> dict:
    if section not in config:
        raise InvalidInputError(
            f"the {command} command needs a config file with a [{section}] section"
        )
    return config[section]
