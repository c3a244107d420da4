"""Command-line client for the reconstruction service.

The CLI is a thin client: it reads configs and input files, builds the
request payload, invokes the service (in-process by default, over HTTP
with ``--server``), and writes the returned files. No output file is
written unless the whole pipeline succeeded.

Exit codes: 0 success, 2 validation error, 3 numerical error, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

from .config import check_kind, load_config, require
from .errors import InvalidInputError, NumericalError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_ERROR_KINDS = {
    "validation": InvalidInputError,
    "numerical": NumericalError,
    "io": OSError,
}


def call_service(path: str, payload: dict, server: str | None) -> dict:
    """Invoke one endpoint, in-process or against a remote server."""
    if server is None:
        from .service import dispatch

        return dispatch(path, payload)
    try:
        response = httpx.post(
            server.rstrip("/") + path, json=payload, timeout=600.0
        )
    except httpx.HTTPError as exc:
        raise OSError(f"cannot reach server {server}: {exc}") from None
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        body = {}
    error = body.get("error")
    if error and error.get("kind") in _ERROR_KINDS:
        raise _ERROR_KINDS[error["kind"]](error.get("message", "service error"))
    if response.status_code == 422:
        raise InvalidInputError(f"request rejected by the service: {body}")
    raise NumericalError(f"service failed with status {response.status_code}: {body}")


def read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_files(out_dir: str, files: dict[str, str]) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        target = out / name
        target.write_text(files[name], encoding="utf-8")
        written.append(str(target))
    return written


def _seed(args, config: dict, default: int = 0) -> int:
    if args.seed is not None:
        return args.seed
    run = config.get("run", {})
    if run.get("seed") is not None:
        return run["seed"]
    return default


def cmd_sample(args) -> int:
    config = load_config(args.config)
    check_kind(config, "sample")
    payload = {
        "kernel": require(config, "kernel", "sample"),
        "grid": require(config, "grid", "sample"),
        "seed": _seed(args, config),
    }
    body = call_service("/sample", payload, args.server)
    written = write_files(args.out, body["files"])
    print(f"sampled pair of size {body['size']} (seed {body['seed']})")
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    config = load_config(args.config)
    check_kind(config, "reconstruct")
    payload = {
        "kernel": require(config, "kernel", "reconstruct"),
        "grid": require(config, "grid", "reconstruct"),
        "synthesize": args.synthesize,
        "seed": _seed(args, config),
    }
    if "observation" in config:
        payload["observation"] = config["observation"]
    if args.observations is not None:
        payload["observations_csv"] = read_text(args.observations)
    if args.truth is not None:
        payload["truth_csv"] = read_text(args.truth)
    body = call_service("/reconstruct", payload, args.server)
    written = write_files(args.out, body["files"])
    print(f"reconstructed from {body['observed_rows']} observation rows")
    if body.get("metrics"):
        for name, value in body["metrics"].items():
            print(f"  {name} = {value}")
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_reconstruct2d(args) -> int:
    config = load_config(args.config)
    check_kind(config, "reconstruct2d")
    image = require(config, "image", "reconstruct2d")
    payload = {
        "kernel": require(config, "kernel", "reconstruct2d"),
        "side": image["side"],
        "coverage": image["coverage"],
        "sigma2_freq": image["sigma2_freq"],
        "synthesize": args.synthesize,
        "seed": _seed(args, config),
    }
    if args.mask is not None:
        payload["mask_csv"] = read_text(args.mask)
    if args.spectrum_obs is not None:
        payload["spectrum_obs_csv"] = read_text(args.spectrum_obs)
    body = call_service("/reconstruct2d", payload, args.server)
    written = write_files(args.out, body["files"])
    print(
        f"reconstructed {body['side']}x{body['side']} image from "
        f"{body['observed_frequencies']} observed frequencies"
    )
    if body.get("metrics"):
        for name, value in body["metrics"].items():
            print(f"  {name} = {value}")
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_periodicity(args) -> int:
    config = load_config(args.config)
    check_kind(config, "periodicity")
    payload = dict(config.get("periodicity", {}))
    payload["seed"] = _seed(args, config)
    body = call_service("/periodicity", payload, args.server)
    written = write_files(args.out, body["files"])
    print("dominant peaks:")
    for peak in body["peaks"][:4]:
        print(f"  {peak['source']}: frequency {peak['frequency']} power {peak['power']}")
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_config(args.config)
    check_kind(config, "train")
    training = config.get("training", {})
    payload = {
        "kernel": require(config, "kernel", "train"),
        "grid": require(config, "grid", "train"),
        "observations_csv": read_text(args.observations),
        "seed": _seed(args, config),
        "restarts": training.get("restarts", 5),
        "max_iterations": training.get("max_iterations", 500),
        "train_time_noise": training.get("train_time_noise", False),
        "train_freq_noise": training.get("train_freq_noise", False),
    }
    body = call_service("/train", payload, args.server)
    written = write_files(args.out, body["files"])
    kernel = body["final_kernel"]
    print(
        f"trained {kernel['family']}: sigma2={kernel['sigma2']:.6g} "
        f"alpha={kernel['alpha']:.6g}"
        + (f" beta={kernel['beta']:.6g}" if kernel.get("beta") is not None else "")
    )
    print(
        f"log-likelihood {body['initial_log_likelihood']} -> {body['log_likelihood']} "
        f"(converged={body['converged']}, iterations={body['iterations']})"
    )
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    config = load_config(args.config)
    check_kind(config, "metrics")
    payload = {
        "truth_csv": read_text(args.truth),
        "estimate_csv": read_text(args.estimate),
        "kind": args.kind,
    }
    body = call_service("/metrics", payload, args.server)
    written = write_files(args.out, body["files"])
    for name, value in body["rows"].items():
        print(f"{name} = {value}")
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fourierpairs",
        description="Joint signal/spectrum reconstruction from partial noisy observations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument(
            "--config", required=config_required, help="experiment config (INI)"
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--server",
            default=None,
            help="base URL of a running service; defaults to in-process execution",
        )

    p = sub.add_parser("sample", help="draw a signal/spectrum pair from the prior")
    common(p)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("reconstruct", help="posterior from observations in both domains")
    common(p)
    p.add_argument("--observations", help="observation CSV file")
    p.add_argument("--truth", help="optional truth (time,value) CSV for error metrics")
    p.add_argument(
        "--synthesize",
        action="store_true",
        help="generate truth and observations from the prior instead of reading files",
    )
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("reconstruct2d", help="image posterior from partial 2D spectra")
    common(p)
    p.add_argument("--mask", help="0/1 frequency mask CSV (row,col,observed)")
    p.add_argument(
        "--spectrum-obs", dest="spectrum_obs", help="observed 2D spectrum CSV"
    )
    p.add_argument(
        "--synthesize",
        action="store_true",
        help="generate truth image, mask and observations from the prior",
    )
    p.set_defaults(handler=cmd_reconstruct2d)

    p = sub.add_parser(
        "periodicity", help="two-tone detection study against the periodogram baseline"
    )
    common(p, config_required=False)
    p.set_defaults(handler=cmd_periodicity)

    p = sub.add_parser("train", help="maximum-likelihood kernel hyperparameters")
    common(p)
    p.add_argument("--observations", required=True, help="observation CSV file")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("metrics", help="compare two (index,value) series")
    p.add_argument("--config", default=None, help="optional config (kind check only)")
    p.add_argument("--truth", required=True, help="reference series CSV")
    p.add_argument("--estimate", required=True, help="estimate series CSV")
    p.add_argument(
        "--kind", choices=("series", "psd"), default="psd", help="metric family"
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--server", default=None)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InvalidInputError as exc:
        print(f"error (validation): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
