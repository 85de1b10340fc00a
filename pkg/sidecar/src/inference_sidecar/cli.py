"""Command-line entry points: ``inference-sidecar serve`` and
``inference-sidecar record``.

Exit codes follow the pipeline tooling's convention: 0 success, 1 fatal
runtime failure (service unreachable, model load failure), 64 usage error
(bad flags, unreadable or invalid config/request file).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from inference_sidecar import __version__
from inference_sidecar.models import ModelLoadError
from inference_sidecar.recorder import record_fixtures
from inference_sidecar.service import serve
from span_sleuth.errors import BackendError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A002 - argparse API
        self.print_usage(sys.stderr)
        raise SystemExit(64)


def _build_parser() -> _Parser:
    parser = _Parser(prog="inference-sidecar", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"inference-sidecar {__version__}"
    )
    commands = parser.add_subparsers(dest="command", metavar="command")

    serve_cmd = commands.add_parser(
        "serve", help="run the inference service until interrupted"
    )
    serve_cmd.add_argument("--config", type=Path, help="YAML service config")
    serve_cmd.add_argument("--host", help="bind address (overrides config)")
    serve_cmd.add_argument("--port", type=int, help="bind port (overrides config)")

    record_cmd = commands.add_parser(
        "record", help="record live responses as replayable fixtures"
    )
    record_cmd.add_argument(
        "--endpoint", required=True, help="base URL of a running sidecar"
    )
    record_cmd.add_argument(
        "--requests", required=True, type=Path, help="JSONL request file"
    )
    record_cmd.add_argument(
        "--out", required=True, type=Path, help="fixture output directory"
    )
    record_cmd.add_argument(
        "--model", help="cache-key model name for requests that do not set one"
    )
    record_cmd.add_argument(
        "--timeout", type=float, default=30.0, help="per-request timeout in seconds"
    )
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        config = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise _UsageError(f"config {path} is not valid YAML: {exc}") from exc
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise _UsageError(f"config {path} must be a mapping")
    return config


def _cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.host is not None:
        config["host"] = args.host
    if args.port is not None:
        config["port"] = args.port
    try:
        serve(config)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    except ModelLoadError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_record(args: argparse.Namespace) -> int:
    try:
        summary = record_fixtures(
            args.requests,
            args.out,
            args.endpoint,
            default_model=args.model,
            timeout=args.timeout,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    except BackendError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    print(
        f"recorded {summary.n_recorded} fixture(s) to {args.out} "
        f"({summary.n_failed} error fixture(s))"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 64
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        return _cmd_record(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main(argv=sys.argv[1:]))
