"""Command-line entry point: ``span-sleuth detect | evaluate | verify``.

Exit codes are scriptable: 0 success, 2 partial degradation (some records
or spans fell back while the run completed), 1 fatal error, 64 usage or
configuration error. Every detect run emits a manifest next to the
prediction file recording input digests, prompt versions, and backend model
names, so a run is reproducible from manifest plus cache directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import __version__
from .backends import RETRIEVAL_PROMPT_VERSION, VERIFIER_PROMPT_VERSION
from .backends.cache import now_iso
from .corpus import load_corpus
from .detect import PipelineConfig, build_clients, load_predictions, run_pipeline, write_predictions
from .errors import SpanSleuthError
from .evaluation import (
    aggregate,
    evaluate_by_language,
    format_summary_table,
    write_report,
)
from .verify import format_verification_table, verify_predictions, write_verification_report

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_DEGRADED = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    """Operator-recoverable problem: bad flags or bad configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; we promise 64
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sha256_file(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def load_config(path) -> PipelineConfig:
    """Parse the declarative config file into a PipelineConfig."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise _UsageError(f"config {path} is not valid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise _UsageError(f"config {path} must be a mapping at top level")
    try:
        return PipelineConfig.from_mapping(raw)
    except (ValueError, TypeError) as exc:
        raise _UsageError(f"config {path} invalid: {exc}") from None


@dataclass
class RunManifest:
    """Provenance for one detect run."""

    tool_version: str
    command: str
    timestamp: str
    config_digest: str
    input_digests: dict[str, str]
    output_digests: dict[str, str]
    prompt_versions: dict[str, str]
    backend_models: dict[str, str]

    def to_json(self) -> str:
        obj = {
            "tool_version": self.tool_version,
            "command": self.command,
            "timestamp": self.timestamp,
            "config_digest": self.config_digest,
            "input_digests": self.input_digests,
            "output_digests": self.output_digests,
            "prompt_versions": self.prompt_versions,
            "backend_models": self.backend_models,
        }
        return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def manifest_timestamp(fixture_mode: bool) -> str:
    """Wall-clock time, except when reproducibility is the point:
    SOURCE_DATE_EPOCH wins when set, and fixture mode pins to the epoch."""
    if os.environ.get("SOURCE_DATE_EPOCH"):
        return now_iso()
    if fixture_mode:
        return "1970-01-01T00:00:00Z"
    return now_iso()


def _backend_models(cfg: PipelineConfig) -> dict[str, str]:
    models = {"sidecar": cfg.sidecar.model_name, "retrieval": cfg.retrieval.model_name}
    for i, verifier in enumerate(cfg.verifiers):
        models[f"verifier[{i}]"] = verifier.model_name
    return models


def cmd_detect(args) -> int:
    cfg = load_config(args.config)
    if args.fixtures:
        cfg = cfg.with_cache_dir(args.fixtures, fixture_mode=True)
    records, failures = load_corpus(args.input)
    for failure in failures:
        print(f"skipping bad input line — {failure}", file=sys.stderr)

    predictions, report = run_pipeline(records, cfg)
    out = Path(args.out)
    write_predictions(predictions, out)

    manifest = RunManifest(
        tool_version=__version__,
        command="detect",
        timestamp=manifest_timestamp(cfg.fixture_mode),
        config_digest=_sha256_file(args.config),
        input_digests={str(args.input): _sha256_file(args.input)},
        output_digests={str(out): _sha256_file(out)},
        prompt_versions={
            "retrieval": RETRIEVAL_PROMPT_VERSION,
            "verifier": VERIFIER_PROMPT_VERSION,
        },
        backend_models=_backend_models(cfg),
    )
    manifest_path = Path(str(out) + ".manifest.json")
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")

    for line in report.summary_lines():
        print(line)
    print(f"wrote {len(predictions)} prediction(s) to {out}")
    print(f"wrote manifest to {manifest_path}")
    if failures or report.degraded:
        return EXIT_DEGRADED
    return EXIT_OK


def cmd_evaluate(args) -> int:
    rows = load_predictions(args.pred)
    records, failures = load_corpus(args.gold)
    if failures:
        for failure in failures:
            print(f"bad gold line — {failure}", file=sys.stderr)
        print("gold corpus must parse cleanly for evaluation", file=sys.stderr)
        return EXIT_FATAL
    reports = evaluate_by_language(rows, records)
    print(format_summary_table(aggregate(reports)))
    skipped = sum(r.n_skipped for r in reports)
    if skipped:
        print(f"({skipped} empty-answer record(s) excluded from means)")
    if args.out:
        write_report(reports, args.out)
        print(f"wrote report object to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.fixtures:
        cfg = cfg.with_cache_dir(args.fixtures, fixture_mode=True)
    if not cfg.verifiers:
        raise _UsageError("no verifiers configured; add backends.verifiers to the config")
    rows = load_predictions(args.pred)
    records, failures = load_corpus(args.input)
    for failure in failures:
        print(f"skipping bad input line — {failure}", file=sys.stderr)
    clients = build_clients(cfg)
    reports = verify_predictions(
        rows,
        records,
        clients.verifiers,
        retrieval=clients.retrieval,
        parallelism=cfg.parallelism,
        fixture_mode=cfg.fixture_mode,
    )
    print(format_verification_table(reports))
    if args.out:
        write_verification_report(reports, args.out)
        print(f"wrote verification report to {args.out}")
    if any(r.n_degraded for r in reports):
        return EXIT_DEGRADED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="span-sleuth", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    detect = sub.add_parser("detect", parents=[], help="run hallucination detection over a corpus")
    detect.add_argument("--input", required=True, help="input corpus file (one record per line)")
    detect.add_argument("--config", required=True, help="pipeline config file")
    detect.add_argument("--fixtures", help="fixture/cache directory; implies no live HTTP")
    detect.add_argument("--out", default="predictions.jsonl", help="prediction output path")
    detect.set_defaults(func=cmd_detect)

    ev = sub.add_parser("evaluate", help="score a prediction file against gold labels")
    ev.add_argument("--pred", required=True, help="prediction file from detect")
    ev.add_argument("--gold", required=True, help="gold-labeled corpus file")
    ev.add_argument("--out", help="optional machine-readable report path")
    ev.set_defaults(func=cmd_evaluate)

    ver = sub.add_parser("verify", help="cross-check predicted spans with verifier models")
    ver.add_argument("--pred", required=True, help="prediction file from detect")
    ver.add_argument("--input", required=True, help="corpus file with the questions")
    ver.add_argument("--config", required=True, help="pipeline config file (needs verifiers)")
    ver.add_argument("--fixtures", help="fixture/cache directory; implies no live HTTP")
    ver.add_argument("--out", help="optional machine-readable report path")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"span-sleuth: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpanSleuthError as exc:
        print(f"span-sleuth: fatal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except OSError as exc:
        print(f"span-sleuth: fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
