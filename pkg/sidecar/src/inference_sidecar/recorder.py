"""Fixture recorder: replay a request file against a live sidecar and
store each response body under the detection pipeline's cache key.

The output directory is a drop-in fixture cache -- one ``<key>.json`` per
recorded response, canonical JSON bytes, written through the pipeline's
own cache so the layout can never drift.  Keys come from the pipeline's
published recipes, so a pipeline pointed at the directory replays these
responses without network access.  Non-200 responses (for example 501
for a capability the serving registry never loaded) are preserved too,
under ``errors/<key>.json`` with their status code, so a recording session
documents exactly what the service refused.  Recording is deterministic:
the same request file against the same service produces byte-identical
output, including the ``recording.json`` manifest.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from span_sleuth.backends.cache import ResponseCache, canonical_json
from span_sleuth.backends.clients import SidecarClient
from span_sleuth.backends.transport import HttpTransport
from span_sleuth.errors import BackendUnavailable

_OPS = ("srl", "depparse", "nli")


@dataclass(frozen=True)
class RecordingSummary:
    """Outcome of one recording run."""

    n_requests: int
    n_recorded: int
    n_failed: int
    keys: tuple[str, ...]
    error_keys: tuple[str, ...]


@dataclass(frozen=True)
class _RequestSpec:
    op: str
    path: str
    body: dict
    key_inputs: tuple
    model: str | None


def _require_str(raw: dict, field: str, line_no: int) -> str:
    value = raw.get(field)
    if not isinstance(value, str):
        raise ValueError(f"request line {line_no}: field {field!r} must be a string")
    return value


def _parse_spec(raw: object, line_no: int) -> _RequestSpec:
    if not isinstance(raw, dict):
        raise ValueError(f"request line {line_no}: must be a JSON object")
    op = raw.get("op")
    if op not in _OPS:
        raise ValueError(
            f"request line {line_no}: 'op' must be one of {_OPS}, got {op!r}"
        )
    model = raw.get("model")
    if model is not None and not isinstance(model, str):
        raise ValueError(f"request line {line_no}: field 'model' must be a string")
    if op == "nli":
        premise = _require_str(raw, "premise", line_no)
        hypothesis = _require_str(raw, "hypothesis", line_no)
        return _RequestSpec(
            op=op,
            path="/v1/nli",
            body={"premise": premise, "hypothesis": hypothesis},
            key_inputs=(premise, hypothesis),
            model=model,
        )
    text = _require_str(raw, "text", line_no)
    lang = raw.get("lang", "EN")
    if not isinstance(lang, str):
        raise ValueError(f"request line {line_no}: field 'lang' must be a string")
    return _RequestSpec(
        op=op,
        path=f"/v1/{op}",
        body={"text": text, "lang": lang},
        key_inputs=(text, lang),
        model=model,
    )


def _load_requests(requests_path: Path) -> list[_RequestSpec]:
    try:
        lines = requests_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read request file {requests_path}: {exc}") from exc
    specs = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"request line {line_no}: not valid JSON: {exc}") from None
        specs.append(_parse_spec(raw, line_no))
    if not specs:
        raise ValueError(f"request file {requests_path} holds no requests")
    return specs


def _key_for(spec: _RequestSpec, model: str) -> str:
    if spec.op == "srl":
        return SidecarClient.srl_key(*spec.key_inputs, model)
    if spec.op == "depparse":
        return SidecarClient.depparse_key(*spec.key_inputs, model)
    return SidecarClient.nli_key(*spec.key_inputs, model)


def _write_canonical(path: Path, body: dict) -> None:
    """Atomic canonical-JSON write (same discipline as the fixture cache)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    data = canonical_json(body)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def record_fixtures(
    requests_path: Path | str,
    out_dir: Path | str,
    endpoint: str,
    default_model: str | None = None,
    timeout: float = 30.0,
) -> RecordingSummary:
    """Replay ``requests_path`` (JSON lines, one request per line) against
    the sidecar at ``endpoint`` and record every response under ``out_dir``.

    Each line names an ``op`` (``srl``, ``depparse``, or ``nli``), its
    payload fields (``text``/``lang`` or ``premise``/``hypothesis``), and
    optionally the ``model`` name to key the fixture under; requests
    without a model use ``default_model``, falling back to the first model
    the service's health endpoint reports.  Raises
    :class:`~span_sleuth.errors.BackendUnavailable` when the service is
    unreachable or not serving, and :class:`ValueError` for an invalid
    request file.
    """
    requests_path = Path(requests_path)
    out_dir = Path(out_dir)
    specs = _load_requests(requests_path)

    transport = HttpTransport(endpoint, timeout=timeout)
    status, health = transport.get("/healthz")
    if status != 200:
        raise BackendUnavailable(
            f"sidecar at {endpoint} is not serving: healthz returned HTTP {status}"
        )
    models = health.get("models") or []
    fallback_model = default_model or (models[0] if models else None)

    cache = ResponseCache(out_dir)
    recorded: list[str] = []
    errors: list[str] = []
    manifest_entries: dict[str, dict] = {}
    for spec in specs:
        model = spec.model or fallback_model
        if not model:
            raise ValueError(
                "no model name available: pass default_model or set 'model' per request"
            )
        key = _key_for(spec, model)
        status, body = transport.post(spec.path, spec.body)
        if status == 200:
            cache.write_fixture(key, body)
            recorded.append(key)
            manifest_entries[key] = {"op": spec.op, "model": model, "status": 200}
        else:
            _write_canonical(out_dir / "errors" / f"{key}.json",
                             {"status": status, "body": body})
            errors.append(key)
            manifest_entries[key] = {"op": spec.op, "model": model, "status": status}

    _write_canonical(
        out_dir / "recording.json",
        {
            "requests": manifest_entries,
            "counts": {"recorded": len(recorded), "errors": len(errors)},
        },
    )
    return RecordingSummary(
        n_requests=len(specs),
        n_recorded=len(recorded),
        n_failed=len(errors),
        keys=tuple(recorded),
        error_keys=tuple(errors),
    )
