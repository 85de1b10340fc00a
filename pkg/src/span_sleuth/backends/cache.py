"""Content-addressed response cache shared by all backend clients.

Cache keys are the stable external contract for fixtures: a key is
``sha256(operation + "\\n" + canonical_json(inputs))`` in lowercase hex,
where canonical JSON uses sorted keys, no whitespace, and raw (non-escaped)
unicode. Anything that can reproduce this recipe — including the fixture
recorder that ships with the inference sidecar — can pre-populate a cache
directory that the pipeline will replay byte-for-byte.

Key recipes used by the clients:

* ``retrieve_context``: ``{"question", "lang", "model", "prompt_version"}``
* ``v1/srl``:           ``{"text", "lang", "model"}``
* ``v1/depparse``:      ``{"text", "lang", "model"}``
* ``v1/nli``:           ``{"premise_sha256", "hypothesis", "model"}``
* ``verify_span``:      ``{"question", "span", "verifier", "prompt_version"}``

One file per digest (``<key>.json``) so runs against paid APIs are
resumable and auditable.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional


def canonical_json(obj) -> str:
    """Deterministic JSON rendering used for digests and manifests."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def cache_key(operation: str, inputs: Mapping) -> str:
    """Stable content digest for one backend call; safe as a filename."""
    payload = f"{operation}\n{canonical_json(inputs)}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def now_iso() -> str:
    """UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        ts = datetime.now(tz=timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


class ResponseCache:
    """File-backed (or in-memory) store of response bodies keyed by digest.

    ``readonly`` turns the cache into a fixture set: reads succeed, writes
    are silently skipped so replays never mutate recorded sessions.
    """

    def __init__(self, directory: Optional[Path | str] = None, readonly: bool = False):
        self.directory = Path(directory) if directory is not None else None
        self.readonly = readonly
        self._memory: dict[str, dict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.directory is not None and not readonly:
            self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        body = None
        if self.directory is None:
            with self._lock:
                body = self._memory.get(key)
        else:
            path = self._path(key)
            if path.is_file():
                body = json.loads(path.read_text(encoding="utf-8"))
        with self._lock:
            if body is None:
                self.misses += 1
            else:
                self.hits += 1
        return body

    def put(self, key: str, body: dict) -> None:
        if self.readonly:
            return
        if self.directory is None:
            with self._lock:
                self._memory[key] = body
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        # atomic write: concurrent writers of the same key both produce the
        # same bytes, so last-rename-wins is harmless
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(canonical_json(body))
            os.replace(tmp, self._path(key))
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def write_fixture(self, key: str, body: dict) -> None:
        """Store a recorded body even if the cache is otherwise readonly."""
        was_readonly = self.readonly
        self.readonly = False
        try:
            self.put(key, body)
        finally:
            self.readonly = was_readonly


class KeyedLocks:
    """Per-key locks for in-flight request de-duplication."""

    def __init__(self):
        self._master = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def lock(self, key: str) -> threading.Lock:
        with self._master:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]


def backoff_sleep(attempt: int, base: float) -> None:
    """Exponential backoff before retry ``attempt`` (0-based)."""
    if base > 0:
        time.sleep(base * (2 ** attempt))
