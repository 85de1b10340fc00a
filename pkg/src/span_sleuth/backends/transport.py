"""Transport layer: how request bodies reach a backend.

A transport exposes ``post(path, body)`` / ``get(path)`` returning
``(status, parsed_body)`` and raises BackendUnavailable (or BackendTimeout)
when the service cannot be reached at all. Everything above this layer —
mocks included — speaks the identical wire protocol, which is what lets one
conformance suite run against in-process mocks and a live sidecar alike.
"""

from __future__ import annotations

from typing import Protocol

import requests

from ..errors import BackendProtocolError, BackendTimeout, BackendUnavailable


class Transport(Protocol):
    def post(self, path: str, body: dict) -> tuple[int, dict]: ...

    def get(self, path: str) -> tuple[int, dict]: ...


class HttpTransport:
    """requests-backed transport against a base URL."""

    def __init__(self, base_url: str, timeout: float = 30.0, headers: dict | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.headers = headers or {}
        self._session = requests.Session()

    def _url(self, path: str) -> str:
        return self.base_url + "/" + path.lstrip("/")

    def _decode(self, response: requests.Response) -> tuple[int, dict]:
        try:
            body = response.json()
        except ValueError:
            raise BackendProtocolError(
                f"non-JSON response (HTTP {response.status_code}) from {response.url}"
            ) from None
        if not isinstance(body, dict):
            raise BackendProtocolError(f"expected a JSON object from {response.url}")
        return response.status_code, body

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        try:
            response = self._session.post(
                self._url(path), json=body, timeout=self.timeout, headers=self.headers
            )
        except requests.Timeout as exc:
            raise BackendTimeout(f"POST {path} timed out after {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise BackendUnavailable(f"POST {path} failed: {exc}") from exc
        return self._decode(response)

    def get(self, path: str) -> tuple[int, dict]:
        try:
            response = self._session.get(
                self._url(path), timeout=self.timeout, headers=self.headers
            )
        except requests.Timeout as exc:
            raise BackendTimeout(f"GET {path} timed out after {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise BackendUnavailable(f"GET {path} failed: {exc}") from exc
        return self._decode(response)


class FixtureOnlyTransport:
    """Stands in for a network transport when live calls are forbidden.

    Used in fixture mode: every cache miss that would have gone to the
    network surfaces as BackendUnavailable instead.
    """

    def __init__(self, endpoint: str):
        self.endpoint = endpoint

    def _refuse(self, path: str):
        raise BackendUnavailable(
            f"fixture mode: no recorded response and live calls to {self.endpoint}{path} are disabled"
        )

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        self._refuse(path)

    def get(self, path: str) -> tuple[int, dict]:
        self._refuse(path)


class CountingTransport:
    """Wraps another transport and counts round trips (test instrumentation)."""

    def __init__(self, inner: Transport):
        self.inner = inner
        self.posts = 0
        self.gets = 0

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        self.posts += 1
        return self.inner.post(path, body)

    def get(self, path: str) -> tuple[int, dict]:
        self.gets += 1
        return self.inner.get(path)
