"""HTTP service surface of the sidecar.

Every response -- success or failure -- is a JSON object, because the
detection pipeline's transport treats any non-JSON body as a protocol
violation.  Status codes: 503 while models are still loading, 422 for a
malformed body, 501 for a capability that is not loaded, 404 for an
unknown route, 500 for an inference failure, 200 otherwise.

The server binds before models load, so early health probes get an honest
503 instead of a connection error; :func:`serve` runs that lifecycle
(bind, accept in the background, load, then block).
"""

from __future__ import annotations

import json
import threading
from collections.abc import Mapping
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from inference_sidecar.registry import CAPABILITIES, ModelRegistry


class _RequestError(Exception):
    """Abort request handling with a specific status and JSON body."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _require_str(body: Mapping, field: str) -> str:
    value = body.get(field)
    if not isinstance(value, str):
        raise _RequestError(422, f"field {field!r} must be a string")
    return value


def _optional_lang(body: Mapping) -> str:
    lang = body.get("lang", "EN")
    if not isinstance(lang, str):
        raise _RequestError(422, "field 'lang' must be a string")
    return lang


class SidecarHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], registry: ModelRegistry):
        super().__init__(address, _Handler)
        self.registry = registry


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: SidecarHTTPServer

    # -- plumbing -------------------------------------------------------------

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        """Silence per-request stderr logging."""

    def _reply(self, status: int, body: Mapping) -> None:
        data = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> bytes:
        """Drain the request body even on error paths, so keep-alive
        connections stay aligned."""
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length > 0 else b""

    def _parse_json_object(self, raw: bytes) -> dict:
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise _RequestError(422, "request body must be valid JSON") from None
        if not isinstance(body, dict):
            raise _RequestError(422, "request body must be a JSON object")
        return body

    def _handle_for(self, capability: str, lang: str):
        handle = self.server.registry.handle_for(capability, lang)
        if handle is None:
            raise _RequestError(501, f"capability {capability!r} is not loaded")
        return handle

    # -- verbs ----------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 - http.server naming
        self._read_body()
        if self.path != "/healthz":
            self._reply(404, {"error": f"unknown path {self.path!r}"})
            return
        registry = self.server.registry
        if not registry.loaded:
            self._reply(503, {"status": "loading", "error": "models are still loading"})
            return
        self._reply(200, {"status": "ok", "models": registry.model_names()})

    def do_POST(self) -> None:  # noqa: N802 - http.server naming
        raw = self._read_body()
        try:
            if not self.server.registry.loaded:
                raise _RequestError(503, "models are still loading")
            route = _ROUTES.get(self.path)
            if route is None:
                raise _RequestError(404, f"unknown path {self.path!r}")
            body = self._parse_json_object(raw)
            self._reply(200, route(self, body))
        except _RequestError as exc:
            self._reply(exc.status, {"error": exc.message})
        except Exception as exc:  # noqa: BLE001 - failed inference must not kill the connection
            self._reply(500, {"error": f"{type(exc).__name__}: {exc}"})

    # -- capability endpoints ---------------------------------------------------

    def _post_srl(self, body: Mapping) -> dict:
        text = _require_str(body, "text")
        lang = _optional_lang(body)
        frames = self._handle_for("srl", lang).run(text, lang)
        return {"frames": frames}

    def _post_depparse(self, body: Mapping) -> dict:
        text = _require_str(body, "text")
        lang = _optional_lang(body)
        nodes = self._handle_for("depparse", lang).run(text, lang)
        return {"nodes": nodes}

    def _post_nli(self, body: Mapping) -> dict:
        premise = _require_str(body, "premise")
        hypothesis = _require_str(body, "hypothesis")
        triple = self._handle_for("nli", _optional_lang(body)).run(premise, hypothesis)
        return {
            "entailment": triple["entailment"],
            "neutral": triple["neutral"],
            "contradiction": triple["contradiction"],
        }


_ROUTES = {
    "/v1/srl": _Handler._post_srl,
    "/v1/depparse": _Handler._post_depparse,
    "/v1/nli": _Handler._post_nli,
}

assert tuple(route.rsplit("/", 1)[-1] for route in _ROUTES) == CAPABILITIES


def make_server(
    registry: ModelRegistry, host: str = "127.0.0.1", port: int = 0
) -> SidecarHTTPServer:
    """Bind a server for ``registry``; the caller starts and stops it.
    Port 0 picks a free port; read it back from ``server.server_address``."""
    return SidecarHTTPServer((host, port), registry)


def serve(config: Mapping | None = None) -> None:
    """Run the sidecar until interrupted.

    ``config`` may carry ``host`` and ``port`` plus every
    :class:`ModelRegistry` key.  The socket binds and starts answering
    (with 503) before models load, then the loaded service blocks in the
    accept loop.
    """
    config = dict(config or {})
    host = str(config.pop("host", "127.0.0.1"))
    port = int(config.pop("port", 8800))
    registry = ModelRegistry(config)
    server = make_server(registry, host=host, port=port)
    acceptor = threading.Thread(target=server.serve_forever, daemon=True)
    acceptor.start()
    try:
        registry.load()
        bound_host, bound_port = server.server_address[:2]
        print(
            f"inference-sidecar serving {', '.join(registry.model_names())} "
            f"on http://{bound_host}:{bound_port}",
            flush=True,
        )
        acceptor.join()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
