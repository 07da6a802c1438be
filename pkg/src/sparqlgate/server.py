"""HTTP surface: dashboard at /, documentation per api base, operations under it.

The handler works on the raw request target, so percent-encoded slashes in
parameter values never gain path meaning. Operation calls and unmatched
paths are recorded in the call statistics; dashboard and documentation
page views are not, so reading the dashboard never changes what it shows.
"""

from __future__ import annotations

import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .docs import operation_id, render_dashboard, render_docs
from .manager import ApiManager

log = logging.getLogger(__name__)

HTML_MEDIA_TYPE = "text/html"


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def do_GET(self) -> None:
        self._handle("get")

    def do_POST(self) -> None:
        self._handle("post")

    def _handle(self, method: str) -> None:
        gateway: GatewayServer = self.server  # type: ignore[assignment]
        manager = gateway.manager
        path, _, _query = self.path.partition("?")

        if path in ("", "/") and method == "get":
            body = render_dashboard(manager.stats, manager.documents, gateway.css)
            self._send(200, body, HTML_MEDIA_TYPE)
            return

        api = manager.find_api(path)
        if api is not None and method == "get" and path.rstrip("/") == api.base:
            body = render_docs(api.document.api, api.document.operations, gateway.css)
            self._send(200, body, HTML_MEDIA_TYPE)
            return

        accept = self.headers.get("Accept")
        outcome, served_api, operation = manager.call(self.path, method, accept)
        op_id = (
            operation_id(served_api.document.api, operation)
            if served_api is not None and operation is not None
            else None
        )
        manager.stats.record_call(op_id, outcome.status)
        self._send(outcome.status, outcome.body, outcome.content_type)

    def _send(self, status: int, body: str, content_type: str) -> None:
        payload = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", f"{content_type}; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, format: str, *args) -> None:
        log.debug("%s - %s", self.address_string(), format % args)


class GatewayServer(ThreadingHTTPServer):
    """Threaded HTTP server bound to one ApiManager."""

    daemon_threads = True

    def __init__(
        self,
        manager: ApiManager,
        host: str = "127.0.0.1",
        port: int = 8080,
        css: str | None = None,
    ):
        super().__init__((host, port), _Handler)
        self.manager = manager
        self.css = css
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "GatewayServer":
        """Serve in a background thread (tests and embedding)."""
        # Tight poll so stop() returns promptly.
        self._thread = threading.Thread(
            target=self.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
        )
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "GatewayServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()


def serve(
    manager: ApiManager,
    host: str = "127.0.0.1",
    port: int = 8080,
    css: str | None = None,
) -> GatewayServer:
    """Bind and start a gateway server in the background."""
    return GatewayServer(manager, host, port, css).start()
