"""Threaded HTTP mock of the search protocol, backed by a corpus.

Used as the test double for the remote-search boundary and exposed via
the ``mock-search`` CLI subcommand.  An optional artificial latency lets
client-timeout behavior be exercised.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from seafarer.corpus import Corpus
from seafarer.search import corpus_search


class _QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # Clients hanging up (e.g. after a timeout) are expected traffic.
        pass


class MockSearchServer:
    """Search-protocol server; start() binds and serves in a daemon thread."""

    def __init__(self, corpus: Corpus, host: str = "127.0.0.1", port: int = 0,
                 latency: float = 0.0):
        self.corpus = corpus
        self.latency = latency
        self._httpd = _QuietServer((host, port), _make_handler(self))
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        host = self._httpd.server_address[0]
        return f"http://{host}:{self.port}"

    def start(self) -> "MockSearchServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "MockSearchServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(server: MockSearchServer):
    corpus = server.corpus

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if server.latency > 0:
                time.sleep(server.latency)
            parsed = urlparse(self.path)
            if parsed.path == "/api/vocab":
                self._reply(200, {"tags": list(corpus.tag_vocab)})
                return
            if parsed.path == "/api/search":
                params = parse_qs(parsed.query)
                tag = params.get("tag", [None])[0]
                try:
                    limit = int(params.get("limit", [""])[0])
                    token = int(params.get("token", ["0"])[0])
                except ValueError:
                    self._reply(400, {"error": "limit and token must be integers"})
                    return
                if tag is None or limit < 1 or token < 0:
                    self._reply(400, {"error": "expected tag, limit >= 1, token >= 0"})
                    return
                items = corpus_search(corpus, tag, limit, token)
                self._reply(200, {"items": [it.to_dict() for it in items]})
                return
            self._reply(404, {"error": f"unknown path {parsed.path}"})

    return Handler


def serve_mock(corpus: Corpus, host: str = "127.0.0.1", port: int = 0,
               latency: float = 0.0) -> MockSearchServer:
    """Start a mock search server and return its handle."""
    return MockSearchServer(corpus, host=host, port=port, latency=latency).start()
