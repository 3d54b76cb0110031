"""HTTP labeling service for human-oracle runs.

The loop runs in a background thread and blocks on a ``HumanOracle``;
this service is the other side of that handoff.  All run-state mutation
stays inside the loop thread — the service only reads consistent
snapshots and delivers exactly one label per pending item.

Protocol (JSON bodies, CORS enabled for the browser console):

* ``GET /api/next``    -> 200 ``{"item_id", "url", "iteration"}`` or 204
* ``POST /api/label``  body ``{"item_id", "label"}`` -> 200, or 409 when
  the id is not the pending one (including duplicate submissions)
* ``GET /api/status``  -> ``{"iteration", "budget", "n_pos", "n_neg",
  "auc_history"}``
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from seafarer.engine import HumanOracle, OracleAborted, RunRecord, RunRow, run

log = logging.getLogger("seafarer.service")


class HumanRunController:
    """Owns one human-oracle run: loop thread, oracle handoff, status snapshot."""

    def __init__(self, run_kwargs: dict, budget: int, csv_path: str | None = None):
        self.oracle = HumanOracle()
        self.budget = budget
        self.csv_path = csv_path
        self._kwargs = dict(run_kwargs)
        self._kwargs["oracle"] = self.oracle
        self._kwargs["budget"] = budget
        self._kwargs["on_row"] = self._on_row
        self._lock = threading.Lock()
        self._rows: list[RunRow] = []
        self._record: RunRecord | None = None
        self._error: BaseException | None = None
        self._thread = threading.Thread(target=self._main, daemon=True)

    def start(self) -> "HumanRunController":
        self._thread.start()
        return self

    def _main(self) -> None:
        try:
            record = run(**self._kwargs)
        except OracleAborted:
            log.info("labeling session closed before the budget was exhausted")
            return
        except BaseException as exc:
            log.exception("run failed")
            with self._lock:
                self._error = exc
            return
        with self._lock:
            self._record = record
        if self.csv_path:
            record.to_csv(self.csv_path)
            log.info("run complete; trace written to %s", self.csv_path)

    def _on_row(self, row: RunRow) -> None:
        with self._lock:
            self._rows.append(row)

    def next_payload(self) -> dict | None:
        item = self.oracle.pending()
        if item is None:
            return None
        with self._lock:
            iteration = len(self._rows) + 1
        return {"item_id": item.id, "url": item.url, "iteration": iteration}

    def submit(self, item_id: str, label: int) -> None:
        self.oracle.submit(item_id, label)

    def status(self) -> dict:
        with self._lock:
            rows = list(self._rows)
        n_pos = rows[-1].n_pos if rows else 0
        n_neg = rows[-1].n_neg if rows else 0
        return {
            "iteration": len(rows),
            "budget": self.budget,
            "n_pos": n_pos,
            "n_neg": n_neg,
            "auc_history": [r.auc for r in rows],
        }

    def done(self) -> bool:
        with self._lock:
            return self._record is not None

    def error(self) -> BaseException | None:
        with self._lock:
            return self._error

    def stop(self, timeout: float = 10.0) -> None:
        self.oracle.close()
        self._thread.join(timeout=timeout)

    def wait(self, timeout: float | None = None) -> bool:
        self._thread.join(timeout=timeout)
        return not self._thread.is_alive()


class _QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        pass


class LabelingService:
    """Threaded HTTP server wrapping a HumanRunController."""

    def __init__(self, controller: HumanRunController, host: str = "127.0.0.1", port: int = 0):
        self.controller = controller
        self._httpd = _QuietServer((host, port), _make_handler(controller))
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self._httpd.server_address[0]}:{self.port}"

    def start(self) -> "LabelingService":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
        self.controller.stop()

    def __enter__(self) -> "LabelingService":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(controller: HumanRunController):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            log.debug("http: " + fmt, *args)

        def _cors(self) -> None:
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")

        def _reply(self, status: int, payload: dict | None = None) -> None:
            body = json.dumps(payload).encode("utf-8") if payload is not None else b""
            self.send_response(status)
            self._cors()
            if body:
                self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            if body:
                self.wfile.write(body)

        def do_OPTIONS(self) -> None:
            self._reply(204)

        def do_GET(self) -> None:
            if self.path == "/api/next":
                payload = controller.next_payload()
                if payload is None:
                    self._reply(204)
                else:
                    self._reply(200, payload)
            elif self.path == "/api/status":
                self._reply(200, controller.status())
            else:
                self._reply(404, {"error": f"unknown path {self.path}"})

        def do_POST(self) -> None:
            if self.path != "/api/label":
                self._reply(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length) or b"{}")
                item_id = payload["item_id"]
                label = payload["label"]
            except (ValueError, KeyError):
                self._reply(400, {"error": "body must be {'item_id': str, 'label': 0|1}"})
                return
            if label not in (0, 1):
                self._reply(400, {"error": "label must be 0 or 1"})
                return
            try:
                controller.submit(str(item_id), int(label))
            except KeyError as exc:
                self._reply(409, {"error": str(exc)})
                return
            self._reply(200, {"ok": True})

    return Handler


def serve_labeling(controller: HumanRunController, host: str = "127.0.0.1",
                   port: int = 0) -> LabelingService:
    controller.start()
    return LabelingService(controller, host=host, port=port).start()
