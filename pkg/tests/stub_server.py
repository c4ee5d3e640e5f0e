"""Local stand-in for an LLM completion endpoint."""

from __future__ import annotations

import json
import threading
import time
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _Handler(BaseHTTPRequestHandler):
    requests: list = []

    def log_message(self, *args):  # keep test output quiet
        pass

    def _reply(self, status: int, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        payload = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests.append((self.path, payload))
        if self.path == "/echo":
            self._reply(200, json.dumps({"completion": payload["prompt"]}).encode())
        elif self.path == "/fail":
            self._reply(500, b'{"error":"boom"}')
        elif self.path == "/slow":
            time.sleep(1.5)
            self._reply(200, b'{"completion":"late"}')
        elif self.path == "/garbage":
            self._reply(200, b"<html>")
        else:
            self._reply(200, b'{"text":"wrong field"}')


@contextmanager
def stub_server():
    _Handler.requests = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}", _Handler.requests
    finally:
        server.shutdown()
        server.server_close()
