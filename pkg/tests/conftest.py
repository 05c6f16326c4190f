import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class StubTranslator:
    """Scripted translation server. ``fail_first`` requests get a 503;
    ``drop`` outputs are removed from every response; ``table`` maps words."""

    def __init__(self):
        self.fail_first = 0
        self.drop = 0
        self.table = {}
        self.garbage = False
        self.requests = []
        self._lock = threading.Lock()

    def handle(self, body):
        with self._lock:
            self.requests.append(body)
            n = len(self.requests)
        if n <= self.fail_first:
            return 503, b'{"error": "busy"}'
        if self.garbage:
            return 200, b"<html>oops</html>"
        out = [" ".join(self.table.get(w, w) for w in t.split()) for t in body["texts"]]
        if self.drop:
            out = out[:-self.drop]
        return 200, json.dumps({"translations": out}).encode()


@pytest.fixture
def stub_server():
    stub = StubTranslator()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            status, payload = stub.handle(body)
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    stub.url = f"http://127.0.0.1:{server.server_address[1]}/translate"
    yield stub
    server.shutdown()
    server.server_close()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
