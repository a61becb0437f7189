import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

import sentecon
from sentecon.config import from_dict


@pytest.fixture(scope="session")
def default_run():
    """One full default run (240 months, 100 agents, precautionary backend),
    shared by the tests that only inspect its output."""
    return sentecon.run(from_dict({}))


class MockLLMServer:
    """Local OpenAI-style chat-completion endpoint with a scripted behavior
    per request: each entry of ``script`` is either an HTTP status code to
    fail with, or a string to return as the completion content. The last
    entry repeats once the script is exhausted."""

    def __init__(self, script):
        self.script = list(script)
        self.requests = []  # (monotonic time, body dict)
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                import time
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                server.requests.append((time.monotonic(), body))
                step = server.script[min(len(server.requests) - 1,
                                         len(server.script) - 1)]
                if isinstance(step, int):
                    self.send_response(step)
                    self.end_headers()
                    self.wfile.write(b"error")
                    return
                payload = {"choices": [{"message": {"content": step}}]}
                data = json.dumps(payload).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = HTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever,
                                       daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def mock_llm():
    servers = []

    def factory(script):
        server = MockLLMServer(script)
        servers.append(server)
        return server

    yield factory
    for server in servers:
        server.close()
