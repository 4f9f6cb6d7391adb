from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from conftest import PROVIDER
from licaudit.providers import (
    DisabledProvider,
    FixtureProvider,
    HttpProvider,
    ProviderError,
    fixture_filename,
)

RECORDS = {
    "org.x:lib:1.0": {"license_name": "MIT", "homepage": "https://lib.example"},
    "org.x:nulls:1.0": {"license_name": None, "homepage": None},
}


class _Handler(BaseHTTPRequestHandler):
    hits: list[str] = []

    def do_GET(self):  # noqa: N802
        type(self).hits.append(self.path)
        key = self.path.removeprefix("/package/")
        if key == "org.x:garbage:1.0":
            body = b"<html>"
        elif key in RECORDS:
            body = json.dumps(RECORDS[key]).encode()
        else:
            self.send_response(404)
            self.end_headers()
            return
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    _Handler.hits = []
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()
    httpd.server_close()


def test_fixture_filename():
    assert fixture_filename("junit", "junit", "4.13.2") == "junit__junit__4.13.2.json"


def test_fixture_provider_hit_and_miss():
    provider = FixtureProvider(PROVIDER)
    record = provider.fetch("junit", "junit", "4.13.2")
    assert record is not None and record.license_name
    assert provider.fetch("org.nowhere", "nothing", "0") is None


def test_fixture_provider_rejects_bad_json(tmp_path):
    (tmp_path / fixture_filename("g", "a", "1")).write_text("[1, 2")
    with pytest.raises(ProviderError):
        FixtureProvider(tmp_path).fetch("g", "a", "1")


def test_fixture_provider_rejects_wrong_types(tmp_path):
    (tmp_path / fixture_filename("g", "a", "1")).write_text('{"license_name": 5}')
    with pytest.raises(ProviderError):
        FixtureProvider(tmp_path).fetch("g", "a", "1")


def test_disabled_provider():
    assert DisabledProvider().fetch("g", "a", "1") is None


def test_http_provider_fetch_and_cache(server, tmp_path):
    provider = HttpProvider(server, tmp_path)
    record = provider.fetch("org.x", "lib", "1.0")
    assert (record.license_name, record.homepage) == ("MIT", "https://lib.example")
    assert _Handler.hits == ["/package/org.x:lib:1.0"]
    # Second call (and a fresh instance on the same cache) is served from disk.
    assert provider.fetch("org.x", "lib", "1.0") == record
    assert HttpProvider(server, tmp_path).fetch("org.x", "lib", "1.0") == record
    assert len(_Handler.hits) == 1
    assert (tmp_path / "provider" / fixture_filename("org.x", "lib", "1.0")).is_file()


def test_http_provider_ttl_expiry(server, tmp_path):
    HttpProvider(server, tmp_path).fetch("org.x", "lib", "1.0")
    HttpProvider(server, tmp_path, ttl=-1).fetch("org.x", "lib", "1.0")
    assert len(_Handler.hits) == 2


def test_http_provider_non_200_is_absent(server, tmp_path):
    assert HttpProvider(server, tmp_path).fetch("org.x", "missing", "1.0") is None


def test_http_provider_null_fields(server):
    record = HttpProvider(server).fetch("org.x", "nulls", "1.0")
    assert record.license_name is None and record.homepage is None


def test_http_provider_bad_payload(server):
    with pytest.raises(ProviderError):
        HttpProvider(server).fetch("org.x", "garbage", "1.0")


def test_http_provider_unreachable():
    # Port 9 on localhost: nothing listens there in the sandbox.
    with pytest.raises(ProviderError):
        HttpProvider("http://127.0.0.1:9", timeout=2).fetch("g", "a", "1")


def test_http_provider_concurrent_same_key(server, tmp_path):
    provider = HttpProvider(server, tmp_path)
    results = []
    threads = [threading.Thread(target=lambda: results.append(provider.fetch("org.x", "lib", "1.0"))) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1
    assert len(_Handler.hits) == 1
