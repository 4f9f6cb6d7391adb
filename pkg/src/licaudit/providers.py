"""Package-metadata providers: live HTTP, fixture directory, disabled.

All three answer one question: what license name and homepage does a
registry report for a set of Maven coordinates?
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol

log = logging.getLogger(__name__)

DEFAULT_TTL = 7 * 24 * 3600


class ProviderError(Exception):
    """The provider could not be asked (network failure, timeout, bad payload)."""


@dataclass(frozen=True)
class ProviderRecord:
    group: str
    artifact: str
    version: str
    license_name: str | None = None
    homepage: str | None = None


class Provider(Protocol):
    name: str

    def fetch(self, group: str, artifact: str, version: str) -> ProviderRecord | None:
        """Return the record, ``None`` when the provider has no entry."""


def fixture_filename(group: str, artifact: str, version: str) -> str:
    return f"{group}__{artifact}__{version}.json"


def _record_from_body(group: str, artifact: str, version: str, body: Any) -> ProviderRecord:
    if not isinstance(body, dict):
        raise ProviderError(f"{group}:{artifact}:{version}: response is not a JSON object")
    license_name, homepage = body.get("license_name"), body.get("homepage")
    for key, value in (("license_name", license_name), ("homepage", homepage)):
        if value is not None and not isinstance(value, str):
            raise ProviderError(f"{group}:{artifact}:{version}: {key} must be a string or null")
    return ProviderRecord(group, artifact, version, license_name, homepage)


class DisabledProvider:
    name = "off"

    def fetch(self, group: str, artifact: str, version: str) -> ProviderRecord | None:
        return None


class FixtureProvider:
    """Reads ``{group}__{artifact}__{version}.json`` files from a directory."""

    name = "fixtures"

    def __init__(self, directory: Path | str) -> None:
        self.directory = Path(directory)

    def fetch(self, group: str, artifact: str, version: str) -> ProviderRecord | None:
        path = self.directory / fixture_filename(group, artifact, version)
        try:
            body = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderError(f"bad fixture {path.name}: {exc}") from exc
        return _record_from_body(group, artifact, version, body)


class HttpProvider:
    """``GET <base>/package/{group}:{artifact}:{version}`` with an on-disk TTL cache."""

    name = "live"

    def __init__(
        self,
        base_url: str,
        cache_dir: Path | str | None = None,
        ttl: float = DEFAULT_TTL,
        timeout: float = 10.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.cache_dir = Path(cache_dir) / "provider" if cache_dir is not None else None
        self.ttl = ttl
        self.timeout = timeout
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def url(self, group: str, artifact: str, version: str) -> str:
        coords = urllib.parse.quote(f"{group}:{artifact}:{version}", safe=":")
        return f"{self.base_url}/package/{coords}"

    def fetch(self, group: str, artifact: str, version: str) -> ProviderRecord | None:
        key = fixture_filename(group, artifact, version)
        with self._lock(key):
            cached = self._read_cache(key)
            if cached is not None:
                body = cached.get("body")
                return None if body is None else _record_from_body(group, artifact, version, body)
            body = self._request(group, artifact, version)
            self._write_cache(key, body)
        return None if body is None else _record_from_body(group, artifact, version, body)

    def _request(self, group: str, artifact: str, version: str) -> Any:
        request = urllib.request.Request(self.url(group, artifact, version), headers={"Accept": "application/json"})
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                if response.status != 200:
                    return None
                return json.loads(response.read().decode("utf-8"))
        except urllib.error.HTTPError:
            # Any non-200 answer means "no record", not a failure.
            return None
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderError(f"{group}:{artifact}:{version}: {exc}") from exc
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ProviderError(f"{group}:{artifact}:{version}: invalid JSON response") from exc

    def _read_cache(self, key: str) -> dict | None:
        if self.cache_dir is None:
            return None
        try:
            entry = json.loads((self.cache_dir / key).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        if time.time() - entry.get("fetched_at", 0) > self.ttl:
            return None
        return entry

    def _write_cache(self, key: str, body: Any) -> None:
        if self.cache_dir is None:
            return
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.cache_dir, prefix=".tmp-")
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump({"fetched_at": time.time(), "body": body}, handle)
            os.replace(tmp, self.cache_dir / key)
        except OSError as exc:
            log.warning("cannot write provider cache entry %s: %s", key, exc)
