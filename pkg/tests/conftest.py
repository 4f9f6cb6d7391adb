from __future__ import annotations

import shutil
import zipfile
from pathlib import Path

import pytest

from licaudit.corpus import LicenseId, default_corpus

FIXTURES = Path(__file__).parent / "fixtures"
PROJECTS = FIXTURES / "projects"
PROVIDER = FIXTURES / "provider"


def canonical(license_id: LicenseId | str) -> str:
    return default_corpus().lookup(LicenseId(license_id)).canonical_text


def write_pom(directory: Path, deps=(), modules=(), artifact: str = "app") -> Path:
    """Minimal pom; ``deps`` holds "g:a:v" strings or ("g:a:v", scope) pairs."""
    directory.mkdir(parents=True, exist_ok=True)
    dep_xml = []
    for dep in deps:
        coords, scope = (dep, None) if isinstance(dep, str) else dep
        g, a, v = coords.split(":")
        scope_xml = f"\n      <scope>{scope}</scope>" if scope else ""
        dep_xml.append(
            f"    <dependency>\n      <groupId>{g}</groupId>\n      <artifactId>{a}</artifactId>\n"
            f"      <version>{v}</version>{scope_xml}\n    </dependency>\n"
        )
    module_xml = "".join(f"    <module>{m}</module>\n" for m in modules)
    path = directory / "pom.xml"
    path.write_text(
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<project xmlns="http://maven.apache.org/POM/4.0.0">\n'
        "  <modelVersion>4.0.0</modelVersion>\n"
        f"  <groupId>org.fixture</groupId>\n  <artifactId>{artifact}</artifactId>\n  <version>1.0</version>\n"
        f"  <modules>\n{module_xml}  </modules>\n"
        f"  <dependencies>\n{''.join(dep_xml)}  </dependencies>\n"
        "</project>\n",
        encoding="utf-8",
    )
    return path


def write_license(directory: Path, license_id: LicenseId | str, name: str = "LICENSE") -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    path.write_text(canonical(license_id), encoding="utf-8")
    return path


def make_jar(path: Path, entries: dict[str, str | bytes]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w") as archive:
        for name, data in entries.items():
            archive.writestr(name, data)
    return path


def embedded_pom(license_name: str) -> str:
    return (
        '<?xml version="1.0"?>\n<project xmlns="http://maven.apache.org/POM/4.0.0">\n'
        "  <groupId>g</groupId><artifactId>a</artifactId><version>1</version>\n"
        f"  <licenses>\n    <license>\n      <name>{license_name}</name>\n    </license>\n  </licenses>\n"
        "</project>\n"
    )


_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "detail": []})
    if report.failed:
        entry["passed"] = False
        entry["detail"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] else "FAIL"
        suffix = f" (failed: {', '.join(entry['detail'])})" if entry["detail"] else ""
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}{suffix}")


@pytest.fixture(autouse=True)
def _isolated_home(tmp_path_factory, monkeypatch):
    # Keep runs hermetic: no real ~/.m2 jars, no shared provider cache.
    home = tmp_path_factory.mktemp("home")
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.setenv("LICAUDIT_CACHE_DIR", str(home / "cache"))


@pytest.fixture
def corpus():
    return default_corpus()


@pytest.fixture
def project_copy(tmp_path):
    """Copy a committed fixture project into tmp_path and return its root."""

    def _copy(name: str) -> Path:
        target = tmp_path / name
        shutil.copytree(PROJECTS / name, target)
        return target

    return _copy
