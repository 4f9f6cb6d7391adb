"""Tolerant readers for Maven and Gradle build files.

Nothing here evaluates a build: Maven poms are read as XML, Gradle scripts
by line-level pattern extraction. Every function reports line numbers so
callers can point back at the declaration.
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

POM = "pom.xml"
GRADLE_BUILD = ("build.gradle", "build.gradle.kts")
GRADLE_SETTINGS = ("settings.gradle", "settings.gradle.kts")


class BuildFileError(Exception):
    pass


@dataclass(frozen=True)
class Coordinate:
    group: str
    artifact: str
    version: str
    line: int
    scope: str = "compile"
    source: str = ""

    @property
    def test_scope(self) -> bool:
        return self.scope == "test" or self.scope.startswith("test")

    def __str__(self) -> str:
        return f"{self.group}:{self.artifact}:{self.version}"


@dataclass
class XmlNode:
    tag: str
    line: int
    children: list["XmlNode"] = field(default_factory=list)
    text: str = ""

    def child(self, tag: str) -> "XmlNode | None":
        for node in self.children:
            if node.tag == tag:
                return node
        return None

    def children_named(self, tag: str) -> list["XmlNode"]:
        return [node for node in self.children if node.tag == tag]

    def path(self, *tags: str) -> list["XmlNode"]:
        nodes = [self]
        for tag in tags:
            nodes = [c for n in nodes for c in n.children_named(tag)]
        return nodes

    def value(self, tag: str) -> str | None:
        node = self.child(tag)
        return node.text.strip() if node is not None else None


def parse_xml(data: bytes | str) -> XmlNode:
    """Parse into a namespace-stripped tree that remembers element line numbers."""
    parser = xml.parsers.expat.ParserCreate()
    stack: list[XmlNode] = []
    root: list[XmlNode] = []

    def start(name: str, attrs: dict) -> None:
        node = XmlNode(name.rsplit(":", 1)[-1], parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(name: str) -> None:
        stack.pop()

    def chars(text: str) -> None:
        if stack:
            stack[-1].text += text

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError as exc:
        raise BuildFileError(f"malformed XML: {exc}") from exc
    if not root:
        raise BuildFileError("empty XML document")
    return root[0]


# ---------------------------------------------------------------- Maven

_PROPERTY_RE = re.compile(r"\$\{([^}]+)\}")


@dataclass
class Pom:
    root: XmlNode
    path: Path | None = None

    @classmethod
    def read(cls, path: Path) -> "Pom":
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise BuildFileError(f"cannot read {path.name}: {exc}") from exc
        pom = cls(parse_xml(data), path)
        if pom.root.tag != "project":
            raise BuildFileError(f"{path.name}: root element is <{pom.root.tag}>, expected <project>")
        return pom

    @property
    def modules(self) -> list[str]:
        return [m.text.strip() for m in self.root.path("modules", "module") if m.text.strip()]

    def properties(self) -> dict[str, str]:
        props: dict[str, str] = {}
        parent = self.root.child("parent")
        if parent is not None:
            for key in ("groupId", "version"):
                if parent.value(key):
                    props[f"project.parent.{key}"] = parent.value(key)  # type: ignore[assignment]
                    props[f"project.{key}"] = parent.value(key)  # type: ignore[assignment]
        for key in ("groupId", "artifactId", "version"):
            if self.root.value(key):
                props[f"project.{key}"] = self.root.value(key)  # type: ignore[assignment]
        if "project.version" in props:
            props["version"] = props["project.version"]
        for node in self.root.path("properties"):
            for prop in node.children:
                props[prop.tag] = prop.text.strip()
        return props

    def managed_versions(self) -> dict[tuple[str, str], str]:
        out = {}
        for dep in self.root.path("dependencyManagement", "dependencies", "dependency"):
            group, artifact, version = dep.value("groupId"), dep.value("artifactId"), dep.value("version")
            if group and artifact and version:
                out[(group, artifact)] = version
        return out

    def licenses(self) -> list[str]:
        return [n.value("name") or "" for n in self.root.path("licenses", "license") if n.value("name")]


def interpolate(value: str, props: dict[str, str]) -> str:
    for _ in range(5):
        new = _PROPERTY_RE.sub(lambda m: props.get(m.group(1), m.group(0)), value)
        if new == value:
            break
        value = new
    return value


def pom_dependencies(
    pom: Pom, inherited_props: dict[str, str] | None = None,
    inherited_managed: dict[tuple[str, str], str] | None = None,
) -> tuple[list[Coordinate], list[str]]:
    """Direct ``project/dependencies/dependency`` entries with their line numbers."""
    props = dict(inherited_props or {})
    props.update(pom.properties())
    managed = dict(inherited_managed or {})
    managed.update(pom.managed_versions())
    deps: list[Coordinate] = []
    problems: list[str] = []
    source = pom.path.name if pom.path else POM
    for node in pom.root.path("dependencies", "dependency"):
        group = interpolate(node.value("groupId") or "", props)
        artifact = interpolate(node.value("artifactId") or "", props)
        raw_version = node.value("version")
        if raw_version is None:
            raw_version = managed.get((group, artifact), "")
        version = interpolate(raw_version, props)
        scope = node.value("scope") or "compile"
        if not group or not artifact or not version:
            problems.append(f"line {node.line}: incomplete dependency {group or '?'}:{artifact or '?'}:{version or '?'}")
            continue
        deps.append(Coordinate(group, artifact, version, node.line, scope, source))
    return deps, problems


# ---------------------------------------------------------------- Gradle

_INCLUDE_RE = re.compile(r"^\s*include\b\s*\(?(.*?)\)?\s*$")
_QUOTED_RE = re.compile(r"""["']([^"']+)["']""")
_CONFIG = (
    r"(?P<config>implementation|api|compileOnly|runtimeOnly|compile|runtime|provided|"
    r"testImplementation|testCompileOnly|testRuntimeOnly|testCompile|testRuntime|"
    r"annotationProcessor|kapt|ksp|compileOnlyApi|testFixturesImplementation|testFixturesApi|"
    r"androidTestImplementation|debugImplementation|releaseImplementation)"
)
_STRING_DEP_RE = re.compile(
    r"^\s*" + _CONFIG + r"""\s*\(?\s*(?P<q>["'])(?P<coord>[^"'\s]+)(?P=q)"""
)
_MAP_DEP_RE = re.compile(
    r"^\s*" + _CONFIG + r"""\s*\(?\s*group\s*[:=]\s*["'](?P<group>[^"']+)["']\s*,\s*"""
    r"""name\s*[:=]\s*["'](?P<name>[^"']+)["']\s*(?:,\s*version\s*[:=]\s*["'](?P<version>[^"']+)["'])?"""
)
_ASSIGN_RE = re.compile(
    r"""^\s*(?:(?:def|val|var)\s+|(?:project\.)?ext\.)?(?P<name>[A-Za-z_]\w*)\s*=\s*["'](?P<value>[^"'$]*)["']\s*$"""
)
_EXTRA_RE = re.compile(
    r"""^\s*(?:extra\[|(?:extra\.)?set\()\s*["'](?P<name>[A-Za-z_][\w.]*)["']\s*(?:\]\s*=|,)\s*["'](?P<value>[^"'$]*)["']"""
)
_REF_RE = re.compile(r"\$\{?([A-Za-z_][\w.]*)\}?")


def _strip_comment(line: str) -> str:
    in_quote = ""
    for i, ch in enumerate(line):
        if in_quote:
            if ch == in_quote:
                in_quote = ""
        elif ch in "\"'":
            in_quote = ch
        elif line.startswith("//", i):
            return line[:i]
    return line


def _code_lines(text: str) -> Iterator[tuple[int, str]]:
    in_block = False
    for lineno, line in enumerate(text.splitlines(), 1):
        if in_block:
            if "*/" not in line:
                continue
            line = line.split("*/", 1)[1]
            in_block = False
        while "/*" in line:
            head, _, tail = line.partition("/*")
            if "*/" in tail:
                line = head + tail.split("*/", 1)[1]
            else:
                line = head
                in_block = True
        yield lineno, _strip_comment(line)


def gradle_includes(text: str) -> list[str]:
    """Project paths from ``include`` statements, mapped to relative directories."""
    dirs = []
    for _, line in _code_lines(text):
        match = _INCLUDE_RE.match(line)
        if not match:
            continue
        for project in _QUOTED_RE.findall(match.group(1)):
            parts = [p for p in project.split(":") if p]
            if parts:
                dirs.append("/".join(parts))
    return dirs


def gradle_dependencies(text: str, source: str = "build.gradle") -> tuple[list[Coordinate], list[str]]:
    variables: dict[str, str] = {}
    deps: list[Coordinate] = []
    problems: list[str] = []
    for lineno, line in _code_lines(text):
        var = _ASSIGN_RE.match(line) or _EXTRA_RE.match(line)
        if var:
            variables[var.group("name")] = var.group("value")
            continue

        def expand(value: str) -> str:
            return _REF_RE.sub(lambda m: variables.get(m.group(1), m.group(0)), value)

        match = _MAP_DEP_RE.match(line)
        if match:
            config = match.group("config")
            group, artifact, version = match.group("group"), match.group("name"), match.group("version") or ""
        else:
            match = _STRING_DEP_RE.match(line)
            if not match:
                continue
            config = match.group("config")
            coord = match.group("coord").split("@", 1)[0]
            parts = coord.split(":")
            if len(parts) < 3:
                if len(parts) == 2 or ":" in coord:
                    problems.append(f"line {lineno}: dependency {coord!r} has no version")
                continue
            group, artifact, version = parts[0], parts[1], parts[2]
        group, artifact, version = expand(group), expand(artifact), expand(version)
        if not group or not artifact or not version:
            problems.append(f"line {lineno}: incomplete dependency {group}:{artifact}:{version}")
            continue
        scope = "test" if config.startswith(("test", "androidTest")) else config
        deps.append(Coordinate(group, artifact, version, lineno, scope, source))
    return deps, problems


def build_file_kind(path: Path) -> str | None:
    name = path.name
    if name == POM or name.endswith(".pom"):
        return "maven"
    if name in GRADLE_BUILD or name.endswith((".gradle", ".gradle.kts")):
        return "gradle"
    return None
