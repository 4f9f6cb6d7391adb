"""Dependency extraction and license resolution.

Evidence for a library's license comes from three places, in priority
order: a license file inside its jar, the license name declared in the
pom embedded in the jar, and the package-metadata provider. The provider
is always asked because it is also the source of the homepage link.
"""

from __future__ import annotations

import dataclasses
import logging
import posixpath
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .buildfiles import (
    GRADLE_BUILD, POM, BuildFileError, Coordinate, Pom, gradle_dependencies, parse_xml, pom_dependencies,
)
from .corpus import Corpus, LicenseId, default_corpus
from .detector import DetectionResult, Detector, Method
from .providers import DisabledProvider, Provider, ProviderError
from .scanner import Notice, is_license_filename

log = logging.getLogger(__name__)

MAX_ENTRY_SIZE = 1 << 20
SOURCE_PRIORITY = ("jar-file", "jar-pom", "provider")
DEFAULT_MAX_IN_FLIGHT = 8


@dataclass(frozen=True)
class Evidence:
    source: str
    result: DetectionResult
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"source": self.source, "detail": self.detail}
        out.update(self.result.to_dict())
        return out


@dataclass
class Dependency:
    group: str
    artifact: str
    version: str
    evidence: list[Evidence] = field(default_factory=list)
    resolved: LicenseId = LicenseId.UNKNOWN
    homepage: str | None = None
    scope: str = "compile"
    line: int = 0
    build_file: str = ""

    @classmethod
    def from_coordinate(cls, coord: Coordinate, build_file: str = "") -> "Dependency":
        return cls(coord.group, coord.artifact, coord.version, scope=coord.scope, line=coord.line,
                   build_file=build_file or coord.source)

    @property
    def coordinates(self) -> str:
        return f"{self.group}:{self.artifact}:{self.version}"

    @property
    def test_scope(self) -> bool:
        return self.scope.startswith("test")

    def to_dict(self) -> dict:
        return {
            "coordinates": self.coordinates,
            "scope": self.scope,
            "build_file": self.build_file,
            "line": self.line,
            "resolved": self.resolved.value,
            "homepage": self.homepage,
            "evidence": [e.to_dict() for e in self.evidence],
        }


def pick_resolved(evidence: Sequence[Evidence]) -> LicenseId:
    """First recognized license in source priority order, else Unknown."""
    for source in SOURCE_PRIORITY:
        for item in evidence:
            if item.source == source and item.result.recognized:
                return item.result.license
    return LicenseId.UNKNOWN


# ---------------------------------------------------------------- extraction

def _parent_context(pom: Pom, pom_path: Path) -> tuple[dict[str, str], dict[tuple[str, str], str]]:
    """Properties and managed versions from local parent poms (``relativePath`` chain)."""
    chain: list[Pom] = []
    current, path = pom, pom_path
    for _ in range(10):
        parent = current.root.child("parent")
        if parent is None:
            break
        relative = parent.value("relativePath")
        if relative == "":
            break
        candidate = (path.parent / (relative or "../pom.xml"))
        if candidate.is_dir():
            candidate = candidate / POM
        try:
            current = Pom.read(candidate)
        except BuildFileError:
            break
        path = candidate
        chain.append(current)
    props: dict[str, str] = {}
    managed: dict[tuple[str, str], str] = {}
    for ancestor in reversed(chain):
        props.update(ancestor.properties())
        managed.update(ancestor.managed_versions())
    return props, managed


def extract_dependencies(module_dir: Path | str, warnings: list[Notice] | None = None, label: str = ".") -> list[Dependency]:
    """Directly declared dependencies, in order of appearance."""
    module_dir = Path(module_dir)
    warnings = warnings if warnings is not None else []
    prefix = "" if label == "." else f"{label}/"
    found_build_file = False
    deps: list[Dependency] = []

    pom_path = module_dir / POM
    if pom_path.is_file():
        found_build_file = True
        try:
            pom = Pom.read(pom_path)
            coords, problems = pom_dependencies(pom, *_parent_context(pom, pom_path))
        except BuildFileError as exc:
            warnings.append(Notice(prefix + POM, str(exc)))
        else:
            deps += [Dependency.from_coordinate(c, prefix + POM) for c in coords]
            warnings += [Notice(prefix + POM, p) for p in problems]

    for name in GRADLE_BUILD:
        path = module_dir / name
        if not path.is_file():
            continue
        found_build_file = True
        try:
            text = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            warnings.append(Notice(prefix + name, f"cannot read: {exc.strerror or exc}"))
            continue
        coords, problems = gradle_dependencies(text, name)
        deps += [Dependency.from_coordinate(c, prefix + name) for c in coords]
        warnings += [Notice(prefix + name, p) for p in problems]

    if not found_build_file:
        warnings.append(Notice(label, "no pom.xml or build.gradle(.kts); no dependencies extracted"))
    return deps


def dependencies_from_build_file(path: Path, warnings: list[Notice] | None = None) -> list[Dependency]:
    """Dependencies of one explicit build file (used for per-file hints)."""
    warnings = warnings if warnings is not None else []
    if path.name == POM or path.suffix == ".pom":
        pom = Pom.read(path)
        coords, problems = pom_dependencies(pom, *_parent_context(pom, path))
    else:
        coords, problems = gradle_dependencies(path.read_text(encoding="utf-8", errors="replace"), path.name)
    warnings += [Notice(path.name, p) for p in problems]
    return [Dependency.from_coordinate(c, path.name) for c in coords]


# ---------------------------------------------------------------- jar inspection

class ArchiveError(Exception):
    pass


def inspect_jar(
    jar_path: Path | str,
    detector: Callable[[str], DetectionResult] | None = None,
    corpus: Corpus | None = None,
    warnings: list[Notice] | None = None,
) -> list[Evidence]:
    """License evidence found inside a jar: license files and embedded pom names."""
    detector = detector or Detector()
    corpus = corpus or default_corpus()
    warnings = warnings if warnings is not None else []
    jar_path = Path(jar_path)
    evidence: list[Evidence] = []
    try:
        with zipfile.ZipFile(jar_path) as archive:
            infos = sorted((i for i in archive.infolist() if not i.is_dir()), key=lambda i: i.filename)
            license_entries = [i for i in infos if is_license_filename(posixpath.basename(i.filename))]
            pom_entries = [
                i for i in infos
                if i.filename.startswith("META-INF/maven/") and posixpath.basename(i.filename) == POM
            ]
            for info in license_entries + pom_entries:
                if info.file_size > MAX_ENTRY_SIZE:
                    warnings.append(Notice(f"{jar_path.name}!{info.filename}", "entry larger than 1 MiB skipped"))
                    continue
                data = archive.read(info)
                if info in pom_entries:
                    evidence += _pom_evidence(data, info.filename, corpus, warnings, jar_path.name)
                else:
                    result = detector(data.decode("utf-8", errors="replace"))
                    evidence.append(Evidence("jar-file", result, info.filename))
    except (zipfile.BadZipFile, zipfile.LargeZipFile, OSError, EOFError) as exc:
        raise ArchiveError(f"{jar_path.name}: {exc}") from exc
    return evidence


def _pom_evidence(data: bytes, entry: str, corpus: Corpus, warnings: list[Notice], jar_name: str) -> list[Evidence]:
    try:
        root = parse_xml(data)
    except BuildFileError as exc:
        warnings.append(Notice(f"{jar_name}!{entry}", str(exc)))
        return []
    names = [n.value("name") for n in root.path("licenses", "license")]
    out = []
    for name in filter(None, names):
        license_id = corpus.normalize_license_name(name)
        score = 1.0 if license_id.supported else 0.0
        out.append(Evidence("jar-pom", DetectionResult(license_id, Method.DECLARED_NAME, score), f"{entry}: {name}"))
    return out


# ---------------------------------------------------------------- resolution

@dataclass(frozen=True)
class ArtifactCache:
    """Local repository in the Maven layout ``group/artifact/version/artifact-version.jar``."""

    root: Path | None

    def jar_path(self, group: str, artifact: str, version: str) -> Path | None:
        if self.root is None:
            return None
        path = self.root.joinpath(*group.split("."), artifact, version, f"{artifact}-{version}.jar")
        return path if path.is_file() else None


@dataclass
class Resolver:
    provider: Provider = field(default_factory=DisabledProvider)
    cache: ArtifactCache = field(default_factory=lambda: ArtifactCache(None))
    detector: Callable[[str], DetectionResult] | None = None
    corpus: Corpus | None = None
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT

    def __post_init__(self) -> None:
        self.detector = self.detector or Detector()
        self.corpus = self.corpus or default_corpus()

    def resolve(self, dep: Dependency, warnings: list[Notice] | None = None) -> Dependency:
        warnings = warnings if warnings is not None else []
        label = dep.coordinates
        evidence: list[Evidence] = []
        jar = self.cache.jar_path(dep.group, dep.artifact, dep.version)
        if jar is not None:
            try:
                evidence += inspect_jar(jar, self.detector, self.corpus, warnings)
            except ArchiveError as exc:
                warnings.append(Notice(label, f"cannot read jar: {exc}"))

        homepage = dep.homepage
        try:
            record = self.provider.fetch(dep.group, dep.artifact, dep.version)
        except ProviderError as exc:
            warnings.append(Notice(label, f"provider {self.provider.name} failed: {exc}; using jar evidence only"))
            record = None
        if record is not None:
            homepage = record.homepage or homepage
            if record.license_name:
                license_id = self.corpus.normalize_license_name(record.license_name)
                score = 1.0 if license_id.supported else 0.0
                evidence.append(
                    Evidence("provider", DetectionResult(license_id, Method.PROVIDER, score), record.license_name)
                )

        resolved = pick_resolved(evidence)
        claims = sorted({e.result.license.value for e in evidence if e.result.recognized})
        if len(claims) > 1:
            warnings.append(Notice(label, f"license evidence disagrees ({', '.join(claims)}); using {resolved}"))
        if not resolved.supported:
            warnings.append(Notice(label, "library license unknown"))
        return dataclasses.replace(dep, evidence=evidence, resolved=resolved, homepage=homepage)

    def resolve_all(self, deps: Sequence[Dependency], warnings: list[Notice] | None = None) -> list[Dependency]:
        """Resolve in parallel; results and warnings keep the input order."""
        per_dep: list[list[Notice]] = [[] for _ in deps]
        with ThreadPoolExecutor(max_workers=max(1, self.max_in_flight)) as pool:
            resolved = list(pool.map(lambda i: self.resolve(deps[i], per_dep[i]), range(len(deps))))
        if warnings is not None:
            for notes in per_dep:
                warnings.extend(notes)
        return resolved


def resolve(
    dep: Dependency,
    cache: ArtifactCache | None = None,
    provider: Provider | None = None,
    warnings: list[Notice] | None = None,
) -> Dependency:
    return Resolver(provider or DisabledProvider(), cache or ArtifactCache(None)).resolve(dep, warnings)


def normalize_license_name(name: str, corpus: Corpus | None = None) -> LicenseId:
    return (corpus or default_corpus()).normalize_license_name(name)
