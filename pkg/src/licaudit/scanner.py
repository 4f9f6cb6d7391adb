"""Module discovery, license-file lookup and parent-license inheritance."""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable

from .buildfiles import GRADLE_SETTINGS, POM, BuildFileError, Pom, gradle_includes
from .corpus import LicenseId
from .detector import DetectionResult, Detector

log = logging.getLogger(__name__)

LICENSE_STEMS = ("license", "licence", "copying", "unlicense")
LICENSE_EXTENSIONS = ("", ".txt", ".md", ".rst")
_LICENSE_NAME_RE = re.compile(
    r"^(?:%s)(?:%s)?$" % ("|".join(LICENSE_STEMS), "|".join(re.escape(e) for e in LICENSE_EXTENSIONS if e)),
    re.IGNORECASE,
)


class ScanError(Exception):
    """The project root itself cannot be scanned."""


@dataclass(frozen=True, order=True)
class Notice:
    path: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"path": self.path, "message": self.message}


@dataclass
class ModuleNode:
    path: str
    declared_license: tuple[str, DetectionResult] | None = None
    effective_license: LicenseId = LicenseId.NONE
    children: list["ModuleNode"] = field(default_factory=list)
    dependencies: list = field(default_factory=list)

    @property
    def declared(self) -> bool:
        return self.declared_license is not None

    def walk(self) -> Iterable["ModuleNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, path: str) -> "ModuleNode | None":
        wanted = _normalize_module_path(path)
        return next((m for m in self.walk() if m.path == wanted), None)


@dataclass
class ScanReport:
    root: ModuleNode
    root_path: Path
    warnings: list[Notice] = field(default_factory=list)

    def modules(self) -> list[ModuleNode]:
        return list(self.root.walk())


def _normalize_module_path(path: str) -> str:
    text = str(PurePosixPath(path.replace(os.sep, "/")))
    return "." if text in ("", ".", "./") else text.strip("/")


def _relative(path: Path, root: Path) -> str:
    rel = os.path.relpath(path, root)
    return "." if rel == "." else PurePosixPath(*Path(rel).parts).as_posix()


def is_license_filename(name: str) -> bool:
    return bool(_LICENSE_NAME_RE.match(name))


def find_license_file(module_dir: Path, warnings: list[Notice] | None = None, label: str = ".") -> Path | None:
    """Pick the module's license file; extensionless LICENSE wins, then lexicographic."""
    try:
        names = sorted(
            entry.name for entry in os.scandir(module_dir)
            if entry.is_file() and is_license_filename(entry.name)
        )
    except OSError as exc:
        if warnings is not None:
            warnings.append(Notice(label, f"cannot list directory: {exc.strerror or exc}"))
        return None
    if not names:
        return None
    names.sort(key=lambda n: (n.lower() != "license", n))
    if len(names) > 1 and warnings is not None:
        warnings.append(Notice(label, f"multiple license files {', '.join(names)}; using {names[0]}"))
    return module_dir / names[0]


def _declared_children(module_dir: Path, label: str, warnings: list[Notice]) -> list[str]:
    """Relative child directories declared by the module's pom or Gradle settings."""
    declared: list[str] = []
    pom_path = module_dir / POM
    if pom_path.is_file():
        try:
            for entry in Pom.read(pom_path).modules:
                entry = entry.removesuffix("/pom.xml").removesuffix("pom.xml").rstrip("/")
                declared.append(entry)
        except BuildFileError as exc:
            warnings.append(Notice(_join(label, POM), f"{exc}; module declarations skipped"))
    for settings in GRADLE_SETTINGS:
        path = module_dir / settings
        if path.is_file():
            try:
                declared.extend(gradle_includes(path.read_text(encoding="utf-8", errors="replace")))
            except OSError as exc:
                warnings.append(Notice(_join(label, settings), f"cannot read: {exc.strerror or exc}"))
    return declared


def _join(label: str, name: str) -> str:
    return name if label == "." else f"{label}/{name}"


def discover_modules(root_path: Path | str, warnings: list[Notice] | None = None) -> list[Path]:
    """Root plus every declared module, depth-first in declaration order."""
    root = Path(root_path)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise ScanError(f"project root {root} is not a readable directory")
    warnings = warnings if warnings is not None else []
    root_resolved = root.resolve()
    seen: set[Path] = set()
    ordered: list[Path] = []

    def visit(directory: Path) -> None:
        resolved = directory.resolve()
        if resolved in seen:
            return
        seen.add(resolved)
        ordered.append(directory)
        label = _relative(directory, root)
        for entry in _declared_children(directory, label, warnings):
            child = directory / entry
            child_resolved = child.resolve()
            if child_resolved == root_resolved or root_resolved not in child_resolved.parents:
                warnings.append(Notice(label, f"module {entry!r} lies outside the project root; ignored"))
                continue
            if not child.is_dir():
                warnings.append(Notice(label, f"declared module {entry!r} does not exist"))
                continue
            visit(child)

    visit(root)
    return ordered


def read_license_text(path: Path) -> str:
    return path.read_bytes().decode("utf-8", errors="replace")


def scan(
    root_path: Path | str,
    detector: Callable[[str], DetectionResult] | None = None,
) -> ScanReport:
    """Build the module tree, detect declared licenses and apply inheritance."""
    root = Path(root_path)
    detector = detector or Detector()
    warnings: list[Notice] = []
    module_dirs = discover_modules(root, warnings)

    nodes: list[ModuleNode] = []
    for directory in module_dirs:
        label = _relative(directory, root)
        node = ModuleNode(label)
        license_file = find_license_file(directory, warnings, label)
        if license_file is not None:
            file_label = _join(label, license_file.name)
            try:
                result = detector(read_license_text(license_file))
            except OSError as exc:
                warnings.append(Notice(file_label, f"cannot read license file: {exc.strerror or exc}"))
            else:
                node.declared_license = (file_label, result)
                if not result.recognized:
                    warnings.append(
                        Notice(file_label, f"license not recognized (best {result.method} score {result.score:.3f})")
                    )
        nodes.append(node)

    root_node = _assemble(nodes)
    _inherit(root_node, LicenseId.NONE)
    return ScanReport(root_node, root, warnings)


def _assemble(nodes: list[ModuleNode]) -> ModuleNode:
    """Attach each module to its nearest ancestor module directory."""
    root = nodes[0]
    by_path = {n.path: n for n in nodes}
    for node in nodes[1:]:
        parent = root
        for ancestor in PurePosixPath(node.path).parents:
            candidate = by_path.get(str(ancestor) if str(ancestor) != "." else ".")
            if candidate is not None:
                parent = candidate
                break
        parent.children.append(node)
    return root


def _inherit(node: ModuleNode, parent_license: LicenseId) -> None:
    if node.declared_license is not None:
        # A present but unrecognized file keeps Unknown rather than inheriting.
        node.effective_license = node.declared_license[1].license
    else:
        node.effective_license = parent_license
    for child in node.children:
        _inherit(child, node.effective_license)
