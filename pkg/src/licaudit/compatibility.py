"""License incompatibility checks and license suggestions.

Two kinds of violation are reported: a library whose license does not admit
the license of the module using it, and a submodule whose declared license
does not admit its parent's license. Suggestions intersect the
compatibility sets of everything that constrains a module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .corpus import SUPPORTED, Corpus, LicenseId, default_corpus
from .scanner import ModuleNode, Notice

LIBRARY_VS_MODULE = "library-vs-module"
SUBMODULE_VS_PARENT = "submodule-vs-parent"


@dataclass(frozen=True)
class Violation:
    kind: str
    subject_license: LicenseId
    context_license: LicenseId
    module_path: str
    dependency: str | None = None

    def __post_init__(self) -> None:
        if (self.kind == LIBRARY_VS_MODULE) != (self.dependency is not None):
            raise ValueError(f"{self.kind} violation must {'' if self.kind == LIBRARY_VS_MODULE else 'not '}name a dependency")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject_license": self.subject_license.value,
            "context_license": self.context_license.value,
            "module": self.module_path,
            "dependency": self.dependency,
        }

    def describe(self) -> str:
        if self.kind == LIBRARY_VS_MODULE:
            return (
                f"{self.module_path}: library {self.dependency} ({self.subject_license}) "
                f"cannot be used in a module licensed {self.context_license}"
            )
        return (
            f"{self.module_path}: submodule license {self.subject_license} "
            f"is incompatible with parent license {self.context_license}"
        )


@dataclass(frozen=True)
class Constraint:
    license: LicenseId
    origin: str  # dependency coordinates or "submodule <path>" / "parent <path>"
    module_path: str


@dataclass
class Suggestion:
    module_path: str
    candidates: frozenset[LicenseId]
    recommended: LicenseId | None
    conflicted: bool
    constraints: list[Constraint] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    def conflicting_pairs(self, corpus: Corpus | None = None) -> list[tuple[Constraint, Constraint]]:
        """Constraint pairs whose allowed sets are already disjoint on their own."""
        corpus = corpus or default_corpus()
        pairs = []
        for a, b in combinations(self.constraints, 2):
            if not (_allowed(a, corpus) & _allowed(b, corpus)):
                pairs.append((a, b))
        return pairs

    def to_dict(self, corpus: Corpus | None = None) -> dict:
        corpus = corpus or default_corpus()
        return {
            "module": self.module_path,
            "candidates": sorted((c.value for c in self.candidates), key=lambda v: corpus.rank(LicenseId(v))),
            "recommended": self.recommended.value if self.recommended else None,
            "conflicted": self.conflicted,
            "constraints": [
                {"license": c.license.value, "origin": c.origin, "module": c.module_path} for c in self.constraints
            ],
            "conflicting_pairs": [[a.origin, b.origin] for a, b in self.conflicting_pairs(corpus)],
            "caveats": list(self.caveats),
        }


def _allowed(constraint: Constraint, corpus: Corpus) -> frozenset[LicenseId]:
    if constraint.origin.startswith("parent "):
        # The module's own license L must admit the parent's license.
        return frozenset(l for l in SUPPORTED if constraint.license in corpus.compatible(l))
    return corpus.compatible(constraint.license)


def check_library(
    module_license: LicenseId,
    library_license: LicenseId,
    *,
    module_path: str = ".",
    dependency: str = "",
    corpus: Corpus | None = None,
    warnings: list[Notice] | None = None,
) -> Violation | None:
    corpus = corpus or default_corpus()
    label = f"{module_path}: {dependency}" if dependency else module_path
    if not library_license.supported:
        if warnings is not None:
            warnings.append(Notice(module_path, f"unknown library license for {dependency or 'library'}; compatibility not checked"))
        return None
    if module_license is LicenseId.UNKNOWN:
        if warnings is not None:
            warnings.append(Notice(module_path, f"module license unrecognized; {label} not checked"))
        return None
    if module_license in corpus.compatible(library_license):
        return None
    return Violation(LIBRARY_VS_MODULE, library_license, module_license, module_path, dependency or "?")


def check_submodule(
    parent_license: LicenseId,
    child_license: LicenseId,
    *,
    declared: bool = True,
    module_path: str = ".",
    corpus: Corpus | None = None,
    warnings: list[Notice] | None = None,
) -> Violation | None:
    if not declared:
        return None
    corpus = corpus or default_corpus()
    if not child_license.supported or parent_license is LicenseId.UNKNOWN:
        if warnings is not None:
            warnings.append(Notice(module_path, "submodule or parent license unrecognized; pair not checked"))
        return None
    if parent_license in corpus.compatible(child_license):
        return None
    return Violation(SUBMODULE_VS_PARENT, child_license, parent_license, module_path)


def check_tree(
    root: ModuleNode, corpus: Corpus | None = None, warnings: list[Notice] | None = None
) -> list[Violation]:
    """All violations, ordered by module path then dependency declaration order."""
    corpus = corpus or default_corpus()
    found: list[tuple[str, int, Violation]] = []

    def visit(node: ModuleNode, parent: ModuleNode | None) -> None:
        if parent is not None:
            v = check_submodule(
                parent.effective_license, node.effective_license, declared=node.declared,
                module_path=node.path, corpus=corpus, warnings=warnings,
            )
            if v:
                found.append((node.path, -1, v))
        for index, dep in enumerate(node.dependencies):
            v = check_library(
                node.effective_license, dep.resolved, module_path=node.path,
                dependency=dep.coordinates, corpus=corpus, warnings=warnings,
            )
            if v:
                found.append((node.path, index, v))
        for child in node.children:
            visit(child, node)

    visit(root, None)
    found.sort(key=lambda item: (item[0], item[1]))
    return [v for _, _, v in found]


def constraints_for(module: ModuleNode) -> tuple[list[Constraint], list[str]]:
    """Everything the license of ``module`` must satisfy.

    Covers the module's own libraries, libraries of descendants that inherit
    its license, and declared licenses of the first declared descendants.
    """
    constraints: list[Constraint] = []
    caveats: list[str] = []

    def collect(node: ModuleNode) -> None:
        for dep in node.dependencies:
            if dep.resolved.supported:
                constraints.append(Constraint(dep.resolved, dep.coordinates, node.path))
            else:
                caveats.append(f"{node.path}: {dep.coordinates} has an unknown license and was not considered")
        for child in node.children:
            if child.declared:
                if child.effective_license.supported:
                    constraints.append(Constraint(child.effective_license, f"submodule {child.path}", child.path))
                else:
                    caveats.append(f"{child.path}: declared license not recognized and was not considered")
            else:
                collect(child)

    collect(module)
    return constraints, caveats


def suggest(
    module: ModuleNode,
    parent: ModuleNode | None = None,
    corpus: Corpus | None = None,
) -> Suggestion:
    corpus = corpus or default_corpus()
    constraints, caveats = constraints_for(module)
    if parent is not None and parent.effective_license.supported:
        constraints.append(Constraint(parent.effective_license, f"parent {parent.path}", parent.path))
    candidates = frozenset(SUPPORTED)
    for constraint in constraints:
        candidates &= _allowed(constraint, corpus)
    recommended = corpus.most_permissive(candidates) if candidates else None
    return Suggestion(
        module.path, candidates, recommended, conflicted=not candidates and bool(constraints),
        constraints=constraints, caveats=caveats,
    )


def suggest_for_licenses(libraries: Iterable[LicenseId], corpus: Corpus | None = None) -> Suggestion:
    """Suggestion for a bare set of library licenses (no module tree)."""
    from .resolver import Dependency

    node = ModuleNode(".")
    for i, license_id in enumerate(libraries):
        node.dependencies.append(Dependency("lib", f"lib{i}", "1", resolved=license_id))
    return suggest(node, corpus=corpus)


def parent_map(root: ModuleNode) -> dict[str, ModuleNode]:
    out: dict[str, ModuleNode] = {}
    for node in root.walk():
        for child in node.children:
            out[child.path] = node
    return out
