"""scan -> resolve -> check -> suggest, and the report built from it."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .compatibility import Suggestion, Violation, check_tree, parent_map, suggest
from .corpus import Corpus, load_corpus
from .detector import DICE_THRESHOLD, ClassifierModel, Detector, load_model
from .providers import DisabledProvider, FixtureProvider, HttpProvider, Provider
from .resolver import ArtifactCache, Resolver, extract_dependencies
from .scanner import ModuleNode, Notice, ScanReport, scan

CACHE_ENV = "LICAUDIT_CACHE_DIR"
SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


def default_cache_dir() -> Path:
    if os.environ.get(CACHE_ENV):
        return Path(os.environ[CACHE_ENV])
    base = os.environ.get("XDG_CACHE_HOME") or str(Path.home() / ".cache")
    return Path(base) / "licaudit"


@dataclass
class RunConfig:
    project_root: Path = Path(".")
    format: str = "text"
    provider: str = "off"
    provider_url: str | None = None
    fixtures_dir: Path | None = None
    model_path: Path | None = None
    posterior_threshold: float | None = None
    matrix_dir: Path | None = None
    cache_dir: Path | None = None
    artifact_dir: Path | None = None
    fail_on: str = "violations"

    def validate(self) -> None:
        if self.format not in ("text", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.fail_on not in ("violations", "never"):
            raise ConfigError(f"unknown --fail-on value {self.fail_on!r}")
        if self.provider == "live" and not self.provider_url:
            raise ConfigError("--provider live requires --provider-url")
        if self.provider == "fixtures" and (self.fixtures_dir is None or not self.fixtures_dir.is_dir()):
            raise ConfigError("--provider fixtures requires an existing --fixtures-dir")
        if self.provider not in ("live", "fixtures", "off"):
            raise ConfigError(f"unknown provider mode {self.provider!r}")
        for flag, path in (("--model", self.model_path),):
            if path is not None and not path.is_file():
                raise ConfigError(f"{flag} {path} is not a file")
        for flag, path in (("--matrix-dir", self.matrix_dir), ("--artifact-dir", self.artifact_dir)):
            if path is not None and not path.is_dir():
                raise ConfigError(f"{flag} {path} is not a directory")


@dataclass
class Toolkit:
    """Loaded corpus, model and provider for one run."""

    corpus: Corpus
    model: ClassifierModel
    detector: Detector
    resolver: Resolver

    @classmethod
    def from_config(cls, config: RunConfig) -> "Toolkit":
        config.validate()
        corpus = load_corpus(config.matrix_dir)
        model = load_model(config.model_path)
        if config.posterior_threshold is not None:
            model = model.with_threshold(config.posterior_threshold)
        detector = Detector(model, corpus, DICE_THRESHOLD)
        provider: Provider
        if config.provider == "live":
            provider = HttpProvider(config.provider_url or "", config.cache_dir or default_cache_dir())
        elif config.provider == "fixtures":
            provider = FixtureProvider(config.fixtures_dir)  # type: ignore[arg-type]
        else:
            provider = DisabledProvider()
        artifact_dir = config.artifact_dir
        if artifact_dir is None:
            default = Path.home() / ".m2" / "repository"
            artifact_dir = default if default.is_dir() else None
        resolver = Resolver(provider, ArtifactCache(artifact_dir), detector, corpus)
        return cls(corpus, model, detector, resolver)


@dataclass
class Analysis:
    scan: ScanReport
    violations: list[Violation]
    suggestions: dict[str, Suggestion]
    warnings: list[Notice] = field(default_factory=list)

    @property
    def root(self) -> ModuleNode:
        return self.scan.root


def analyze(root_path: Path | str, toolkit: Toolkit) -> Analysis:
    report = scan(root_path, toolkit.detector)
    warnings = list(report.warnings)
    root = Path(root_path)
    for module in report.modules():
        directory = root if module.path == "." else root / module.path
        deps = extract_dependencies(directory, warnings, module.path)
        module.dependencies = toolkit.resolver.resolve_all(deps, warnings)
    violations = check_tree(report.root, toolkit.corpus, warnings)
    parents = parent_map(report.root)
    suggestions = {
        m.path: suggest(m, parents.get(m.path), toolkit.corpus) for m in report.modules()
    }
    return Analysis(report, violations, suggestions, _dedupe(warnings))


def _dedupe(warnings: list[Notice]) -> list[Notice]:
    seen: set[Notice] = set()
    out = []
    for notice in warnings:
        if notice not in seen:
            seen.add(notice)
            out.append(notice)
    return out


def build_report(analysis: Analysis, corpus: Corpus) -> dict[str, Any]:
    modules = []
    parents = parent_map(analysis.root)
    for module in analysis.root.walk():
        declared = module.declared_license
        modules.append(
            {
                "path": module.path,
                "parent": parents[module.path].path if module.path in parents else None,
                "license_file": declared[0] if declared else None,
                "detection": declared[1].to_dict() if declared else None,
                "effective_license": module.effective_license.value,
                "inherited": declared is None,
                "dependencies": [d.to_dict() for d in module.dependencies],
            }
        )
    deps = [d for m in analysis.root.walk() for d in m.dependencies]
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "licaudit", "version": __version__},
        "matrix_version": corpus.version,
        "project": {
            "name": analysis.scan.root_path.resolve().name,
            "license": analysis.root.effective_license.value,
        },
        "modules": modules,
        "violations": [v.to_dict() for v in analysis.violations],
        "suggestions": [analysis.suggestions[m.path].to_dict(corpus) for m in analysis.root.walk()],
        "warnings": [w.to_dict() for w in analysis.warnings],
        "summary": {
            "modules": len(modules),
            "dependencies": len(deps),
            "unknown_dependencies": sum(not d.resolved.supported for d in deps),
            "violations": len(analysis.violations),
        },
    }


def dump_report(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
