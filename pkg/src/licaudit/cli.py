"""licaudit command line.

Exit codes: 0 success / nothing to report, 1 findings (violations,
differences, refusals), 2 usage or fatal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .analysis import Analysis, ConfigError, RunConfig, Toolkit, analyze, build_report, dump_report
from .buildfiles import BuildFileError, build_file_kind
from .compatibility import Suggestion, check_library
from .corpus import LicenseId, LicenseNotFound, parse_spdx
from .detector import ModelError, diff_against_canonical, has_changes
from .resolver import dependencies_from_build_file
from .scanner import ScanError, find_license_file

EXIT_OK, EXIT_FINDINGS, EXIT_FATAL = 0, 1, 2


class CliError(Exception):
    """Fatal, user-facing error; maps to exit code 2."""


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--provider", choices=("live", "fixtures", "off"), default=None,
                        help="package metadata source (default: inferred from --provider-url/--fixtures-dir, else off)")
    parser.add_argument("--provider-url", help="base URL of the package metadata service")
    parser.add_argument("--fixtures-dir", type=Path, help="directory of {group}__{artifact}__{version}.json files")
    parser.add_argument("--model", type=Path, help="classifier model file overriding the bundled one")
    parser.add_argument("--posterior-threshold", type=float, help="classifier acceptance threshold")
    parser.add_argument("--matrix-dir", type=Path,
                        help="directory overriding bundled data (matrix.ini, license_names.tsv, licenses/)")
    parser.add_argument("--cache-dir", type=Path, help="provider response cache (env LICAUDIT_CACHE_DIR)")
    parser.add_argument("--artifact-dir", type=Path, help="local Maven repository (default ~/.m2/repository)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="licaudit", description="License detection and compatibility checks for Java projects.")
    parser.add_argument("--version", action="version", version=f"licaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="scan a project and report licenses and violations")
    p.add_argument("root", nargs="?", type=Path, default=Path("."))
    p.add_argument("--fail-on", choices=("violations", "never"), default="violations")
    _common(p)

    p = sub.add_parser("detect", help="detect the license of a text file")
    p.add_argument("file", type=Path)
    _common(p)

    p = sub.add_parser("suggest", help="suggest a license compatible with a module's libraries")
    p.add_argument("root", nargs="?", type=Path, default=Path("."))
    p.add_argument("--module", default=".", help="module path relative to the project root")
    _common(p)

    p = sub.add_parser("create-license", help="write a LICENSE file for a module")
    p.add_argument("root", nargs="?", type=Path, default=Path("."))
    p.add_argument("--module", default=".")
    p.add_argument("--license", help="SPDX id to write (default: the suggested license)")
    p.add_argument("--force", action="store_true", help="overwrite an existing license file")
    _common(p)

    p = sub.add_parser("hints", help="list the license of each dependency declared in a build file")
    p.add_argument("build_file", type=Path)
    _common(p)

    p = sub.add_parser("diff", help="word diff of a license file against the canonical text")
    p.add_argument("file", type=Path)
    p.add_argument("--license", help="SPDX id to compare against (default: detected)")
    _common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    provider = args.provider
    if provider is None:
        provider = "live" if args.provider_url else "fixtures" if args.fixtures_dir else "off"
    return RunConfig(
        project_root=getattr(args, "root", Path(".")),
        format=args.format,
        provider=provider,
        provider_url=args.provider_url,
        fixtures_dir=args.fixtures_dir,
        model_path=args.model,
        posterior_threshold=args.posterior_threshold,
        matrix_dir=args.matrix_dir,
        cache_dir=args.cache_dir,
        artifact_dir=args.artifact_dir,
        fail_on=getattr(args, "fail_on", "violations"),
    )


def _license_arg(value: str) -> LicenseId:
    license_id = parse_spdx(value)
    if not license_id.supported:
        raise CliError(f"{value!r} is not a supported SPDX license id")
    return license_id


def _read_text(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8", errors="replace")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _analyze(config: RunConfig, toolkit: Toolkit) -> Analysis:
    if not config.project_root.is_dir():
        raise CliError(f"{config.project_root} is not a directory")
    try:
        return analyze(config.project_root, toolkit)
    except ScanError as exc:
        raise CliError(str(exc)) from exc


# ---------------------------------------------------------------- commands

def cmd_scan(config: RunConfig, toolkit: Toolkit, out: TextIO) -> int:
    analysis = _analyze(config, toolkit)
    report = build_report(analysis, toolkit.corpus)
    if config.format == "json":
        out.write(dump_report(report))
    else:
        out.write(render_scan_text(analysis, report))
    if analysis.violations and config.fail_on == "violations":
        return EXIT_FINDINGS
    return EXIT_OK


def render_scan_text(analysis: Analysis, report: dict) -> str:
    lines = [f"Project license: {report['project']['license']}", "", "Modules:"]
    for module in report["modules"]:
        source = "inherited" if module["inherited"] else module["license_file"]
        lines.append(f"  {module['path']}: {module['effective_license']} ({source})")
        for dep in module["dependencies"]:
            scope = " [test]" if dep["scope"].startswith("test") else ""
            lines.append(f"    {dep['coordinates']}{scope}: {dep['resolved']}")
    lines.append("")
    if analysis.violations:
        lines.append(f"Violations ({len(analysis.violations)}):")
        lines += [f"  {v.describe()}" for v in analysis.violations]
    else:
        lines.append("No license violations found.")
    unlicensed = [s for s in report["suggestions"] if _module_license(report, s["module"]) == "None"]
    for s in unlicensed:
        if s["recommended"]:
            lines.append(f"Module {s['module']} has no license; suggested: {s['recommended']}")
        elif s["conflicted"]:
            lines.append(f"Module {s['module']} has no license and no license satisfies all of its libraries")
    if analysis.warnings:
        lines.append("")
        lines.append("Warnings:")
        lines += [f"  {w.path}: {w.message}" for w in analysis.warnings]
    return "\n".join(lines) + "\n"


def _module_license(report: dict, path: str) -> str:
    return next(m["effective_license"] for m in report["modules"] if m["path"] == path)


def cmd_detect(config: RunConfig, toolkit: Toolkit, path: Path, out: TextIO) -> int:
    result = toolkit.detector(_read_text(path))
    if config.format == "json":
        out.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
    elif result.recognized:
        out.write(result.render() + "\n")
    else:
        out.write("Unknown\n")
    return EXIT_OK


def _module_or_fail(analysis: Analysis, module_path: str):
    module = analysis.root.find(module_path)
    if module is None:
        known = ", ".join(m.path for m in analysis.root.walk())
        raise CliError(f"no module {module_path!r} in project (modules: {known})")
    return module


def render_suggestion(suggestion: Suggestion, toolkit: Toolkit) -> str:
    corpus = toolkit.corpus
    lines = [f"Module: {suggestion.module_path}"]
    if suggestion.conflicted:
        lines.append("No license is compatible with all libraries of this module.")
        pairs = suggestion.conflicting_pairs(corpus)
        if pairs:
            lines.append("Irreconcilable constraints:")
            for a, b in pairs:
                lines.append(f"  {a.license} ({a.origin}) vs {b.license} ({b.origin})")
        lines.append("Constraint chains:")
        for c in suggestion.constraints:
            allowed = " ".join(l.value for l in sorted(corpus.compatible(c.license), key=corpus.rank))
            lines.append(f"  {c.origin} [{c.license}] allows: {allowed}")
    else:
        lines.append("Compatible licenses (most permissive first):")
        for license_id in sorted(suggestion.candidates, key=corpus.rank):
            mark = "*" if license_id == suggestion.recommended else " "
            lines.append(f"  [✓]{mark} {license_id}")
        lines.append(f"Recommended: {suggestion.recommended}")
    for caveat in suggestion.caveats:
        lines.append(f"caveat: {caveat}")
    return "\n".join(lines) + "\n"


def cmd_suggest(config: RunConfig, toolkit: Toolkit, module_path: str, out: TextIO) -> int:
    analysis = _analyze(config, toolkit)
    module = _module_or_fail(analysis, module_path)
    suggestion = analysis.suggestions[module.path]
    if config.format == "json":
        out.write(json.dumps(suggestion.to_dict(toolkit.corpus), indent=2, sort_keys=True) + "\n")
    else:
        out.write(render_suggestion(suggestion, toolkit))
    return EXIT_FINDINGS if suggestion.conflicted else EXIT_OK


def cmd_create_license(
    config: RunConfig, toolkit: Toolkit, module_path: str, license_arg: str | None, force: bool,
    out: TextIO, err: TextIO,
) -> int:
    analysis = _analyze(config, toolkit)
    module = _module_or_fail(analysis, module_path)
    directory = config.project_root if module.path == "." else config.project_root / module.path
    existing = find_license_file(directory)
    if existing is not None and not force:
        raise CliError(f"{existing} already exists; use --force to replace it")

    suggestion = analysis.suggestions[module.path]
    if license_arg is not None:
        chosen = _license_arg(license_arg)
    elif suggestion.recommended is not None:
        chosen = suggestion.recommended
    else:
        err.write("refusing to create a license: no license satisfies every library of this module\n")
        err.write(render_suggestion(suggestion, toolkit))
        return EXIT_FINDINGS

    target = directory / "LICENSE"
    text = toolkit.corpus.lookup(chosen).canonical_text
    if not text.endswith("\n"):
        text += "\n"
    if existing is not None and existing != target:
        existing.unlink()
    target.write_bytes(text.encode("utf-8"))
    out.write(f"wrote {chosen} to {target}\n")

    # Libraries the chosen license does not admit: only possible with an explicit --license.
    for constraint in suggestion.constraints:
        if constraint.origin.startswith("parent "):
            if constraint.license not in toolkit.corpus.compatible(chosen):
                err.write(f"warning: {chosen} is incompatible with parent license {constraint.license}\n")
            continue
        violation = check_library(chosen, constraint.license, module_path=constraint.module_path,
                                  dependency=constraint.origin, corpus=toolkit.corpus)
        if violation is not None:
            err.write(f"warning: {violation.describe()}\n")
    return EXIT_OK


def cmd_hints(config: RunConfig, toolkit: Toolkit, build_file: Path, out: TextIO, err: TextIO) -> int:
    if build_file_kind(build_file) is None:
        raise CliError(f"{build_file.name} is not a recognized Maven or Gradle build file")
    if not build_file.is_file():
        raise CliError(f"{build_file} does not exist")
    warnings: list = []
    try:
        deps = dependencies_from_build_file(build_file, warnings)
    except (BuildFileError, OSError) as exc:
        raise CliError(f"cannot read {build_file}: {exc}") from exc
    deps = toolkit.resolver.resolve_all(deps, warnings)
    if config.format == "json":
        payload = [{"line": d.line, "coordinates": d.coordinates, "license": d.resolved.value,
                    "homepage": d.homepage} for d in deps]
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        for d in deps:
            out.write(f"{build_file.name}:{d.line}: {d.coordinates}  {d.resolved}\n")
    for w in warnings:
        err.write(f"warning: {w.path}: {w.message}\n")
    return EXIT_OK


def render_diff(runs, context: int = 6) -> str:
    parts: list[str] = []
    for index, run in enumerate(runs):
        words = list(run.words)
        if run.op == "equal":
            first, last = index == 0, index == len(runs) - 1
            if len(words) > 2 * context:
                head = [] if first else words[:context]
                tail = [] if last else words[-context:]
                parts.append(" ".join(head + ["..."] + tail))
            else:
                parts.append(" ".join(words))
        elif run.op == "delete":
            parts.append("[-" + " ".join(words) + "-]")
        else:
            parts.append("{+" + " ".join(words) + "+}")
    return " ".join(p for p in parts if p) + "\n"


def cmd_diff(config: RunConfig, toolkit: Toolkit, path: Path, license_arg: str | None, out: TextIO) -> int:
    text = _read_text(path)
    if license_arg is not None:
        license_id = _license_arg(license_arg)
    else:
        license_id = toolkit.detector(text).license
        if not license_id.supported:
            raise CliError(f"could not detect the license of {path}; pass --license <SPDX id> to pick the baseline")
    runs = diff_against_canonical(text, license_id, toolkit.corpus)
    changed = has_changes(runs)
    if config.format == "json":
        payload = {"license": license_id.value, "changed": changed,
                   "runs": [{"op": r.op, "words": list(r.words)} for r in runs]}
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif not changed:
        out.write(f"no differences from canonical {license_id}\n")
    else:
        out.write(f"differences from canonical {license_id} ([-canonical-] {{+file+}}):\n")
        out.write(render_diff(runs))
    return EXIT_FINDINGS if changed else EXIT_OK


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_FATAL
    try:
        config = config_from_args(args)
        toolkit = Toolkit.from_config(config)
        if args.command == "scan":
            return cmd_scan(config, toolkit, out)
        if args.command == "detect":
            return cmd_detect(config, toolkit, args.file, out)
        if args.command == "suggest":
            return cmd_suggest(config, toolkit, args.module, out)
        if args.command == "create-license":
            return cmd_create_license(config, toolkit, args.module, args.license, args.force, out, err)
        if args.command == "hints":
            return cmd_hints(config, toolkit, args.build_file, out, err)
        if args.command == "diff":
            return cmd_diff(config, toolkit, args.file, args.license, out)
    except (CliError, ConfigError, ModelError, LicenseNotFound) as exc:
        err.write(f"licaudit: error: {exc}\n")
        return EXIT_FATAL
    except OSError as exc:
        err.write(f"licaudit: error: {exc}\n")
        return EXIT_FATAL
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
