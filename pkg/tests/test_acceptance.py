"""Numbered acceptance criteria; the terminal summary prints one line per criterion."""

from __future__ import annotations

import io
import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

import test_properties
from conftest import PROJECTS, PROVIDER, canonical, write_license, write_pom
from licaudit.cli import EXIT_FINDINGS, EXIT_OK, main
from licaudit.compatibility import LIBRARY_VS_MODULE, check_library, suggest_for_licenses
from licaudit.corpus import SUPPORTED, LicenseId, default_corpus
from licaudit.detector import DICE_THRESHOLD, Detector, Method, detect, detect_dice, load_model
from oracles import mutate_unique_tokens, oracle_dice, oracle_tokens

REPO = Path(__file__).resolve().parents[1]
L = LicenseId


def run(*argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


# ---------------------------------------------------------------- 1

@pytest.mark.acceptance(1, "corpus closure for all 16 licenses (pipeline and Dice alone, < 5 s)")
def test_corpus_closure():
    corpus = default_corpus()
    detector = Detector(load_model(), corpus)
    start = time.perf_counter()
    for license_id in SUPPORTED:
        text = corpus.lookup(license_id).canonical_text
        assert detector(text).license is license_id
        dice_only = detect_dice(text, corpus)
        assert dice_only.license is license_id and dice_only.score == 1.0
    for license_id in corpus.dice_only_licenses:
        assert detector(corpus.lookup(license_id).canonical_text).method is Method.DICE
    assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------- 2

RATES = (0.01, 0.02, 0.05, 0.10, 0.25)
SEEDS = range(10)


@pytest.mark.acceptance(2, "Dice mutation battery: monotone, boundary brackets 0.98, oracle-checked (< 30 s)")
def test_mutation_battery():
    corpus = default_corpus()
    canon_tokens = {lid: oracle_tokens(rec.canonical_text) for lid, rec in corpus.records.items()}
    start = time.perf_counter()
    accepted_at = {rate: 0 for rate in RATES}
    for license_id in SUPPORTED:
        text = corpus.lookup(license_id).canonical_text
        for seed in SEEDS:
            verdicts, scores = [], []
            for rate in RATES:
                mutated, _ = mutate_unique_tokens(text, rate, seed)
                result = detect_dice(mutated, corpus)
                tokens = oracle_tokens(mutated)
                accepted = result.license is not L.UNKNOWN
                verdicts.append(accepted)
                scores.append(result.score)
                if accepted:
                    accepted_at[rate] += 1
                    assert result.license is license_id
                    assert oracle_dice(tokens, canon_tokens[license_id]) >= DICE_THRESHOLD
                else:
                    best = max(oracle_dice(tokens, t) for t in canon_tokens.values())
                    assert best < DICE_THRESHOLD
            # Once rejected, a heavier mutation of the same text stays rejected.
            assert verdicts == sorted(verdicts, reverse=True), (license_id, seed, verdicts)
            assert scores == sorted(scores, reverse=True)
    runs = len(SUPPORTED) * len(SEEDS)
    assert accepted_at[0.01] == runs
    assert accepted_at[0.05] == accepted_at[0.10] == accepted_at[0.25] == 0
    assert time.perf_counter() - start < 30.0


# ---------------------------------------------------------------- 3

@pytest.mark.acceptance(3, "classifier held-out accuracy >= 0.95 from the training script (< 5 min)")
def test_training_script_accuracy(tmp_path):
    model_path, report_path = tmp_path / "model.json", tmp_path / "report.json"
    start = time.perf_counter()
    subprocess.run(
        [sys.executable, str(REPO / "tools" / "train_classifier.py"), "--model", str(model_path), "--report", str(report_path)],
        check=True, cwd=REPO, timeout=300,
    )
    assert time.perf_counter() - start < 300
    report = json.loads(report_path.read_text())
    assert report["test_samples"] > 0
    assert report["accuracy"] >= 0.95
    # The freshly trained model drops into the pipeline unchanged.
    model = load_model(model_path)
    for license_id in SUPPORTED:
        assert detect(canonical(license_id), model).license is license_id


# ---------------------------------------------------------------- 4

@pytest.mark.acceptance(4, "worked examples: BSD-3/AGPL violation, MIT+AGPL suggests AGPL, GPL-2/GPL-3 conflict")
def test_worked_examples(tmp_path):
    v = check_library(L.BSD_3_CLAUSE, L.AGPL_3_0_ONLY, dependency="g:a:1")
    assert v is not None and v.kind == LIBRARY_VS_MODULE

    s = suggest_for_licenses([L.MIT, L.AGPL_3_0_ONLY])
    assert s.recommended is L.AGPL_3_0_ONLY

    s = suggest_for_licenses([L.GPL_2_0_ONLY, L.GPL_3_0_ONLY])
    assert s.conflicted and not s.candidates

    # The same three outcomes end to end through the CLI.
    write_pom(tmp_path / "bsd", deps=["com.itextpdf:itext7-core:7.2.5"])
    write_license(tmp_path / "bsd", L.BSD_3_CLAUSE)
    code, out, _ = run("scan", tmp_path / "bsd", "--format", "json", "--fixtures-dir", PROVIDER)
    assert code == EXIT_FINDINGS
    assert [(x["subject_license"], x["context_license"]) for x in json.loads(out)["violations"]] == [
        ("AGPL-3.0-only", "BSD-3-Clause")
    ]
    code, out, _ = run("suggest", PROJECTS / "mit-agpl", "--format", "json", "--fixtures-dir", PROVIDER)
    assert code == EXIT_OK and json.loads(out)["recommended"] == "AGPL-3.0-only"
    code, out, _ = run("suggest", PROJECTS / "gpl-conflict", "--format", "json", "--fixtures-dir", PROVIDER)
    assert code == EXIT_FINDINGS and json.loads(out)["conflicted"] is True


# ---------------------------------------------------------------- 5

def _gradle_project(root: Path, deps: list[str]) -> None:
    root.mkdir(parents=True)
    (root / "settings.gradle").write_text("rootProject.name = 'g'\n")
    lines = "\n".join(f"    implementation '{d}'" for d in deps)
    (root / "build.gradle").write_text(f"plugins {{\n    id 'java'\n}}\n\ndependencies {{\n{lines}\n}}\n")


UNCONFLICTED = {
    "slf4j-only": ["org.slf4j:slf4j-api:2.0.9"],
    "apache-pair": ["com.google.guava:guava:31.0-jre", "com.fasterxml.jackson.core:jackson-databind:2.15.2"],
    "agpl-plus-mit": ["com.itextpdf:itext7-core:7.2.5", "org.slf4j:slf4j-api:2.0.9"],
    "lgpl21-bsd": ["org.hibernate:hibernate-core:5.6.15.Final", "org.ow2.asm:asm:9.5"],
    "lgpl3-apache": ["net.java.dev.jna:jna:5.13.0", "com.google.guava:guava:31.0-jre"],
    "gpl2-classpath": ["mysql:mysql-connector-java:8.0.33", "javax.servlet:javax.servlet-api:4.0.1"],
    "gpl3-mpl": ["org.example:gpl3-lib:1.0", "org.mozilla:rhino:1.7.14"],
    "cddl-permissive": ["com.github.jnr:jnr-posix:3.1.18", "org.example:bsd2-lib:1.1", "org.example:isc-lib:2.0"],
}


def _generate_fixture_projects(base: Path) -> tuple[list[Path], list[Path]]:
    unconflicted = []
    for name, deps in UNCONFLICTED.items():
        write_pom(base / name, deps=deps)
        unconflicted.append(base / name)

    multi = base / "multi-eclipse"
    write_pom(multi, modules=["core", "web"])
    write_pom(multi / "core", deps=["ch.qos.logback:logback-classic:1.4.11", ("junit:junit:4.13.2", "test")])
    write_pom(multi / "web", deps=["org.glassfish:jakarta.json:2.0.1"])
    unconflicted.append(multi)

    _gradle_project(
        base / "gradle-unknowns",
        ["org.jetbrains.kotlin:kotlin-stdlib:1.9.0", "net.java.dev.jna:jna:5.13.0", "org.bouncycastle:bcprov-jdk18on:1.76"],
    )
    unconflicted.append(base / "gradle-unknowns")

    # Both conflicted projects hinge on the provider reporting GPL-2.0 for the MySQL driver.
    write_pom(base / "mysql-gpl3", deps=["mysql:mysql-connector-java:8.0.33", "org.example:gpl3-lib:1.0"])
    split = base / "mysql-gpl3-split"
    write_pom(split, modules=["db", "report"])
    write_pom(split / "db", deps=["mysql:mysql-connector-java:8.0.33"])
    write_pom(split / "report", deps=["org.example:gpl3-lib:1.0", "org.slf4j:slf4j-api:2.0.9"])
    return unconflicted, [base / "mysql-gpl3", split]


@pytest.mark.acceptance(5, "create-license then scan: 10/10 clean, both conflicted refused, offline (< 60 s)")
def test_create_license_procedure(tmp_path):
    unconflicted, conflicted = _generate_fixture_projects(tmp_path)
    assert len(unconflicted) == 10 and len(conflicted) == 2
    start = time.perf_counter()
    offline = ["--provider", "fixtures", "--fixtures-dir", PROVIDER]

    clean = 0
    for root in unconflicted:
        code, report_text, _ = run("scan", root, "--format", "json", "--fail-on", "never", *offline)
        assert json.loads(report_text)["project"]["license"] == "None"
        code, _, err = run("create-license", root, *offline)
        assert code == EXIT_OK, (root.name, err)
        assert err == "", (root.name, err)
        code, report_text, _ = run("scan", root, "--format", "json", *offline)
        report = json.loads(report_text)
        assert report["project"]["license"] != "None"
        if code == EXIT_OK and report["violations"] == []:
            clean += 1
    assert clean == 10

    for root in conflicted:
        code, _, err = run("create-license", root, *offline)
        assert code == EXIT_FINDINGS
        assert "refusing" in err and "GPL-2.0-only" in err and "GPL-3.0-only" in err
        assert not (root / "LICENSE").exists()
    assert time.perf_counter() - start < 60.0


# ---------------------------------------------------------------- 6

PROPERTY_SUITES = [
    "test_dice_symmetric_bounded_and_matches_oracle",
    "test_dice_identity",
    "test_dice_one_only_for_equal_sets",
    "test_suggestion_candidates_are_sound",
    "test_suggestion_recommends_most_permissive",
    "test_suggestion_monotone",
    "test_gpl2_gpl3_pair_always_conflicts",
    "test_inheritance_on_random_trees",
    "test_diff_matches_lcs_oracle",
]


@pytest.mark.acceptance(6, "property suites with >= 1000 generated cases each")
@pytest.mark.parametrize("name", PROPERTY_SUITES)
def test_property_suites(name):
    prop = getattr(test_properties, name)
    assert prop.hypothesis.inner_test is not None
    assert prop._hypothesis_internal_use_settings.max_examples >= 1000
    prop()


# ---------------------------------------------------------------- 7

@pytest.mark.acceptance(7, "two consecutive scans give byte-identical JSON")
@pytest.mark.parametrize("project", sorted(p.name for p in PROJECTS.iterdir()))
def test_deterministic_reports(project):
    args = ("scan", PROJECTS / project, "--format", "json", "--fixtures-dir", PROVIDER)
    first, second = run(*args), run(*args)
    assert first[1] and first == second


# ---------------------------------------------------------------- 8

@pytest.mark.acceptance(8, "3 modules with 100 dependencies scan in < 2 s (fixture provider)")
def test_scan_performance(tmp_path):
    names = [l.value for l in SUPPORTED] + ["Proprietary"]
    rng = random.Random(5)
    fixtures = tmp_path / "provider"
    fixtures.mkdir()
    deps = []
    for i in range(100):
        coords = f"org.perf:lib{i:03d}:1.{i}"
        g, a, v = coords.split(":")
        (fixtures / f"{g}__{a}__{v}.json").write_text(json.dumps({"license_name": rng.choice(names), "homepage": None}))
        deps.append(coords)
    root = tmp_path / "project"
    write_pom(root, modules=["api", "impl"], deps=deps[:34])
    write_pom(root / "api", deps=deps[34:67])
    write_pom(root / "impl", deps=deps[67:])
    write_license(root, L.APACHE_2_0)

    start = time.perf_counter()
    _, out, _ = run("scan", root, "--format", "json", "--fail-on", "never", "--fixtures-dir", fixtures)
    elapsed = time.perf_counter() - start
    summary = json.loads(out)["summary"]
    assert summary["modules"] == 3 and summary["dependencies"] == 100
    assert elapsed < 2.0, f"scan took {elapsed:.2f} s"
