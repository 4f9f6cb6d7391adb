#!/usr/bin/env python3
"""Train the bundled bag-of-words license classifier.

Builds an augmented corpus from the canonical license texts, splits it 3:1
into train/test, fits a multinomial logistic regression on token counts and
writes the model JSON plus an accuracy report.

Texts of licenses the classifier does not cover (the Dice-only ones) and
non-license prose are trained toward a uniform posterior so the classifier
abstains on them and the Dice stage decides.

    python tools/train_classifier.py --model src/licaudit/data/classifier.json \
        --report build/classifier_report.json
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import textwrap
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from licaudit.corpus import Corpus, LicenseId, load_corpus, token_sequence
from licaudit.detector.classifier import DEFAULT_POSTERIOR_THRESHOLD, ClassifierModel, classify

log = logging.getLogger("train_classifier")

HOLDERS = [
    "Acme Corporation", "Jane Doe", "The Apache Software Foundation", "Example Labs GmbH",
    "Oleg Petrov", "Contributors of the Widget project", "Mei Lin", "Northwind Traders",
    "ACME Java Tools", "Carlos Ortega and others", "Initech Inc.", "Open Source Hackers",
]
PROJECTS = ["widget-core", "fastjson-lite", "netty-utils", "graph kit", "the foo library", "Sample App"]
PROSE = (
    "this project provides a small toolkit for parsing configuration files and building "
    "command line applications it was written during a weekend hackathon and later grew "
    "into a reusable library with plugins caching logging and an optional web dashboard "
    "please read the contributing guide before opening a pull request bug reports are "
    "welcome include steps to reproduce the problem the expected behaviour and the version "
    "you are running the maintainers meet every month to plan releases and review roadmap "
    "items such as faster startup better error messages windows support and documentation "
    "examples live in the samples folder run the build with gradle or maven then start the "
    "server and open the browser at localhost to see the demo page with charts and tables"
).split()


def _copyright_line(rng: np.random.Generator) -> str:
    year = int(rng.integers(1995, 2025))
    holder = HOLDERS[int(rng.integers(len(HOLDERS)))]
    return f"Copyright (c) {year} {holder}"


def augment(text: str, rng: np.random.Generator) -> str:
    """One random variant: copyright swap, rewrap, header/footer, token dropout."""
    lines = text.splitlines()
    if rng.random() < 0.7:
        replaced = False
        for i, line in enumerate(lines):
            if "copyright" in line.lower() and ("<" in line or "[" in line):
                lines[i] = _copyright_line(rng)
                replaced = True
        if not replaced:
            lines.insert(0, _copyright_line(rng))
    text = "\n".join(lines)

    if rng.random() < 0.5:
        width = int(rng.integers(50, 120))
        paragraphs = [p for p in text.split("\n\n")]
        text = "\n\n".join(textwrap.fill(" ".join(p.split()), width) for p in paragraphs)

    if rng.random() < 0.5:
        project = PROJECTS[int(rng.integers(len(PROJECTS)))]
        text = f"This file is part of {project}.\n\n" + text
    if rng.random() < 0.3:
        text += "\n\nSee the NOTICE file distributed with this work for additional information.\n"

    if rng.random() < 0.8:
        words = text.split()
        rate = rng.uniform(0.01, 0.05)
        keep = rng.random(len(words)) >= rate
        text = " ".join(w for w, k in zip(words, keep) if k)
    return text


def prose_sample(rng: np.random.Generator) -> str:
    n = int(rng.integers(20, 400))
    return " ".join(PROSE[int(i)] for i in rng.integers(len(PROSE), size=n))


def salad_sample(corpus: Corpus, rng: np.random.Generator) -> str:
    """Words drawn from several licenses at once: looks like license text, is none of them."""
    picks = rng.choice(len(corpus.records), size=3, replace=False)
    pool: list[str] = []
    for i in picks:
        seq = token_sequence(list(corpus.records.values())[int(i)].canonical_text)
        start = int(rng.integers(max(1, len(seq) - 300)))
        pool.extend(seq[start : start + 300])
    rng.shuffle(pool)
    return " ".join(pool)


def build_dataset(corpus: Corpus, per_class: int, seed: int) -> tuple[list[str], list[LicenseId]]:
    """Samples labelled with a classifier license, or UNKNOWN for negatives."""
    rng = np.random.default_rng(seed)
    texts: list[str] = []
    labels: list[LicenseId] = []
    for license_id in corpus.classifier_licenses:
        canonical = corpus.lookup(license_id).canonical_text
        texts.append(canonical)
        labels.append(license_id)
        for _ in range(per_class - 1):
            texts.append(augment(canonical, rng))
            labels.append(license_id)
    for license_id in corpus.dice_only_licenses:
        canonical = corpus.lookup(license_id).canonical_text
        texts.append(canonical)
        labels.append(LicenseId.UNKNOWN)
        for _ in range(per_class - 1):
            texts.append(augment(canonical, rng))
            labels.append(LicenseId.UNKNOWN)
    for _ in range(per_class):
        texts.append(prose_sample(rng))
        labels.append(LicenseId.UNKNOWN)
        texts.append(salad_sample(corpus, rng))
        labels.append(LicenseId.UNKNOWN)
    texts.append("")
    labels.append(LicenseId.UNKNOWN)
    return texts, labels


def split(n: int, seed: int, test_fraction: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    order = np.random.default_rng(seed + 1).permutation(n)
    cut = int(round(n * (1 - test_fraction)))
    return np.sort(order[:cut]), np.sort(order[cut:])


def fit(
    features: np.ndarray, targets: np.ndarray, l2: float, max_iter: int = 500
) -> tuple[np.ndarray, np.ndarray]:
    """Softmax regression with soft targets, L2 on weights only."""
    n, dim = features.shape
    k = targets.shape[1]

    def objective(params: np.ndarray) -> tuple[float, np.ndarray]:
        w = params[: k * dim].reshape(k, dim)
        b = params[k * dim :]
        logits = features @ w.T + b
        logits -= logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(logits).sum(axis=1, keepdims=True))
        log_p = logits - log_norm
        loss = -(targets * log_p).sum() / n + 0.5 * l2 * (w * w).sum()
        grad_logits = (np.exp(log_p) - targets) / n
        grad_w = grad_logits.T @ features + l2 * w
        grad_b = grad_logits.sum(axis=0)
        return loss, np.concatenate([grad_w.ravel(), grad_b])

    result = minimize(
        objective, np.zeros(k * dim + k), jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter},
    )
    log.info("optimizer: %s after %d iterations, loss %.5f", result.message, result.nit, result.fun)
    return result.x[: k * dim].reshape(k, dim), result.x[k * dim :]


def train(corpus: Corpus, per_class: int = 80, seed: int = 20230501, l2: float = 1e-3):
    texts, labels = build_dataset(corpus, per_class, seed)
    classes = corpus.classifier_licenses
    vocab = sorted(set().union(*(r.word_set for r in corpus.records.values())))
    empty = ClassifierModel({t: i for i, t in enumerate(vocab)}, classes, np.zeros((len(classes), len(vocab))), np.zeros(len(classes)))
    features = np.stack([empty.vectorize(t) for t in texts])
    targets = np.full((len(texts), len(classes)), 1.0 / len(classes))
    for row, label in enumerate(labels):
        if label is not LicenseId.UNKNOWN:
            targets[row] = 0.0
            targets[row, classes.index(label)] = 1.0

    train_idx, test_idx = split(len(texts), seed)
    weights, bias = fit(features[train_idx], targets[train_idx], l2)
    # Round-trip through the serialized form so the report measures the shipped model.
    model = ClassifierModel.from_json(
        ClassifierModel(empty.vocabulary, classes, weights, bias, DEFAULT_POSTERIOR_THRESHOLD).to_json()
    )
    report = evaluate(model, [texts[i] for i in test_idx], [labels[i] for i in test_idx])
    report.update(
        {
            "seed": seed,
            "samples": len(texts),
            "train_samples": len(train_idx),
            "test_samples": len(test_idx),
            "vocabulary_size": len(vocab),
            "l2": l2,
            "posterior_threshold": model.posterior_threshold,
        }
    )
    return model, report


def evaluate(model: ClassifierModel, texts: list[str], labels: list[LicenseId]) -> dict:
    per_class: dict[str, list[int]] = {}
    correct = 0
    for text, label in zip(texts, labels):
        predicted = classify(text, model).license
        hit = predicted is label
        correct += hit
        bucket = per_class.setdefault(label.value, [0, 0])
        bucket[0] += hit
        bucket[1] += 1
    licensed = [(t, l) for t, l in zip(texts, labels) if l is not LicenseId.UNKNOWN]
    licensed_correct = sum(classify(t, model).license is l for t, l in licensed)
    return {
        "accuracy": correct / len(texts),
        "licensed_accuracy": licensed_correct / len(licensed),
        "per_class": {k: {"correct": c, "total": n} for k, (c, n) in sorted(per_class.items())},
    }


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--model", type=Path, default=Path("src/licaudit/data/classifier.json"))
    parser.add_argument("--report", type=Path, default=Path("build/classifier_report.json"))
    parser.add_argument("--data-dir", type=Path, help="corpus override directory")
    parser.add_argument("--per-class", type=int, default=80)
    parser.add_argument("--seed", type=int, default=20230501)
    parser.add_argument("--l2", type=float, default=1e-3)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    model, report = train(load_corpus(args.data_dir), args.per_class, args.seed, args.l2)
    args.model.parent.mkdir(parents=True, exist_ok=True)
    args.model.write_text(json.dumps(model.to_json(), separators=(",", ":")) + "\n", encoding="utf-8")
    args.report.parent.mkdir(parents=True, exist_ok=True)
    args.report.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("held-out accuracy %.4f (%d samples) -> %s", report["accuracy"], report["test_samples"], args.report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
