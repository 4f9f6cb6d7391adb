"""Linear bag-of-words license classifier (inference side).

The model is a multinomial logistic regression over token counts. It is
produced by ``tools/train_classifier.py`` and stored as JSON.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from ..corpus import LicenseId, parse_spdx, token_sequence
from .result import DetectionResult, Method

MODEL_FORMAT = "licaudit-logreg/1"
DEFAULT_POSTERIOR_THRESHOLD = 0.80


class ModelError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    vocabulary: dict[str, int]
    classes: tuple[LicenseId, ...]
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    posterior_threshold: float = DEFAULT_POSTERIOR_THRESHOLD

    def vectorize(self, text: str) -> np.ndarray:
        counts = np.zeros(len(self.vocabulary))
        for token, n in Counter(token_sequence(text)).items():
            index = self.vocabulary.get(token)
            if index is not None:
                counts[index] = n
        return counts

    def posteriors(self, text: str) -> np.ndarray:
        return softmax(self.weights @ self.vectorize(text) + self.bias)

    def with_threshold(self, threshold: float) -> "ClassifierModel":
        if not 0.0 <= threshold <= 1.0:
            raise ModelError(f"posterior threshold {threshold} outside [0, 1]")
        return ClassifierModel(self.vocabulary, self.classes, self.weights, self.bias, threshold)

    def to_json(self) -> dict[str, Any]:
        vocab = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "format": MODEL_FORMAT,
            "classes": [c.value for c in self.classes],
            "vocabulary": vocab,
            "weights": [[round(float(w), 6) for w in row] for row in self.weights],
            "bias": [round(float(b), 6) for b in self.bias],
            "posterior_threshold": self.posterior_threshold,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ClassifierModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelError(f"unsupported model format {data.get('format')!r}")
        try:
            classes = tuple(parse_spdx(c) for c in data["classes"])
            vocab = list(data["vocabulary"])
            weights = np.asarray(data["weights"], dtype=float)
            bias = np.asarray(data["bias"], dtype=float)
            threshold = float(data["posterior_threshold"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed model: {exc}") from exc
        if any(not c.supported for c in classes) or len(set(classes)) != len(classes):
            raise ModelError("model classes must be distinct supported SPDX ids")
        if len(set(vocab)) != len(vocab):
            raise ModelError("duplicate vocabulary entries")
        if weights.shape != (len(classes), len(vocab)) or bias.shape != (len(classes),):
            raise ModelError(
                f"weight shape {weights.shape} / bias shape {bias.shape} do not match "
                f"{len(classes)} classes x {len(vocab)} features"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise ModelError("non-finite model parameters")
        if not 0.0 <= threshold <= 1.0:
            raise ModelError(f"posterior threshold {threshold} outside [0, 1]")
        return cls({t: i for i, t in enumerate(vocab)}, classes, weights, bias, threshold)


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = np.exp(scores - np.max(scores, axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def load_model(path: Path | str | None = None) -> ClassifierModel:
    try:
        if path is None:
            raw = resources.files("licaudit").joinpath("data", "classifier.json").read_text(encoding="utf-8")
        else:
            raw = Path(path).read_text(encoding="utf-8")
        data = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot load model: {exc}") from exc
    return ClassifierModel.from_json(data)


@lru_cache(maxsize=None)
def default_model() -> ClassifierModel:
    return load_model()


def classify(text: str, model: ClassifierModel | None = None) -> DetectionResult:
    model = model or default_model()
    posterior = model.posteriors(text)
    order = np.argsort(-posterior, kind="stable")
    best, second = int(order[0]), int(order[1])
    runner_up = (model.classes[second], float(posterior[second]))
    score = float(posterior[best])
    if score >= model.posterior_threshold:
        return DetectionResult(model.classes[best], Method.CLASSIFIER, score, runner_up)
    return DetectionResult(LicenseId.UNKNOWN, Method.CLASSIFIER, score, (model.classes[best], score))
