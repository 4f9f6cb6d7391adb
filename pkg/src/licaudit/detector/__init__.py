"""License recognition from text: classifier first, Dice similarity second."""

from __future__ import annotations

from ..corpus import Corpus, LicenseId, normalize_tokens
from .classifier import ClassifierModel, ModelError, classify, default_model, load_model
from .diff import DiffRun, diff_against_canonical, diff_sequences, has_changes
from .result import DetectionResult, Method
from .similarity import DICE_THRESHOLD, detect_dice, dice, dice_scores

__all__ = [
    "DICE_THRESHOLD",
    "ClassifierModel",
    "DetectionResult",
    "Detector",
    "DiffRun",
    "Method",
    "ModelError",
    "classify",
    "detect",
    "detect_dice",
    "dice",
    "dice_scores",
    "diff_against_canonical",
    "diff_sequences",
    "has_changes",
    "load_model",
    "normalize_tokens",
]


class Detector:
    """Two-stage detector bound to a model and corpus."""

    def __init__(
        self,
        model: ClassifierModel | None = None,
        corpus: Corpus | None = None,
        dice_threshold: float = DICE_THRESHOLD,
    ) -> None:
        self.model = model or default_model()
        self.corpus = corpus
        self.dice_threshold = dice_threshold

    def __call__(self, text: str) -> DetectionResult:
        result = classify(text, self.model)
        if result.license is not LicenseId.UNKNOWN:
            return result
        return detect_dice(text, self.corpus, self.dice_threshold)


def detect(text: str, model: ClassifierModel | None = None, corpus: Corpus | None = None) -> DetectionResult:
    return Detector(model, corpus)(text)
