from __future__ import annotations

from typing import AbstractSet

from ..corpus import Corpus, LicenseId, default_corpus, normalize_tokens
from .result import DetectionResult, Method

DICE_THRESHOLD = 0.98


def dice(x: AbstractSet[str], y: AbstractSet[str]) -> float:
    """Sørensen-Dice coefficient of two token sets; two empty sets score 1.0."""
    total = len(x) + len(y)
    if total == 0:
        return 1.0
    return 2 * len(x & y) / total


def dice_scores(text: str, corpus: Corpus | None = None) -> list[tuple[LicenseId, float]]:
    """Scores against every corpus license, best first, ties by SPDX id."""
    corpus = corpus or default_corpus()
    tokens = normalize_tokens(text)
    scores = [(lid, dice(tokens, rec.word_set)) for lid, rec in corpus.records.items()]
    scores.sort(key=lambda item: (-item[1], item[0].value))
    return scores


def detect_dice(
    text: str,
    corpus: Corpus | None = None,
    threshold: float = DICE_THRESHOLD,
) -> DetectionResult:
    scores = dice_scores(text, corpus)
    (best, best_score), runner_up = scores[0], scores[1]
    # An empty file is not a license, whatever dice(∅, ∅) says; its best score is 0 anyway.
    if best_score < threshold:
        return DetectionResult(LicenseId.UNKNOWN, Method.DICE, best_score, (best, best_score))
    return DetectionResult(best, Method.DICE, best_score, runner_up)
