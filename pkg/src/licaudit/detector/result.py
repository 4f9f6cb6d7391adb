from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

from ..corpus import LicenseId


class Method(str, enum.Enum):
    CLASSIFIER = "classifier"
    DICE = "dice"
    DECLARED_NAME = "declared-name"
    PROVIDER = "provider"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DetectionResult:
    license: LicenseId
    method: Method
    score: float
    runner_up: tuple[LicenseId, float] | None = None

    @property
    def recognized(self) -> bool:
        return self.license.supported

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "license": self.license.value,
            "method": self.method.value,
            "score": round(self.score, 6),
        }
        if self.runner_up is not None:
            out["runner_up"] = {"license": self.runner_up[0].value, "score": round(self.runner_up[1], 6)}
        return out

    def render(self) -> str:
        if not self.recognized:
            return f"Unknown (best {self.method} score {self.score:.3f})"
        return f"{self.license} ({self.method}, {self.score:.3f})"
