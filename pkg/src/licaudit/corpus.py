"""Bundled data for the supported licenses.

The corpus is loaded once from the package data directory (or an override
directory holding the same files) and is immutable afterwards.
"""

from __future__ import annotations

import configparser
import enum
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping


class LicenseId(str, enum.Enum):
    APACHE_2_0 = "Apache-2.0"
    MIT = "MIT"
    BSD_2_CLAUSE = "BSD-2-Clause"
    BSD_3_CLAUSE = "BSD-3-Clause"
    GPL_2_0_ONLY = "GPL-2.0-only"
    GPL_3_0_ONLY = "GPL-3.0-only"
    LGPL_2_1_ONLY = "LGPL-2.1-only"
    LGPL_3_0_ONLY = "LGPL-3.0-only"
    AGPL_3_0_ONLY = "AGPL-3.0-only"
    MPL_2_0 = "MPL-2.0"
    EPL_2_0 = "EPL-2.0"
    ISC = "ISC"
    CDDL_1_0 = "CDDL-1.0"
    EPL_1_0 = "EPL-1.0"
    GPL_2_0_WITH_CLASSPATH_EXCEPTION = "GPL-2.0-with-classpath-exception"
    MPL_1_0 = "MPL-1.0"
    UNKNOWN = "Unknown"
    NONE = "None"

    def __str__(self) -> str:
        return self.value

    @property
    def supported(self) -> bool:
        return self not in (LicenseId.UNKNOWN, LicenseId.NONE)

    def render(self) -> str:
        return self.value


SUPPORTED: tuple[LicenseId, ...] = tuple(i for i in LicenseId if i.supported)

_BY_LOWER = {i.value.lower(): i for i in LicenseId}
# Deprecated SPDX ids that are defined as equal to the "-only" variants.
_BY_LOWER.update(
    {
        "gpl-2.0": LicenseId.GPL_2_0_ONLY,
        "gpl-3.0": LicenseId.GPL_3_0_ONLY,
        "lgpl-2.1": LicenseId.LGPL_2_1_ONLY,
        "lgpl-3.0": LicenseId.LGPL_3_0_ONLY,
        "agpl-3.0": LicenseId.AGPL_3_0_ONLY,
    }
)


def parse_spdx(name: str) -> LicenseId:
    """Exact, case-insensitive SPDX id match; anything else is ``Unknown``."""
    return _BY_LOWER.get(name.strip().lower(), LicenseId.UNKNOWN)


_TOKEN_RE = re.compile(r"[^\W_]+")


def normalize_tokens(text: str) -> frozenset[str]:
    """Lowercased set of maximal alphanumeric runs in ``text``."""
    return frozenset(_TOKEN_RE.findall(text.lower()))


def token_sequence(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class CorpusError(Exception):
    pass


class LicenseNotFound(CorpusError, KeyError):
    def __init__(self, license_id: object) -> None:
        super().__init__(f"no corpus entry for license {license_id!s}")
        self.license_id = license_id

    def __str__(self) -> str:
        return self.args[0]


class EmptyCandidates(CorpusError, ValueError):
    pass


@dataclass(frozen=True)
class Description:
    permissions: tuple[str, ...]
    limitations: tuple[str, ...]
    conditions: tuple[str, ...]


@dataclass(frozen=True)
class LicenseRecord:
    id: LicenseId
    name: str
    canonical_text: str
    word_set: frozenset[str]
    description: Description
    compatible_module_licenses: frozenset[LicenseId]
    permissiveness_rank: int
    source: str = ""
    classifier_supported: bool = True


@dataclass(frozen=True)
class Corpus:
    records: Mapping[LicenseId, LicenseRecord]
    version: str
    data_dir: Path | None = None
    name_patterns: tuple[tuple[re.Pattern[str], LicenseId], ...] = field(default=())

    def lookup(self, license_id: LicenseId) -> LicenseRecord:
        try:
            return self.records[license_id]
        except KeyError:
            raise LicenseNotFound(license_id) from None

    def compatible(self, library_license: LicenseId) -> frozenset[LicenseId]:
        return self.lookup(library_license).compatible_module_licenses

    def rank(self, license_id: LicenseId) -> int:
        return self.lookup(license_id).permissiveness_rank

    def most_permissive(self, candidates: Iterable[LicenseId]) -> LicenseId:
        candidates = list(candidates)
        if not candidates:
            raise EmptyCandidates("cannot pick the most permissive of no licenses")
        return min(candidates, key=self.rank)

    @property
    def classifier_licenses(self) -> tuple[LicenseId, ...]:
        return tuple(i for i in SUPPORTED if self.records[i].classifier_supported)

    @property
    def dice_only_licenses(self) -> tuple[LicenseId, ...]:
        return tuple(i for i in SUPPORTED if not self.records[i].classifier_supported)

    def matrix(self) -> dict[LicenseId, frozenset[LicenseId]]:
        return {i: r.compatible_module_licenses for i, r in self.records.items()}

    def normalize_license_name(self, name: str) -> LicenseId:
        """Map a free-form declared license name to a supported id or ``Unknown``."""
        cleaned = " ".join(name.split())
        for pattern, license_id in self.name_patterns:
            if pattern.search(cleaned):
                return license_id
        result = parse_spdx(cleaned)
        return LicenseId.UNKNOWN if result is LicenseId.NONE else result


def _split_ids(value: str, where: str) -> list[LicenseId]:
    ids = []
    for token in value.split():
        license_id = parse_spdx(token)
        if not license_id.supported or license_id.value != token:
            raise CorpusError(f"{where}: {token!r} is not a supported SPDX id")
        ids.append(license_id)
    return ids


def _read_text(data_dir: Path | None, relative: str) -> str:
    if data_dir is not None and (data_dir / relative).is_file():
        return (data_dir / relative).read_text(encoding="utf-8")
    return resources.files("licaudit").joinpath("data", relative).read_text(encoding="utf-8")


def load_name_patterns(text: str) -> tuple[tuple[re.Pattern[str], LicenseId], ...]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            regex, spdx = line.split("\t")
        except ValueError:
            raise CorpusError(f"license_names.tsv:{lineno}: expected two tab-separated fields") from None
        license_id = parse_spdx(spdx)
        if not license_id.supported:
            raise CorpusError(f"license_names.tsv:{lineno}: unsupported id {spdx!r}")
        rows.append((re.compile(regex, re.IGNORECASE), license_id))
    return tuple(rows)


def load_corpus(data_dir: Path | str | None = None) -> Corpus:
    """Load the corpus; files present in ``data_dir`` override the bundled ones."""
    data_dir = Path(data_dir) if data_dir is not None else None
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment]
    parser.read_string(_read_text(data_dir, "matrix.ini"), source="matrix.ini")
    descriptions = json.loads(_read_text(data_dir, "descriptions.json"))

    meta = parser["meta"]
    ml = set(_split_ids(meta["ml_licenses"], "meta.ml_licenses"))
    dice_only = set(_split_ids(meta["dice_only_licenses"], "meta.dice_only_licenses"))
    if ml & dice_only or ml | dice_only != set(SUPPORTED):
        raise CorpusError("meta: ml_licenses and dice_only_licenses must partition the supported set")

    records: dict[LicenseId, LicenseRecord] = {}
    for license_id in SUPPORTED:
        if license_id.value not in parser:
            raise CorpusError(f"matrix.ini: missing section [{license_id}]")
        section = parser[license_id.value]
        text = _read_text(data_dir, f"licenses/{license_id.value}.txt")
        desc = descriptions.get(license_id.value, {})
        records[license_id] = LicenseRecord(
            id=license_id,
            name=section.get("name", license_id.value),
            canonical_text=text,
            word_set=normalize_tokens(text),
            description=Description(
                tuple(desc.get("permissions", ())),
                tuple(desc.get("limitations", ())),
                tuple(desc.get("conditions", ())),
            ),
            compatible_module_licenses=frozenset(
                _split_ids(section["compatible"], f"[{license_id}].compatible")
            ),
            permissiveness_rank=section.getint("rank"),
            source=section.get("source", ""),
            classifier_supported=license_id in ml,
        )

    ranks = [r.permissiveness_rank for r in records.values()]
    if len(set(ranks)) != len(ranks):
        raise CorpusError("matrix.ini: permissiveness ranks must be distinct")
    for record in records.values():
        if record.id not in record.compatible_module_licenses:
            raise CorpusError(f"matrix.ini: [{record.id}] must list itself as compatible")

    return Corpus(
        records=records,
        version=meta.get("version", "0"),
        data_dir=data_dir,
        name_patterns=load_name_patterns(_read_text(data_dir, "license_names.tsv")),
    )


@lru_cache(maxsize=None)
def default_corpus() -> Corpus:
    return load_corpus()


def lookup(license_id: LicenseId) -> LicenseRecord:
    return default_corpus().lookup(license_id)


def most_permissive(candidates: Iterable[LicenseId]) -> LicenseId:
    return default_corpus().most_permissive(candidates)


def normalize_license_name(name: str) -> LicenseId:
    return default_corpus().normalize_license_name(name)
