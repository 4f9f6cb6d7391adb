"""Word-level diff between a license file and a canonical text.

Uses the Myers O(ND) shortest-edit-script algorithm, so the equal runs always
form a longest common subsequence. Near-identical license texts diff in
roughly linear time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from ..corpus import Corpus, LicenseId, default_corpus, token_sequence

Op = Literal["equal", "delete", "insert"]


@dataclass(frozen=True)
class DiffRun:
    op: Op
    words: tuple[str, ...]


def _edit_script(a: Sequence[str], b: Sequence[str]) -> list[tuple[Op, str]]:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return [("delete", w) for w in a] + [("insert", w) for w in b]
    offset = n + m + 1
    v = [0] * (2 * offset + 1)
    # trace[d] is the band v[-d-1 .. d+1] as it stood before round d.
    trace: list[list[int]] = []
    for d in range(n + m + 1):
        trace.append(v[offset - d - 1 : offset + d + 2])
        done = False
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                x = v[offset + k + 1]
            else:
                x = v[offset + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[offset + k] = x
            if x >= n and y >= m:
                done = True
                break
        if done:
            break

    ops: list[tuple[Op, str]] = []
    x, y = n, m
    for d in range(len(trace) - 1, 0, -1):
        band = trace[d]
        k = x - y
        if k == -d or (k != d and band[k - 1 + d + 1] < band[k + 1 + d + 1]):
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = band[prev_k + d + 1]
        prev_y = prev_x - prev_k
        while x > prev_x and y > prev_y:
            x -= 1
            y -= 1
            ops.append(("equal", a[x]))
        if x == prev_x:
            y -= 1
            ops.append(("insert", b[y]))
        else:
            x -= 1
            ops.append(("delete", a[x]))
    while x > 0 and y > 0:
        x -= 1
        y -= 1
        ops.append(("equal", a[x]))
    ops.reverse()
    return ops


def diff_sequences(old: Sequence[str], new: Sequence[str]) -> list[DiffRun]:
    """Runs transforming ``old`` into ``new``; deletions precede insertions."""
    # Common prefix/suffix are trimmed first; Myers then only sees the edited core.
    start = 0
    while start < len(old) and start < len(new) and old[start] == new[start]:
        start += 1
    end_old, end_new = len(old), len(new)
    while end_old > start and end_new > start and old[end_old - 1] == new[end_new - 1]:
        end_old -= 1
        end_new -= 1

    ops: list[tuple[Op, str]] = [("equal", w) for w in old[:start]]
    ops += _edit_script(old[start:end_old], new[start:end_new])
    ops += [("equal", w) for w in old[end_old:]]

    runs: list[DiffRun] = []
    pending: dict[str, list[str]] = {"delete": [], "insert": []}
    equal: list[str] = []

    def flush_changes() -> None:
        for op in ("delete", "insert"):
            if pending[op]:
                runs.append(DiffRun(op, tuple(pending[op])))  # type: ignore[arg-type]
                pending[op] = []

    for op, word in ops:
        if op == "equal":
            flush_changes()
            equal.append(word)
        else:
            if equal:
                runs.append(DiffRun("equal", tuple(equal)))
                equal = []
            pending[op].append(word)
    flush_changes()
    if equal:
        runs.append(DiffRun("equal", tuple(equal)))
    return runs


def diff_against_canonical(
    text: str, license_id: LicenseId, corpus: Corpus | None = None
) -> list[DiffRun]:
    """Diff from the canonical text of ``license_id`` to ``text``.

    Deleted runs are canonical words missing from ``text``; inserted runs are
    words ``text`` adds.
    """
    corpus = corpus or default_corpus()
    canonical = corpus.lookup(license_id).canonical_text
    return diff_sequences(token_sequence(canonical), token_sequence(text))


def has_changes(runs: Sequence[DiffRun]) -> bool:
    return any(run.op != "equal" for run in runs)
