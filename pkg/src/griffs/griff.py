"""Griff extraction: per-score-note interval structures and their string form.

An ordered griff is a tuple of vectors, each vector a strictly ascending
tuple of semitone intervals from the score note. Vectors come from grouping
the aligned performance notes by onset with an anchored window. A pooled
griff is the set of all intervals played to the score note.

String form: intervals joined by ``_`` inside a vector, vectors joined by
``|``; the empty griff is ``""``.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Sequence

from .alignment import Alignment, AlignmentError, Score, ScoreNote, validate
from .midi import Performance, PerformanceNote

DEFAULT_WINDOW_S = 0.035

OrderedGriff = tuple[tuple[int, ...], ...]
PooledGriff = tuple[int, ...]

EMPTY = "empty"
BASS_ONLY = "bass_only"
HARMONIC = "harmonic"

_GRIFF_RE = re.compile(r"-?\d+(_-?\d+)*(\|-?\d+(_-?\d+)*)*")


class GriffDecodeError(ValueError):
    pass


def group_onsets(notes: Iterable[tuple[float, int]], window_s: float = DEFAULT_WINDOW_S) -> list[list[int]]:
    """Group ``(onset_s, pitch)`` pairs into vectors of distinct ascending pitches.

    The first ungrouped onset anchors a half-open window
    ``[anchor, anchor + window_s)``. Notes sounding exactly at the anchor
    always join, so a zero window still keeps simultaneous notes together.
    """
    if window_s < 0:
        raise ValueError("window_s must be >= 0")
    vectors: list[list[int]] = []
    anchor = None
    current: set[int] = set()
    for onset, pitch in sorted(notes):
        if anchor is None or not (onset < anchor + window_s or onset == anchor):
            if current:
                vectors.append(sorted(current))
            anchor, current = onset, set()
        current.add(pitch)
    if current:
        vectors.append(sorted(current))
    return vectors


def extract_ordered(score_note: ScoreNote, aligned_notes: Sequence[PerformanceNote],
                    window_s: float = DEFAULT_WINDOW_S) -> OrderedGriff:
    vectors = group_onsets(((n.onset_s, n.pitch) for n in aligned_notes), window_s)
    return tuple(tuple(sorted({p - score_note.pitch for p in v})) for v in vectors)


def extract_pooled(score_note: ScoreNote, aligned_notes: Sequence[PerformanceNote]) -> PooledGriff:
    return tuple(sorted({n.pitch - score_note.pitch for n in aligned_notes}))


def pool(griff: OrderedGriff) -> PooledGriff:
    return tuple(sorted({i for vector in griff for i in vector}))


def encode(griff: OrderedGriff | PooledGriff) -> str:
    """Encode an ordered griff, or a pooled griff (a flat tuple of ints)."""
    if griff and isinstance(griff[0], int):
        griff = (griff,)
    for vector in griff:
        if not vector or any(b <= a for a, b in zip(vector, vector[1:])):
            raise ValueError(f"non-canonical vector {vector!r}")
    return "|".join("_".join(str(i) for i in vector) for vector in griff)


def decode(text: str) -> OrderedGriff:
    if text == "":
        return ()
    if not _GRIFF_RE.fullmatch(text):
        raise GriffDecodeError(f"malformed griff string {text!r}")
    griff = []
    for token in text.split("|"):
        vector = tuple(int(i) for i in token.split("_"))
        if any(b <= a for a, b in zip(vector, vector[1:])):
            raise GriffDecodeError(f"non-canonical vector {token!r} in {text!r}")
        if any(str(i) != s for i, s in zip(vector, token.split("_"))):
            raise GriffDecodeError(f"non-canonical integer in {text!r}")
        griff.append(vector)
    return tuple(griff)


def classify(griff_string: str) -> str:
    if griff_string == "":
        return EMPTY
    if griff_string == "0":
        return BASS_ONLY
    return HARMONIC


def is_filtered(griff_string: str, classifier: Callable[[str], str] = classify) -> bool:
    """True for griffs dropped before harmonic analysis (empty and bass-only)."""
    return classifier(griff_string) != HARMONIC


def aligned_notes(score: Score, performance: Performance,
                  alignment: Alignment) -> dict[str, list[PerformanceNote]]:
    """Performance notes aligned to each score note id, in performance order."""
    by_id = performance.by_id()
    return {
        note.id: sorted((by_id[pid] for pid in alignment.performance_notes_for(note.id)),
                        key=lambda n: (n.onset_s, n.pitch))
        for note in score.notes
    }


def extract_all(score: Score, performance: Performance, alignment: Alignment,
                window_s: float = DEFAULT_WINDOW_S,
                representation: str = "ordered") -> list[tuple[str, str]]:
    """``(score_note_id, griff_string)`` for every score note, in score order."""
    if representation not in ("ordered", "pooled"):
        raise ValueError(f"unknown griff representation {representation!r}")
    problems = validate(alignment, score, performance)
    if problems:
        raise AlignmentError("; ".join(problems), problems)
    grouped = aligned_notes(score, performance, alignment)
    rows = []
    for note in score.notes:
        notes = grouped[note.id]
        if representation == "ordered":
            griff = extract_ordered(note, notes, window_s)
        else:
            griff = (extract_pooled(note, notes),) if notes else ()
        rows.append((note.id, encode(griff)))
    return rows
