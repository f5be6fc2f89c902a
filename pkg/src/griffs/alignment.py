"""Scores, performance-to-score alignments and their JSON interchange format."""

from __future__ import annotations

import json
import warnings
from collections import defaultdict
from dataclasses import dataclass, field

from .midi import Performance, parse_smf_ticks


class ScoreError(ValueError):
    pass


class AlignmentError(ValueError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or [message]


@dataclass(frozen=True)
class ScoreNote:
    id: str
    index: int
    pitch: int
    onset_beats: float


@dataclass(frozen=True)
class Score:
    score_id: str
    notes: tuple[ScoreNote, ...]

    def __post_init__(self):
        ids = [n.id for n in self.notes]
        if len(set(ids)) != len(ids):
            raise ScoreError(f"score {self.score_id!r}: duplicate note ids")
        for i, note in enumerate(self.notes):
            if note.index != i:
                raise ScoreError(f"score {self.score_id!r}: note {note.id} has index {note.index}, expected {i}")
            if not 0 <= note.pitch <= 127:
                raise ScoreError(f"score {self.score_id!r}: note {note.id} pitch {note.pitch} outside 0-127")
        for a, b in zip(self.notes, self.notes[1:]):
            if b.onset_beats == a.onset_beats:
                raise ScoreError(f"score {self.score_id!r} is not monophonic: "
                                 f"notes {a.id} and {b.id} share onset {a.onset_beats}")
            if b.onset_beats < a.onset_beats:
                raise ScoreError(f"score {self.score_id!r}: notes not sorted by onset")

    def __len__(self):
        return len(self.notes)

    @classmethod
    def from_pitches(cls, score_id: str, pitches, beats=None) -> "Score":
        beats = beats if beats is not None else range(len(pitches))
        return cls(score_id, tuple(
            ScoreNote(f"s{i}", i, int(p), float(b)) for i, (p, b) in enumerate(zip(pitches, beats))
        ))

    def to_json(self) -> dict:
        return {
            "score_id": self.score_id,
            "notes": [{"id": n.id, "pitch": n.pitch, "onset_beats": n.onset_beats} for n in self.notes],
        }


def _warn_unknown(obj: dict, known: set[str], where: str):
    extra = sorted(set(obj) - known)
    if extra:
        warnings.warn(f"{where}: ignoring unknown fields {extra}")


def _score_from_json(text: str | bytes) -> Score:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScoreError(f"malformed score JSON: {exc}") from exc
    if not isinstance(doc, dict) or "notes" not in doc:
        raise ScoreError("malformed score JSON: expected an object with 'notes'")
    _warn_unknown(doc, {"score_id", "notes"}, "score")
    rows = []
    for raw in doc["notes"]:
        _warn_unknown(raw, {"id", "pitch", "onset_beats"}, "score note")
        try:
            rows.append((float(raw["onset_beats"]), str(raw["id"]), int(raw["pitch"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScoreError(f"malformed score note {raw!r}") from exc
    rows.sort(key=lambda r: r[0])
    for a, b in zip(rows, rows[1:]):
        if a[0] == b[0]:
            raise ScoreError(f"polyphonic score: notes {a[1]} and {b[1]} share onset {a[0]}")
    notes = tuple(ScoreNote(nid, i, pitch, onset) for i, (onset, nid, pitch) in enumerate(rows))
    return Score(str(doc.get("score_id", "")), notes)


def _score_from_smf(data: bytes, score_id: str) -> Score:
    division, notes = parse_smf_ticks(data)
    for (t1, p1), (t2, p2) in zip(notes, notes[1:]):
        if t1 == t2:
            raise ScoreError(f"polyphonic score: pitches {p1} and {p2} share onset "
                             f"{t1 / division} beats")
    return Score(score_id, tuple(
        ScoreNote(f"s{i}", i, pitch, tick / division) for i, (tick, pitch) in enumerate(notes)
    ))


def load_score(source: str | bytes, format: str = "json", score_id: str = "") -> Score:
    """Load a monophonic bass line from JSON text or SMF bytes."""
    if format == "json":
        score = _score_from_json(source)
        if score_id and not score.score_id:
            score = Score(score_id, score.notes)
        return score
    if format == "smf":
        if isinstance(source, str):
            raise TypeError("SMF scores must be given as bytes")
        return _score_from_smf(source, score_id)
    raise ValueError(f"unknown score format {format!r}")


@dataclass(frozen=True)
class Alignment:
    """Many-to-one mapping from performance notes to score notes."""

    score_id: str
    performance_id: str
    pairs: frozenset[tuple[str, str]]
    unmatched_performance: frozenset[str] = frozenset()
    _by_score: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        by_score = defaultdict(list)
        for score_note_id, perf_id in self.pairs:
            by_score[score_note_id].append(perf_id)
        object.__setattr__(self, "_by_score", dict(by_score))

    def performance_notes_for(self, score_note_id: str) -> list[str]:
        return sorted(self._by_score.get(score_note_id, ()))

    def to_json(self) -> dict:
        return {
            "score_id": self.score_id,
            "performance_id": self.performance_id,
            "matches": [
                {"score_note_id": sid, "performance_note_ids": sorted(pids)}
                for sid, pids in sorted(self._by_score.items())
            ],
            "unmatched_performance": sorted(self.unmatched_performance),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def load_alignment(text: str | bytes, score: Score | None = None,
                   performance: Performance | None = None) -> Alignment:
    """Parse alignment JSON.

    Duplicate assignments always raise :class:`AlignmentError`; dangling ids
    are checked when ``score`` and ``performance`` are given.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlignmentError(f"malformed alignment JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise AlignmentError("malformed alignment JSON: expected an object")
    _warn_unknown(doc, {"score_id", "performance_id", "matches", "unmatched_performance"}, "alignment")

    owner: dict[str, str] = {}
    violations = []
    pairs = set()
    for match in doc.get("matches", []):
        _warn_unknown(match, {"score_note_id", "performance_note_ids"}, "alignment match")
        sid = str(match["score_note_id"])
        for pid in map(str, match.get("performance_note_ids", [])):
            if pid in owner and owner[pid] != sid:
                violations.append(f"performance note {pid} assigned to score notes {owner[pid]} and {sid}")
            owner[pid] = sid
            pairs.add((sid, pid))
    unmatched = frozenset(map(str, doc.get("unmatched_performance", [])))
    for pid in sorted(unmatched & owner.keys()):
        violations.append(f"performance note {pid} is both matched (to {owner[pid]}) and unmatched")
    if violations:
        raise AlignmentError("; ".join(violations), violations)

    alignment = Alignment(str(doc.get("score_id", "")), str(doc.get("performance_id", "")),
                          frozenset(pairs), unmatched)
    if score is not None and performance is not None:
        problems = validate(alignment, score, performance)
        if problems:
            raise AlignmentError("; ".join(problems), problems)
    return alignment


def validate(alignment: Alignment, score: Score, performance: Performance) -> list[str]:
    """Return every invariant violation of ``alignment`` against the given pair."""
    violations = []
    if alignment.score_id and score.score_id and alignment.score_id != score.score_id:
        violations.append(f"alignment score_id {alignment.score_id!r} != score {score.score_id!r}")
    if (alignment.performance_id and performance.performance_id
            and alignment.performance_id != performance.performance_id):
        violations.append(f"alignment performance_id {alignment.performance_id!r} "
                          f"!= performance {performance.performance_id!r}")

    score_ids = {n.id for n in score.notes}
    perf_ids = {n.id for n in performance.notes}
    owner: dict[str, str] = {}
    for sid, pid in sorted(alignment.pairs):
        if sid not in score_ids:
            violations.append(f"pair ({sid}, {pid}) references unknown score note {sid}")
        if pid not in perf_ids:
            violations.append(f"pair ({sid}, {pid}) references unknown performance note {pid}")
        if pid in owner:
            violations.append(f"performance note {pid} assigned to score notes {owner[pid]} and {sid}")
        owner[pid] = sid
    for pid in sorted(alignment.unmatched_performance):
        if pid not in perf_ids:
            violations.append(f"unmatched list references unknown performance note {pid}")
        if pid in owner:
            violations.append(f"performance note {pid} is both matched (to {owner[pid]}) and unmatched")
    return violations
