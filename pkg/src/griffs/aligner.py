"""A simple deterministic aligner and a synthetic performance generator.

``greedy_align`` is meant for testing and for users without access to a
proper note matcher: it anchors score notes on bass-note onsets and hands
every performance note to the anchored score note whose time segment
contains it. ``synthesize`` builds a performance and its exact alignment
from a plan of griffs.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

from .alignment import Alignment, Score
from .griff import OrderedGriff
from .midi import Performance, PerformanceMeta


class UnalignableError(ValueError):
    pass


@dataclass(frozen=True)
class AlignParams:
    anchor_pitch_match: bool = True
    # without pitch matching, the anchor is the lowest note starting within
    # this distance of the first unused candidate
    max_anchor_skew_s: float = 0.05

    def __post_init__(self):
        if self.max_anchor_skew_s <= 0:
            raise ValueError("max_anchor_skew_s must be > 0")


def _find_anchors(score: Score, performance: Performance, params: AlignParams) -> list[int | None]:
    notes = performance.notes
    used: set[int] = set()
    anchors: list[int | None] = []
    floor = float("-inf")
    for score_note in score.notes:
        found = None
        if params.anchor_pitch_match:
            for i, note in enumerate(notes):
                if i not in used and note.onset_s >= floor and note.pitch == score_note.pitch:
                    found = i
                    break
        else:
            first = next((i for i, n in enumerate(notes) if i not in used and n.onset_s >= floor), None)
            if first is not None:
                limit = notes[first].onset_s + params.max_anchor_skew_s
                candidates = [i for i in range(first, len(notes))
                              if i not in used and notes[i].onset_s <= limit]
                found = min(candidates, key=lambda i: (notes[i].pitch, notes[i].onset_s))
                # the chord's other notes belong to this anchor, never to the next one
                used.update(candidates)
        if found is not None:
            used.add(found)
            floor = notes[found].onset_s
        anchors.append(found)
    return anchors


def greedy_align(score: Score, performance: Performance, params: AlignParams = AlignParams()) -> Alignment:
    if not performance.notes:
        raise UnalignableError("unalignable: performance has no notes")
    anchors = _find_anchors(score, performance, params)
    anchored = [(score.notes[k].id, performance.notes[a].onset_s)
                for k, a in enumerate(anchors) if a is not None]
    if not anchored:
        raise UnalignableError("unalignable: no anchor note found for any score note")

    # segment k starts at the midpoint between anchors k-1 and k
    bounds = [(t1 + t2) / 2 for (_, t1), (_, t2) in zip(anchored, anchored[1:])]
    pairs = set()
    for note in performance.notes:
        owner = bisect.bisect_right(bounds, note.onset_s)
        pairs.add((anchored[owner][0], note.id))
    return Alignment(score.score_id, performance.performance_id, frozenset(pairs))


def synthesize(score: Score, griff_plan: Sequence[OrderedGriff], beat_s: float = 1.0,
               spread_s: float = 0.1, duration_s: float | None = None,
               meta: PerformanceMeta | None = None) -> tuple[Performance, Alignment]:
    """Realize ``griff_plan`` over ``score``; score note ``i`` sounds at ``i * beat_s``.

    Vector ``j`` of a griff is played ``j * spread_s`` after the score-note
    time. Notes last ``duration_s`` (default: half the spread, or half a
    beat when the spread is zero).
    """
    if len(griff_plan) != len(score.notes):
        raise ValueError(f"plan has {len(griff_plan)} griffs for {len(score.notes)} score notes")
    if spread_s < 0 or beat_s <= 0:
        raise ValueError("spread_s must be >= 0 and beat_s > 0")
    if duration_s is None:
        duration_s = spread_s / 2 if spread_s > 0 else beat_s / 2

    rows = []
    for i, (score_note, griff) in enumerate(zip(score.notes, griff_plan)):
        start = i * beat_s
        for j, vector in enumerate(griff):
            onset = start + j * spread_s
            for interval in vector:
                pitch = score_note.pitch + interval
                if not 0 <= pitch <= 127:
                    raise ValueError(f"score note {score_note.id}: interval {interval} gives pitch {pitch}")
                rows.append((onset, onset + duration_s, pitch, 64, 0, 0, score_note.id))

    rows.sort(key=lambda r: (r[0], r[2]))
    performance = Performance.from_events((r[:6] for r in rows), meta)
    pairs = frozenset((r[6], note.id) for r, note in zip(rows, performance.notes))
    return performance, Alignment(score.score_id, performance.performance_id, pairs)
