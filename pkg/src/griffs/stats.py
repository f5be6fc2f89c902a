"""Griff profiles, dataset statistics, coverage curves and cross-entropy."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .alignment import Alignment, Score
from .griff import BASS_ONLY, EMPTY, classify
from .midi import Performance

DEFAULT_ALPHA = 1.0


@dataclass(frozen=True)
class Profile:
    """Counts of categorical symbols; zero counts are never stored."""

    counts: Mapping[Hashable, int] = field(default_factory=dict)

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("profile counts must be nonnegative")
        object.__setattr__(self, "counts", {k: c for k, c in self.counts.items() if c})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __add__(self, other: "Profile") -> "Profile":
        return type(self)(Counter(self.counts) + Counter(other.counts))

    def __len__(self):
        return len(self.counts)

    @classmethod
    def merge(cls, profiles: Iterable["Profile"]) -> "Profile":
        total = Counter()
        for p in profiles:
            total.update(p.counts)
        return cls(total)


class GriffProfile(Profile):
    pass


class IntervalProfile(Profile):
    pass


def build_profile(griffs: Iterable[str], filter: bool = True) -> GriffProfile:
    counts = Counter(griffs)
    if filter:
        counts = Counter({g: c for g, c in counts.items() if classify(g) not in (EMPTY, BASS_ONLY)})
    return GriffProfile(counts)


@dataclass(frozen=True)
class DatasetStats:
    types: int
    total: int
    filtered_bass_only: int
    filtered_empty: int
    excluded: bool = True  # whether the filtered griffs were left out of total

    @property
    def grand_total(self) -> int:
        if not self.excluded:
            return self.total
        return self.total + self.filtered_bass_only + self.filtered_empty

    @property
    def avg_occurrence(self) -> Fraction | None:
        if self.types == 0:
            return None
        return Fraction(self.total, self.types)

    @property
    def percentages(self) -> dict[str, float]:
        base = self.grand_total
        if not base:
            return {"bass_only": 0.0, "empty": 0.0}
        return {"bass_only": 100 * self.filtered_bass_only / base,
                "empty": 100 * self.filtered_empty / base}

    def as_dict(self, decimals: int = 6) -> dict:
        avg = self.avg_occurrence
        pct = self.percentages
        return {
            "types": self.types,
            "total": self.total,
            "avg_occurrence": None if avg is None else round(float(avg), decimals),
            "filtered_bass_only": self.filtered_bass_only,
            "filtered_empty": self.filtered_empty,
            "pct_bass_only": round(pct["bass_only"], decimals),
            "pct_empty": round(pct["empty"], decimals),
        }


def dataset_stats(griff_lists: Iterable[Iterable[str]], filter: bool = True) -> DatasetStats:
    """Statistics over raw (unfiltered) griff strings of many performances.

    With ``filter`` the empty and bass-only griffs are counted separately and
    excluded from ``types`` and ``total``; percentages are relative to all
    griffs. Without it they stay in the counts (their counters are still
    reported).
    """
    counts = Counter()
    for griffs in griff_lists:
        counts.update(griffs)
    bass_only = sum(c for g, c in counts.items() if classify(g) == BASS_ONLY)
    empty = sum(c for g, c in counts.items() if classify(g) == EMPTY)
    profile = build_profile(counts.elements(), filter=filter)
    return DatasetStats(len(profile), profile.total, bass_only, empty, excluded=filter)


@dataclass(frozen=True)
class CoverageCurve:
    points: tuple[tuple[int, float], ...]
    ranking: tuple[Hashable, ...] = ()

    @property
    def fractions(self) -> list[float]:
        return [f for _, f in self.points]


def _rank(profile: Profile) -> list[tuple[Hashable, int]]:
    return sorted(profile.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def cumulative_coverage(profile: Profile) -> CoverageCurve:
    """Fraction of occurrences covered by the k most frequent types, for every k."""
    total = profile.total
    if total <= 0:
        raise ValueError("cannot compute coverage of an empty profile")
    ranked = _rank(profile)
    points, running = [], 0
    for k, (_, count) in enumerate(ranked, start=1):
        running += count
        points.append((k, running / total))
    return CoverageCurve(tuple(points), tuple(key for key, _ in ranked))


def interval_profile(score: Score, performance: Performance, alignment: Alignment) -> IntervalProfile:
    """Per-note chromatic interval counts for every aligned performance note."""
    pitch_of = {n.id: n.pitch for n in performance.notes}
    score_pitch = {n.id: n.pitch for n in score.notes}
    return IntervalProfile(Counter(pitch_of[pid] - score_pitch[sid] for sid, pid in alignment.pairs))


def smoothed(p: Profile, vocabulary: Sequence[Hashable], alpha: float) -> list[float]:
    denom = p.total + alpha * len(vocabulary)
    return [(p.counts.get(x, 0) + alpha) / denom for x in vocabulary]


def cross_entropy(p: Profile, q: Profile, alpha: float = DEFAULT_ALPHA) -> float:
    """Cross-entropy in nats between add-``alpha`` smoothed ``p`` and ``q``.

    Both are smoothed over the union of their supports.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if p.total <= 0 or q.total <= 0:
        raise ValueError("cross-entropy needs nonempty profiles")
    vocab = sorted(set(p.counts) | set(q.counts), key=repr)
    p_hat = smoothed(p, vocab, alpha)
    q_hat = smoothed(q, vocab, alpha)
    return -math.fsum(pi * math.log(qi) for pi, qi in zip(p_hat, q_hat))


def mean_pairwise_ce(perfs_a: Sequence[Profile], perfs_b: Sequence[Profile],
                     alpha: float = DEFAULT_ALPHA, same_player: bool | None = None) -> float:
    """Average ``cross_entropy(p, q)`` over ordered pairs ``p`` in a, ``q`` in b.

    For the same player (``perfs_a is perfs_b`` unless stated otherwise) a
    performance is never paired with itself.
    """
    if same_player is None:
        same_player = perfs_a is perfs_b
    if not perfs_a or not perfs_b:
        raise ValueError("both performance lists must be nonempty")
    pairs = [(p, q) for i, p in enumerate(perfs_a) for j, q in enumerate(perfs_b)
             if not (same_player and i == j)]
    if not pairs:
        raise ValueError("a single performance has no non-self pairs")
    return math.fsum(cross_entropy(p, q, alpha) for p, q in pairs) / len(pairs)


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]
    errors: tuple[str, ...] = ()
    score_id: str = ""
    representation: str = ""

    def __getitem__(self, ij):
        i, j = ij
        return self.values[i][j]

    def diagonal(self) -> list[float | None]:
        return [self.values[i][i] for i in range(len(self.labels))]

    def off_diagonal(self) -> list[float | None]:
        n = len(self.labels)
        return [self.values[i][j] for i in range(n) for j in range(n) if i != j]


def similarity_matrix(profiles: Mapping[str, Sequence[Profile]], alpha: float = DEFAULT_ALPHA,
                      score_id: str = "", representation: str = "") -> SimilarityMatrix:
    """Mean pairwise cross-entropy between the players' performances of one score.

    Cells that cannot be computed (no profiles, or a single performance on
    the diagonal) are ``None`` and described in ``errors``.
    """
    labels = tuple(sorted(profiles))
    rows, errors = [], []
    for a in labels:
        row = []
        for b in labels:
            pa, pb = [p for p in profiles[a] if p.total], [p for p in profiles[b] if p.total]
            try:
                row.append(mean_pairwise_ce(pa, pb, alpha, same_player=(a == b)))
            except ValueError as exc:
                row.append(None)
                errors.append(f"cell ({a}, {b}): {exc}")
        rows.append(tuple(row))
    return SimilarityMatrix(labels, tuple(rows), tuple(errors), score_id, representation)
