"""Batch loading of (score, performance, alignment) triples from a manifest."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .alignment import Alignment, Score, load_alignment, load_score, validate
from .griff import DEFAULT_WINDOW_S, extract_all
from .midi import Performance, PerformanceMeta, load_manifest, parse_smf
from .stats import Profile, build_profile, interval_profile

log = logging.getLogger(__name__)

REPRESENTATIONS = ("ordered", "pooled", "interval")


@dataclass(frozen=True)
class Record:
    player_id: str
    score_id: str
    take: int
    score: Score
    performance: Performance
    alignment: Alignment

    def griffs(self, representation: str = "ordered", window_s: float = DEFAULT_WINDOW_S) -> list[str]:
        rows = extract_all(self.score, self.performance, self.alignment, window_s, representation)
        return [g for _, g in rows]

    def profile(self, representation: str = "ordered", window_s: float = DEFAULT_WINDOW_S,
                filter: bool = True) -> Profile:
        if representation == "interval":
            return interval_profile(self.score, self.performance, self.alignment)
        return build_profile(self.griffs(representation, window_s), filter=filter)


def read_score(path: str | Path, score_id: str = "") -> Score:
    path = Path(path)
    if path.suffix.lower() in (".mid", ".midi", ".smf"):
        return load_score(path.read_bytes(), "smf", score_id=score_id or path.stem)
    return load_score(path.read_text(encoding="utf-8"), "json", score_id=score_id)


def load_record(entry: dict) -> Record:
    """Load and validate one manifest entry; raises on any failure."""
    meta = PerformanceMeta(str(entry["player_id"]), str(entry["score_id"]), int(entry.get("take", 0)))
    score = read_score(entry["score_path"], meta.score_id)
    performance = parse_smf(Path(entry["performance_path"]).read_bytes(), meta)
    alignment = load_alignment(Path(entry["alignment_path"]).read_text(encoding="utf-8"))
    problems = validate(alignment, score, performance)
    if problems:
        raise ValueError("; ".join(problems))
    return Record(meta.player_id, meta.score_id, meta.take, score, performance, alignment)


def load_corpus(manifest_path: str | Path, workers: int = 4) -> tuple[list[Record], list[str]]:
    """Load every manifest entry; failures are logged and returned, not raised."""
    entries = load_manifest(manifest_path)

    def attempt(entry):
        try:
            return load_record(entry), None
        except (OSError, ValueError, KeyError) as exc:
            return None, f"{entry.get('performance_path', entry)}: {exc}"

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(attempt, entries))
    records = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    for error in errors:
        log.warning("skipping %s", error)
    return records, errors
