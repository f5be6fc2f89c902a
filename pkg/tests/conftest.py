import json
import random

import mido
import pytest

from griffs.alignment import Score


def mido_notes(path_or_file):
    """Reference note list ``(onset_s, offset_s, pitch)`` read through mido.

    mido merges the tracks and converts delta ticks with the tempo map on
    its own; pairing follows the same last-on-wins convention.
    """
    mid = path_or_file if isinstance(path_or_file, mido.MidiFile) else mido.MidiFile(path_or_file)
    now = 0.0
    sounding = {}
    notes = []
    for msg in mid:
        now += msg.time
        if msg.type == "note_on" and msg.velocity > 0:
            key = (msg.channel, msg.note)
            if key in sounding:
                notes.append((sounding.pop(key), now, msg.note))
            sounding[key] = now
        elif msg.type in ("note_off", "note_on"):
            start = sounding.pop((msg.channel, msg.note), None)
            if start is not None:
                notes.append((start, now, msg.note))
    return sorted(notes, key=lambda n: (n[0], n[2]))


def mido_file(tracks, division=480):
    """Build a MidiFile from ``[(abs_tick, message), ...]`` per track."""
    mid = mido.MidiFile(type=1 if len(tracks) > 1 else 0, ticks_per_beat=division)
    for events in tracks:
        track = mido.MidiTrack()
        last = 0
        for tick, msg in sorted(events, key=lambda e: e[0]):
            track.append(msg.copy(time=tick - last))
            last = tick
        mid.tracks.append(track)
    return mid


def random_plan(rng: random.Random, n_notes: int, max_vectors=4, max_intervals=5, lo=-24, hi=24):
    plan = []
    for _ in range(n_notes):
        griff = []
        for _ in range(rng.randint(1, max_vectors)):
            griff.append(tuple(sorted(rng.sample(range(lo, hi + 1), rng.randint(1, max_intervals)))))
        plan.append(tuple(griff))
    return plan


def random_score(rng: random.Random, n_notes: int, score_id="rand"):
    return Score.from_pitches(score_id, [rng.randint(36, 84) for _ in range(n_notes)])


@pytest.fixture
def rng():
    return random.Random(20251016)


def write_corpus(root, scores, takes, spread_s=0.1, beat_s=1.0):
    """Write scores, SMF performances and alignments plus a manifest under ``root``.

    ``takes`` maps ``(player_id, score_id)`` to a list of griff plans, one
    per take. Returns the manifest path.
    """
    from griffs.aligner import synthesize
    from griffs.midi import PerformanceMeta, write_smf

    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for score_id, score in scores.items():
        (root / f"{score_id}.json").write_text(json.dumps(score.to_json()))
    for (player, score_id), plans in sorted(takes.items()):
        for take, plan in enumerate(plans, start=1):
            meta = PerformanceMeta(player, score_id, take)
            perf, alignment = synthesize(scores[score_id], plan, beat_s, spread_s, meta=meta)
            stem = f"{player}_{score_id}_{take}"
            (root / f"{stem}.mid").write_bytes(write_smf(
                [(n.onset_s, n.offset_s, n.pitch, n.velocity) for n in perf.notes]))
            (root / f"{stem}.alignment.json").write_text(alignment.dumps())
            entries.append({"score_path": f"{score_id}.json", "performance_path": f"{stem}.mid",
                            "alignment_path": f"{stem}.alignment.json", "player_id": player,
                            "score_id": score_id, "take": take})
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=1))
    return manifest


ACCEPTANCE_RESULTS = []


def record_criterion(name, ok, detail=""):
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    line = f"{name}: {status}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
