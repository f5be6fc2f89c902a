"""Standard MIDI File reading and writing.

Only note and tempo events are interpreted; everything else in the byte
stream is skipped. Times are converted from ticks to seconds through the
tempo map collected from all tracks.
"""

from __future__ import annotations

import bisect
import json
import re
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_TEMPO = 500000  # microseconds per quarter note (120 bpm)


class MidiFormatError(ValueError):
    """Raised for byte streams that are not a usable Standard MIDI File."""


@dataclass(frozen=True)
class PerformanceNote:
    id: str
    onset_s: float
    offset_s: float
    pitch: int
    velocity: int = 64
    track: int = 0
    channel: int = 0

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside 0-127")
        if self.offset_s <= self.onset_s:
            raise ValueError(f"note {self.id}: offset {self.offset_s} <= onset {self.onset_s}")


@dataclass(frozen=True)
class PerformanceMeta:
    player_id: str = ""
    score_id: str = ""
    take: int = 0

    @property
    def performance_id(self) -> str:
        if not self.player_id:
            return ""
        return f"{self.player_id}_{self.score_id}_{self.take}"


@dataclass(frozen=True)
class Performance:
    meta: PerformanceMeta
    notes: tuple[PerformanceNote, ...]

    def __post_init__(self):
        ids = [n.id for n in self.notes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate performance note ids")
        keys = [(n.onset_s, n.pitch) for n in self.notes]
        if keys != sorted(keys):
            raise ValueError("performance notes must be sorted by (onset_s, pitch)")

    @property
    def performance_id(self) -> str:
        return self.meta.performance_id

    def by_id(self) -> dict[str, PerformanceNote]:
        return {n.id: n for n in self.notes}

    @classmethod
    def from_events(cls, events: Iterable[tuple], meta: PerformanceMeta | None = None) -> "Performance":
        """Build a performance from ``(onset_s, offset_s, pitch, velocity, track, channel)`` rows.

        Rows are sorted by ``(onset_s, pitch)`` and given ids ``n0, n1, ...``
        in that order.
        """
        rows = sorted(events, key=lambda r: (r[0], r[2], *r[4:6]))
        notes = tuple(
            PerformanceNote(f"n{i}", r[0], r[1], r[2], *r[3:6])
            for i, r in enumerate(rows)
        )
        return cls(meta or PerformanceMeta(), notes)


@dataclass(frozen=True)
class TempoMap:
    """Ticks-per-quarter resolution plus ``(tick, us_per_quarter)`` changes."""

    division: int
    changes: tuple[tuple[int, int], ...] = ()
    _starts: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _seconds: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _tempi: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.division <= 0:
            raise ValueError("division must be positive")
        ticks = [t for t, _ in self.changes]
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ValueError("tempo changes must be strictly ascending by tick")
        if any(t < 0 or us <= 0 for t, us in self.changes):
            raise ValueError("invalid tempo change")
        changes = list(self.changes)
        if not changes or changes[0][0] != 0:
            changes.insert(0, (0, DEFAULT_TEMPO))
        starts, seconds, tempi = [], [], []
        elapsed = 0.0
        for i, (tick, us) in enumerate(changes):
            if i:
                prev_tick, prev_us = changes[i - 1]
                elapsed += (tick - prev_tick) * prev_us / (self.division * 1e6)
            starts.append(tick)
            seconds.append(elapsed)
            tempi.append(us)
        object.__setattr__(self, "_starts", tuple(starts))
        object.__setattr__(self, "_seconds", tuple(seconds))
        object.__setattr__(self, "_tempi", tuple(tempi))

    def seconds(self, tick: int) -> float:
        i = bisect.bisect_right(self._starts, tick) - 1
        return self._seconds[i] + (tick - self._starts[i]) * self._tempi[i] / (self.division * 1e6)


def ticks_to_seconds(tick: int, tempo_map: TempoMap) -> float:
    if tick < 0:
        raise ValueError("tick must be >= 0")
    return tempo_map.seconds(tick)


# --- low-level chunk reading -------------------------------------------------

def _read_vlq(data: bytes, pos: int, end: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= end:
            raise MidiFormatError("truncated track: variable-length quantity runs past chunk end")
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise MidiFormatError("variable-length quantity longer than 4 bytes")


def _read_header(data: bytes) -> tuple[int, int, int, int]:
    if len(data) < 14 or data[:4] != b"MThd":
        raise MidiFormatError("malformed header chunk: missing MThd")
    (length,) = struct.unpack(">I", data[4:8])
    if length < 6 or len(data) < 8 + length:
        raise MidiFormatError("malformed header chunk: bad length")
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    if division & 0x8000:
        raise MidiFormatError("SMPTE time division is not supported")
    if division == 0:
        raise MidiFormatError("malformed header chunk: zero division")
    if fmt not in (0, 1):
        raise MidiFormatError(f"unsupported SMF format {fmt}")
    return fmt, ntracks, division, 8 + length


def _iter_tracks(data: bytes, pos: int):
    while pos + 8 <= len(data):
        kind = data[pos:pos + 4]
        (length,) = struct.unpack(">I", data[pos + 4:pos + 8])
        start = pos + 8
        end = start + length
        if end > len(data):
            raise MidiFormatError(f"truncated track: chunk declares {length} bytes, "
                                  f"{len(data) - start} available")
        if kind == b"MTrk":
            yield data, start, end
        pos = end
    if pos != len(data):
        raise MidiFormatError("truncated chunk header at end of file")


def _parse_track(data: bytes, pos: int, end: int):
    """Yield ``(tick, kind, payload)`` for note and tempo events of one track.

    ``kind`` is ``"on"``/``"off"`` with ``(channel, pitch, velocity)`` or
    ``"tempo"`` with microseconds per quarter. A final ``("end", None)`` row
    carries the last tick of the track.
    """
    tick = 0
    status = None
    while pos < end:
        delta, pos = _read_vlq(data, pos, end)
        tick += delta
        if pos >= end:
            raise MidiFormatError("truncated track: event missing after delta time")
        byte = data[pos]
        if byte & 0x80:
            pos += 1
            if byte < 0xF0:
                status = byte
        elif status is None:
            raise MidiFormatError("data byte without running status")
        else:
            byte = status

        if byte == 0xFF:
            if pos >= end:
                raise MidiFormatError("truncated track: meta event")
            meta_type = data[pos]
            length, pos = _read_vlq(data, pos + 1, end)
            if pos + length > end:
                raise MidiFormatError("truncated track: meta event data")
            payload = data[pos:pos + length]
            pos += length
            if meta_type == 0x51 and length == 3:
                yield tick, "tempo", int.from_bytes(payload, "big")
            elif meta_type == 0x2F:
                break
            continue
        if byte in (0xF0, 0xF7):
            length, pos = _read_vlq(data, pos, end)
            pos += length
            if pos > end:
                raise MidiFormatError("truncated track: sysex data")
            status = None
            continue
        if byte >= 0xF0:
            # system common/real-time messages do not appear in SMFs; skip by size
            pos += {0xF1: 1, 0xF2: 2, 0xF3: 1}.get(byte, 0)
            continue

        kind = byte & 0xF0
        nbytes = 1 if kind in (0xC0, 0xD0) else 2
        if pos + nbytes > end:
            raise MidiFormatError("truncated track: channel message data")
        msg = data[pos:pos + nbytes]
        pos += nbytes
        channel = byte & 0x0F
        if kind == 0x90 and msg[1] > 0:
            yield tick, "on", (channel, msg[0], msg[1])
        elif kind == 0x80 or kind == 0x90:
            yield tick, "off", (channel, msg[0], 0)
    yield tick, "end", None


def read_tempo_map(data: bytes) -> TempoMap:
    _, _, division, pos = _read_header(data)
    tempo = {}
    for buf, start, end in _iter_tracks(data, pos):
        for tick, kind, payload in _parse_track(buf, start, end):
            if kind == "tempo":
                tempo[tick] = payload
    return TempoMap(division, tuple(sorted(tempo.items())))


def _note_ticks(data: bytes):
    """Return division, tempo map and paired ``(on, off, pitch, vel, track, ch)`` ticks."""
    _, _, division, pos = _read_header(data)
    tracks = [list(_parse_track(buf, s, e)) for buf, s, e in _iter_tracks(data, pos)]
    tempo = {}
    for events in tracks:
        for tick, kind, payload in events:
            if kind == "tempo":
                tempo[tick] = payload
    tempo_map = TempoMap(division, tuple(sorted(tempo.items())))

    pairs = []
    for track_no, events in enumerate(tracks):
        sounding: dict[tuple[int, int], tuple[int, int]] = {}
        for tick, kind, payload in events:
            if kind == "on":
                channel, pitch, velocity = payload
                previous = sounding.pop((channel, pitch), None)
                if previous is not None:
                    pairs.append((previous[0], tick, pitch, previous[1], track_no, channel))
                sounding[(channel, pitch)] = (tick, velocity)
            elif kind == "off":
                channel, pitch, _ = payload
                started = sounding.pop((channel, pitch), None)
                if started is None:
                    warnings.warn(f"track {track_no}: orphan note-off pitch {pitch} "
                                  f"channel {channel} at tick {tick}; skipped")
                    continue
                pairs.append((started[0], tick, pitch, started[1], track_no, channel))
            elif kind == "end":
                for (channel, pitch), (on, velocity) in sorted(sounding.items()):
                    warnings.warn(f"track {track_no}: note pitch {pitch} channel {channel} "
                                  f"still sounding at track end; closed at tick {tick}")
                    pairs.append((on, tick, pitch, velocity, track_no, channel))
    return division, tempo_map, pairs


def parse_smf(data: bytes, meta: PerformanceMeta | None = None) -> Performance:
    """Parse SMF bytes (format 0 or 1) into a :class:`Performance`.

    Zero-length notes are stretched to one tick so that every note has a
    positive duration.
    """
    _, tempo_map, pairs = _note_ticks(data)
    rows = []
    for on, off, pitch, velocity, track, channel in pairs:
        off = max(off, on + 1)
        rows.append((tempo_map.seconds(on), tempo_map.seconds(off), pitch, velocity, track, channel))
    return Performance.from_events(rows, meta)


def parse_smf_ticks(data: bytes) -> tuple[int, list[tuple[int, int]]]:
    """Division and sorted ``(onset_tick, pitch)`` of every note; used for scores."""
    division, _, pairs = _note_ticks(data)
    return division, sorted((p[0], p[2]) for p in pairs)


# --- writing -----------------------------------------------------------------

def _vlq(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def write_smf(notes: Sequence[tuple[float, float, int, int]], division: int = 960,
              tempo: int = DEFAULT_TEMPO) -> bytes:
    """Encode ``(onset_s, offset_s, pitch, velocity)`` rows as a format-0 SMF.

    Times are rounded to the nearest tick at a constant tempo.
    """
    ticks_per_s = division * 1e6 / tempo
    events = []
    for onset, offset, pitch, velocity in notes:
        on = round(onset * ticks_per_s)
        off = max(round(offset * ticks_per_s), on + 1)
        # offs sort before ons at the same tick so repeated pitches re-trigger
        events.append((off, 0, bytes([0x80, pitch, 0])))
        events.append((on, 1, bytes([0x90, pitch, velocity])))
    events.sort(key=lambda e: (e[0], e[1], e[2][1]))

    body = bytearray(b"\x00\xff\x51\x03" + tempo.to_bytes(3, "big"))
    last = 0
    for tick, _, msg in events:
        body += _vlq(tick - last) + msg
        last = tick
    body += b"\x00\xff\x2f\x00"
    header = b"MThd" + struct.pack(">IHHH", 6, 0, 1, division)
    return header + b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


# --- metadata ----------------------------------------------------------------

_NAME_RE = re.compile(r"^(?P<player>[^_]+)_(?P<score>.+)_(?P<take>\d+)$")


def meta_from_filename(path: str | Path) -> PerformanceMeta:
    """Metadata from the ``<player>_<score>_<take>.mid`` naming convention."""
    match = _NAME_RE.match(Path(path).stem)
    if not match:
        return PerformanceMeta()
    return PerformanceMeta(match["player"], match["score"], int(match["take"]))


def load_manifest(path: str | Path) -> list[dict]:
    """Read a JSON manifest (an array of objects) and resolve relative paths."""
    path = Path(path)
    entries = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise ValueError(f"{path}: manifest must be a JSON array")
    resolved = []
    for entry in entries:
        entry = dict(entry)
        for key in ("path", "score_path", "performance_path", "alignment_path"):
            if key in entry and not Path(entry[key]).is_absolute():
                entry[key] = str(path.parent / entry[key])
        resolved.append(entry)
    return resolved


def load_performance(path: str | Path, manifest: Sequence[dict] | None = None) -> Performance:
    """Parse a recording; a matching manifest entry overrides filename metadata."""
    path = Path(path)
    meta = meta_from_filename(path)
    for entry in manifest or ():
        entry_path = entry.get("path", entry.get("performance_path"))
        if entry_path and Path(entry_path).resolve() == path.resolve():
            meta = PerformanceMeta(
                str(entry.get("player_id", meta.player_id)),
                str(entry.get("score_id", meta.score_id)),
                int(entry.get("take", meta.take)),
            )
            break
    return parse_smf(path.read_bytes(), meta)
