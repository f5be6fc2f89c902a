"""Command-line interface: ``griffs {extract,stats,coverage,similarity,align}``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from . import report
from .aligner import AlignParams, UnalignableError, greedy_align
from .alignment import AlignmentError, ScoreError, load_alignment
from .corpus import REPRESENTATIONS, load_corpus, read_score
from .griff import classify, extract_all
from .midi import MidiFormatError, load_manifest, load_performance
from .stats import Profile, cumulative_coverage, dataset_stats, similarity_matrix

log = logging.getLogger("griffs")

EXIT_OK, EXIT_ERROR, EXIT_INPUT, EXIT_UNALIGNABLE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    window_ms: float = 35.0
    representations: tuple[str, ...] = ("ordered",)
    smoothing_alpha: float = 1.0
    filter: bool = True
    output_format: str = "json"
    manifest_path: str | None = None
    output_path: str | None = None
    svg: bool = False

    def __post_init__(self):
        if self.window_ms < 0:
            raise CliError("--window-ms must be >= 0", EXIT_INPUT)
        if self.smoothing_alpha <= 0:
            raise CliError("--alpha must be > 0", EXIT_INPUT)

    @property
    def window_s(self) -> float:
        return self.window_ms / 1000

    @property
    def representation(self) -> str:
        return self.representations[0]


def _existing(path: str | None, what: str) -> Path:
    if not path:
        raise CliError(f"missing {what} path", EXIT_INPUT)
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{what} file not found: {p}", EXIT_INPUT)
    return p


def _emit(config: RunConfig, text: str):
    if config.output_path:
        Path(config.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_corpus(config: RunConfig):
    manifest = _existing(config.manifest_path, "manifest")
    if not load_manifest(manifest):
        raise CliError(f"manifest {manifest} lists no performances")
    records, errors = load_corpus(manifest)
    if not records:
        raise CliError(f"no usable performances in {manifest} ({len(errors)} failed)")
    return records, errors


def cmd_extract(config: RunConfig, score_path: str, perf_path: str, alignment_path: str) -> str:
    if config.representation not in ("ordered", "pooled"):
        raise CliError("extract supports the ordered and pooled representations only", EXIT_INPUT)
    score_file = _existing(score_path, "score")
    perf_file = _existing(perf_path, "performance")
    align_file = _existing(alignment_path, "alignment")
    score = read_score(score_file)
    performance = load_performance(perf_file)
    alignment = load_alignment(align_file.read_text(encoding="utf-8"), score, performance)
    rows = extract_all(score, performance, alignment, config.window_s, config.representation)

    if config.output_format == "csv":
        return report.to_csv(["score_note_id", "griff", "class"],
                             ((sid, g, classify(g)) for sid, g in rows))
    return report.dumps({
        "score_id": score.score_id,
        "performance_id": alignment.performance_id or performance.performance_id,
        "representation": config.representation,
        "window_ms": float(config.window_ms),
        "griffs": [{"score_note_id": sid, "griff": g, "class": classify(g)} for sid, g in rows],
    }) + "\n"


def cmd_stats(config: RunConfig) -> str:
    records, errors = _load_corpus(config)
    stats = {}
    for rep in config.representations:
        if rep == "interval":
            raise CliError("stats supports the ordered and pooled representations only", EXIT_INPUT)
        stats[rep] = dataset_stats((r.griffs(rep, config.window_s) for r in records), config.filter)

    if config.output_format == "table":
        return report.stats_table(stats)
    if config.output_format == "csv":
        header = ["representation", *next(iter(stats.values())).as_dict()]
        return report.to_csv(header, ([rep, *s.as_dict().values()] for rep, s in stats.items()))
    return report.dumps({
        "performances": len(records),
        "skipped": len(errors),
        "filter": config.filter,
        "window_ms": float(config.window_ms),
        "representations": {rep: s.as_dict() for rep, s in stats.items()},
    }) + "\n"


def cmd_coverage(config: RunConfig) -> tuple[str, str | None]:
    records, errors = _load_corpus(config)
    rep = config.representation
    grouped: dict[tuple[str, str], list[Profile]] = defaultdict(list)
    for record in records:
        profile = record.profile(rep, config.window_s, config.filter)
        grouped[(record.player_id, "all")].append(profile)
        grouped[(record.player_id, record.score_id)].append(profile)

    curves = {}
    for (player, scope), profiles in sorted(grouped.items()):
        merged = Profile.merge(profiles)
        if merged.total:
            curves[(player, scope)] = cumulative_coverage(merged)
        else:
            log.warning("player %s, scope %s: no griffs left after filtering", player, scope)

    svg = None
    if config.svg:
        series = {player: curve.points for (player, scope), curve in curves.items() if scope == "all"}
        svg = report.svg_lines(series, title=f"Cumulative coverage ({rep})")

    if config.output_format == "csv":
        rows = ((player, scope, k, frac) for (player, scope), curve in curves.items()
                for k, frac in curve.points)
        return report.to_csv(["player_id", "scope", "k", "fraction"], rows), svg
    doc = {
        "representation": rep,
        "skipped": len(errors),
        "curves": [{"player_id": player, "scope": scope, "types": len(curve.points),
                    "fractions": curve.fractions}
                   for (player, scope), curve in curves.items()],
    }
    return report.dumps(doc) + "\n", svg


def cmd_similarity(config: RunConfig) -> str:
    records, errors = _load_corpus(config)
    by_score: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for record in sorted(records, key=lambda r: (r.score_id, r.player_id, r.take)):
        by_score[record.score_id][record.player_id].append(record)

    matrices = []
    for score_id, players in sorted(by_score.items()):
        for rep in config.representations:
            profiles = {player: [r.profile(rep, config.window_s, config.filter) for r in recs]
                        for player, recs in players.items()}
            matrix = similarity_matrix(profiles, config.smoothing_alpha, score_id, rep)
            for err in matrix.errors:
                log.warning("score %s, %s: %s", score_id, rep, err)
            matrices.append(matrix)

    if config.output_format == "csv":
        # one block per matrix, separated by a blank line
        blocks = [report.to_csv(["score_id", "representation", "player_id", *m.labels],
                                ((m.score_id, m.representation, label, *row)
                                 for label, row in zip(m.labels, m.values)))
                  for m in matrices]
        return "\n".join(blocks)
    return report.dumps({
        "alpha": float(config.smoothing_alpha),
        "skipped": len(errors),
        "matrices": [{"score_id": m.score_id, "representation": m.representation,
                      "labels": list(m.labels), "values": [list(r) for r in m.values],
                      "errors": list(m.errors)} for m in matrices],
    }) + "\n"


def cmd_align(config: RunConfig, score_path: str, perf_path: str, pitch_match: bool = True,
              skew_ms: float = 50.0) -> str:
    score = read_score(_existing(score_path, "score"))
    performance = load_performance(_existing(perf_path, "performance"))
    try:
        alignment = greedy_align(score, performance, AlignParams(pitch_match, skew_ms / 1000))
    except UnalignableError as exc:
        raise CliError(str(exc), EXIT_UNALIGNABLE) from exc
    return alignment.dumps() + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--window-ms", type=float, default=35.0, help="onset grouping window (ms)")
    common.add_argument("--representation", action="append", choices=REPRESENTATIONS,
                        help="griff representation; repeat for several")
    common.add_argument("--alpha", type=float, default=1.0, help="add-alpha smoothing constant")
    common.add_argument("--no-filter", action="store_true", help="keep empty and bass-only griffs")
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--manifest", help="JSON manifest of score/performance/alignment triples")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--svg", action="store_true", help="also write an SVG chart next to --out")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="griffs", description="Griff extraction and analysis "
                                     "for aligned basso continuo MIDI performances.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", parents=[common], help="griff string per score note")
    p.add_argument("score")
    p.add_argument("performance")
    p.add_argument("alignment")
    sub.add_parser("stats", parents=[common], help="griff type statistics over a manifest")
    sub.add_parser("coverage", parents=[common], help="cumulative coverage per player")
    sub.add_parser("similarity", parents=[common], help="cross-entropy matrices per score")
    p = sub.add_parser("align", parents=[common], help="baseline greedy alignment")
    p.add_argument("score")
    p.add_argument("performance")
    p.add_argument("--no-pitch-match", action="store_true", help="anchor on lowest chord note")
    p.add_argument("--max-skew-ms", type=float, default=50.0)
    return parser


def _configure_logging(verbose: bool):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logging.captureWarnings(True)
    for name in ("griffs", "py.warnings"):
        logger = logging.getLogger(name)
        logger.handlers[:] = [handler]
        logger.propagate = False
        logger.setLevel(logging.INFO if verbose else logging.WARNING)


_DEFAULT_REPS = {"stats": ("ordered", "pooled"), "similarity": REPRESENTATIONS}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    reps = tuple(dict.fromkeys(args.representation or _DEFAULT_REPS.get(args.command, ("ordered",))))
    try:
        if args.format == "table" and args.command != "stats":
            raise CliError("--format table is only available for stats", EXIT_INPUT)
        config = RunConfig(args.window_ms, reps, args.alpha, not args.no_filter, args.format,
                           args.manifest, args.out, args.svg)
        if args.svg and not args.out:
            raise CliError("--svg needs --out to place the chart", EXIT_INPUT)
        if args.command == "extract":
            _emit(config, cmd_extract(config, args.score, args.performance, args.alignment))
        elif args.command == "stats":
            _emit(config, cmd_stats(config))
        elif args.command == "coverage":
            text, svg = cmd_coverage(config)
            _emit(config, text)
            if svg is not None:
                Path(config.output_path).with_suffix(".svg").write_text(svg, encoding="utf-8")
        elif args.command == "similarity":
            _emit(config, cmd_similarity(config))
        elif args.command == "align":
            _emit(config, cmd_align(config, args.score, args.performance,
                                    not args.no_pitch_match, args.max_skew_ms))
    except CliError as exc:
        log.error("%s", exc)
        return exc.code
    except AlignmentError as exc:
        log.error("alignment validation failed:")
        for violation in exc.violations:
            log.error("  %s", violation)
        return EXIT_ERROR
    except (ScoreError, MidiFormatError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    finally:
        logging.captureWarnings(False)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
