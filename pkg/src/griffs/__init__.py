"""Griff features for aligned basso continuo performances."""

from .aligner import AlignParams, UnalignableError, greedy_align, synthesize
from .alignment import (Alignment, AlignmentError, Score, ScoreError, ScoreNote, load_alignment,
                        load_score, validate)
from .griff import (DEFAULT_WINDOW_S, classify, decode, encode, extract_all, extract_ordered,
                    extract_pooled, group_onsets, pool)
from .midi import (MidiFormatError, Performance, PerformanceMeta, PerformanceNote, TempoMap,
                   parse_smf, ticks_to_seconds, write_smf)
from .stats import (CoverageCurve, DatasetStats, GriffProfile, IntervalProfile, Profile,
                    SimilarityMatrix, build_profile, cross_entropy, cumulative_coverage,
                    dataset_stats, interval_profile, mean_pairwise_ce, similarity_matrix)

__version__ = "0.1.0"
