"""Cascaded metric trees: range, counting and k-nearest-neighbor search under
Euclidean and edit distance, with per-query distance-call statistics."""

from ._core import (
    BuildError,
    DataError,
    FormatError,
    MetricError,
    PointTree,
    QueryStats,
    SequenceTree,
    euclidean_distance,
    gen_uniform_points,
    levenshtein_distance,
    parse_fasta,
)

__all__ = [
    "BuildError",
    "DataError",
    "FormatError",
    "MetricError",
    "PointTree",
    "QueryStats",
    "SequenceTree",
    "euclidean_distance",
    "gen_uniform_points",
    "levenshtein_distance",
    "parse_fasta",
]
