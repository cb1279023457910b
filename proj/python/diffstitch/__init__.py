"""Step-level stitching of diffusion reasoning traces."""

from ._diffstitch import (
    extract_boxed,
    extract_rationale,
    geometric_mean,
    normalize_answer,
    run_eval,
    segment_lines,
    segment_sentences,
    select_anchor_trace,
    stitch,
    verify_exact,
    verify_strict,
)

__all__ = [
    "extract_boxed",
    "extract_rationale",
    "geometric_mean",
    "normalize_answer",
    "run_eval",
    "segment_lines",
    "segment_sentences",
    "select_anchor_trace",
    "stitch",
    "verify_exact",
    "verify_strict",
]
