"""Batch pipeline for multi-turn reasoning data: synthesis, curation,
difficulty-aware rejection sampling, dataset assembly, and evaluation.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    MULTI_TURN_MARKER,
    REJECTION_MARKER,
    CandidateChain,
    append_marker,
    balance,
    build_mock_script,
    canonical,
    classify,
    equivalent,
    extract_boxed,
    filter_chain,
    regenerate_report,
    response_correct,
    run_pipeline,
)

__all__ = [
    "MULTI_TURN_MARKER",
    "REJECTION_MARKER",
    "CandidateChain",
    "append_marker",
    "balance",
    "build_mock_script",
    "canonical",
    "classify",
    "equivalent",
    "extract_boxed",
    "filter_chain",
    "regenerate_report",
    "response_correct",
    "run_pipeline",
]
