"""Difficulty calibration from performance records.

Turns raw performance data (examinee-by-item outcomes, aggregated success
rates, rated game records, per-sample evaluation logs) into continuous
difficulty scores with uncertainties, verifies them against pairwise
judgments, and profiles generalization gain over the (train, eval)
difficulty plane.
"""

from . import data, errors, glicko2, irt, profiling, standardize, verify

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "data",
    "errors",
    "glicko2",
    "irt",
    "profiling",
    "standardize",
    "verify",
]
