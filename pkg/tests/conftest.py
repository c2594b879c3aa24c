"""Shared fixtures and synthetic-data builders for the test suite."""

import numpy as np
import pytest

from e2h.data import ResponseMatrix, ResponseRecord
from e2h.irt import IrtVariant


def synth_matrix(n_examinees, n_items, variant=IrtVariant.ONE_PL_GUESS,
                 seed=0, c=0.2, d=1.0, a_spread=0.0):
    """Random response matrix drawn from the stated response function.

    Returns (matrix, theta, a, b) with parameters on the natural scale.
    """
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(n_examinees)
    b = rng.standard_normal(n_items)
    a = np.exp(rng.normal(0.0, a_spread, n_items)) if a_spread else np.ones(n_items)
    c_eff = c if variant.uses_c else 0.0
    d_eff = d if variant.uses_d else 1.0
    z = a[None, :] * (theta[:, None] - b[None, :])
    p = c_eff + (d_eff - c_eff) / (1.0 + np.exp(-z))
    x = (rng.uniform(size=p.shape) < p).astype(int)
    records = [
        ResponseRecord(f"e{e:04d}", f"i{i:04d}", int(x[e, i]))
        for e in range(n_examinees) for i in range(n_items)
    ]
    return ResponseMatrix.from_records(records), theta, a, b


@pytest.fixture(scope="session")
def recovery_dataset():
    """200 x 100 single-guess-parameter dataset used by the recovery checks."""
    matrix, theta, _, b = synth_matrix(200, 100, IrtVariant.ONE_PL_GUESS,
                                       seed=7, c=0.2)
    return matrix, theta, b


@pytest.fixture()
def run_cli(capsys):
    """Invoke the console entry point in-process; returns (code, out, err)."""
    from e2h.cli import main

    def _run(*argv):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run
