"""MAP and MCMC estimation behavior on small constructed instances."""

import numpy as np
import pytest

from conftest import synth_matrix
from e2h.data import ResponseMatrix, ResponseRecord
from e2h.errors import ChainDiverged, DidNotConverge, InvalidParameter, TooFewItems
from e2h.irt import (
    IrtVariant,
    MapConfig,
    McmcConfig,
    fit_map,
    fit_mcmc,
    initial_params,
    log_posterior_and_gradient,
    IrtPriors,
)


def _matrix_from_columns(columns):
    """Build a matrix from dense per-item outcome columns."""
    records = []
    n_e = len(columns[0])
    for i, col in enumerate(columns):
        for e in range(n_e):
            records.append(ResponseRecord(f"e{e}", f"i{i}", int(col[e])))
    return ResponseMatrix.from_records(records)


class TestFitMap:
    def test_all_correct_item_is_easier(self):
        rng = np.random.default_rng(0)
        mixed = [rng.integers(0, 2) for _ in range(12)]
        matrix = _matrix_from_columns([[1] * 12, [0] * 12, mixed])
        fit = fit_map(matrix, IrtVariant.ONE_PL)
        b = {iid: fit.params.b[k] for k, iid in enumerate(fit.item_ids)}
        assert b["i0"] < b["i2"] < b["i1"]

    def test_duplicate_items_get_equal_difficulty(self):
        rng = np.random.default_rng(1)
        col = [int(rng.integers(0, 2)) for _ in range(20)]
        matrix = _matrix_from_columns([col, col, [1] * 20])
        fit = fit_map(matrix, IrtVariant.ONE_PL)
        b = {iid: fit.params.b[k] for k, iid in enumerate(fit.item_ids)}
        assert abs(b["i0"] - b["i1"]) <= 1e-6

    def test_converges_on_clean_instance(self):
        matrix, _, _, _ = synth_matrix(40, 10, IrtVariant.TWO_PL, seed=3,
                                       a_spread=0.3)
        fit = fit_map(matrix, IrtVariant.TWO_PL)
        assert fit.converged
        assert fit.iterations >= 1
        assert np.isfinite(fit.log_posterior)

    def test_map_improves_on_initialization(self):
        matrix, _, _, _ = synth_matrix(30, 8, IrtVariant.ONE_PL_GUESS, seed=4)
        priors = IrtPriors()
        init = initial_params(matrix, IrtVariant.ONE_PL_GUESS, priors)
        v0, _ = log_posterior_and_gradient(
            matrix, IrtVariant.ONE_PL_GUESS, priors, init)
        fit = fit_map(matrix, IrtVariant.ONE_PL_GUESS, priors)
        assert fit.log_posterior >= v0

    def test_laplace_sds_positive(self):
        matrix, _, _, _ = synth_matrix(60, 10, IrtVariant.ONE_PL_GUESS, seed=5)
        fit = fit_map(matrix, IrtVariant.ONE_PL_GUESS)
        assert fit.converged
        assert np.all(np.asarray(fit.param_sd.theta) > 0)
        assert np.all(np.asarray(fit.param_sd.b) > 0)
        assert np.all(np.asarray(fit.param_sd.c) > 0)

    def test_strict_mode_raises_with_partial_fit(self):
        matrix, _, _, _ = synth_matrix(30, 8, IrtVariant.ONE_PL, seed=6)
        with pytest.raises(DidNotConverge) as exc:
            fit_map(matrix, IrtVariant.ONE_PL,
                    config=MapConfig(max_iter=1), strict=True)
        assert exc.value.fit is not None
        assert not exc.value.fit.converged

    def test_nonstrict_flags_convergence(self):
        matrix, _, _, _ = synth_matrix(30, 8, IrtVariant.ONE_PL, seed=6)
        fit = fit_map(matrix, IrtVariant.ONE_PL, config=MapConfig(max_iter=1))
        assert not fit.converged

    def test_too_few_items_rejected(self):
        matrix = ResponseMatrix.from_records(
            [ResponseRecord("e1", "i1", 1), ResponseRecord("e2", "i1", 0)])
        with pytest.raises(TooFewItems):
            fit_map(matrix)

    def test_ids_align_with_matrix(self):
        matrix, _, _, _ = synth_matrix(5, 3, IrtVariant.ONE_PL, seed=7)
        fit = fit_map(matrix, IrtVariant.ONE_PL)
        assert set(fit.examinee_ids) == set(matrix.examinee_index)
        assert set(fit.item_ids) == set(matrix.item_index)
        for iid, k in matrix.item_index.items():
            assert fit.item_ids[k] == iid


class TestFitMcmc:
    def test_zero_samples_rejected(self):
        with pytest.raises(InvalidParameter):
            McmcConfig(n_samples=0)

    def test_symmetric_items_agree(self):
        rng = np.random.default_rng(8)
        col = [int(rng.integers(0, 2)) for _ in range(25)]
        matrix = _matrix_from_columns([col, col])
        fit = fit_mcmc(matrix, IrtVariant.ONE_PL,
                       config=McmcConfig(n_samples=800, n_warmup=300, seed=1))
        b = np.asarray(fit.params.b)
        sd = np.asarray(fit.param_sd.b)
        n = 800
        sd_mean = np.sqrt(sd[0] ** 2 + sd[1] ** 2) / np.sqrt(n)
        # identical response columns: posterior means differ only by MC noise;
        # the factor over the iid std of the mean covers chain autocorrelation
        assert abs(b[0] - b[1]) <= 10 * sd_mean

    def test_matches_map_on_small_instance(self):
        matrix, _, _, _ = synth_matrix(40, 6, IrtVariant.ONE_PL, seed=9)
        m = fit_map(matrix, IrtVariant.ONE_PL)
        mc = fit_mcmc(matrix, IrtVariant.ONE_PL,
                      config=McmcConfig(n_samples=800, n_warmup=400, seed=2))
        db = np.abs(np.asarray(mc.params.b) - np.asarray(m.params.b))
        assert np.all(db <= 3 * np.asarray(mc.param_sd.b) + 1e-9)

    def test_deterministic_under_seed(self):
        matrix, _, _, _ = synth_matrix(15, 4, IrtVariant.ONE_PL, seed=10)
        cfg = McmcConfig(n_samples=200, n_warmup=100, seed=5)
        f1 = fit_mcmc(matrix, IrtVariant.ONE_PL, config=cfg)
        f2 = fit_mcmc(matrix, IrtVariant.ONE_PL, config=cfg)
        assert np.array_equal(f1.params.b, f2.params.b)
        assert np.array_equal(f1.params.theta, f2.params.theta)

    def test_frozen_stepsize_chain_diverges(self):
        matrix, _, _, _ = synth_matrix(15, 4, IrtVariant.ONE_PL, seed=11)
        cfg = McmcConfig(n_samples=300, n_warmup=100, seed=3,
                         step_sizes={"theta": 4000.0, "log_a": 4000.0,
                                     "b": 4000.0, "logit_c": 4000.0,
                                     "logit_d": 4000.0})
        with pytest.raises(ChainDiverged):
            fit_mcmc(matrix, IrtVariant.ONE_PL, config=cfg)

    def test_posterior_sds_positive(self):
        matrix, _, _, _ = synth_matrix(20, 5, IrtVariant.ONE_PL_GUESS, seed=12)
        fit = fit_mcmc(matrix, IrtVariant.ONE_PL_GUESS,
                       config=McmcConfig(n_samples=300, n_warmup=200, seed=4))
        assert np.all(np.asarray(fit.param_sd.b) > 0)
        assert np.all(np.asarray(fit.param_sd.theta) > 0)
        assert np.all(np.asarray(fit.param_sd.c) > 0)
