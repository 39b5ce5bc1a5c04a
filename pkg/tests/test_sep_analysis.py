"""Tests for the margin-collapsing perturbation and the empirical SEP chain."""

import numpy as np
import pytest

from onebit_precoding import (
    RngSeed,
    check_implication,
    empirical_sep,
    perturb,
    sep_union_bound,
)
from onebit_precoding.sep_analysis import run_verification


class TestPerturb:
    def test_real_point_is_unchanged(self):
        p = perturb(2.0 + 0j, 8)
        assert p.delta_z == 0
        assert p.z_hat == 2.0

    def test_qpsk_diagonal_collapses_to_zero(self):
        p = perturb(1 + 1j, 4)
        assert p.delta_z == pytest.approx(-1 - 1j, abs=1e-12)
        assert p.z_hat == pytest.approx(0.0, abs=1e-12)

    def test_negative_margin_point(self):
        p = perturb(0.2 + 0.9j, 8)
        assert p.z_hat == pytest.approx(0.2 - 0.9 * (1 + np.sqrt(2.0)), abs=1e-12)

    def test_shift_lands_exactly_on_margin(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            z = complex(rng.standard_normal(), rng.standard_normal())
            order = int(rng.choice([2, 4, 8, 16]))
            p = perturb(z, order)
            shifted = z + p.delta_z
            assert shifted.imag == pytest.approx(0.0, abs=1e-12)
            assert shifted.real == pytest.approx(p.z_hat, abs=1e-12)


class TestCheckImplication:
    def test_clean_reception(self):
        assert check_implication(1.0 + 0j, 0j, 8) == (True, True, True)

    def test_sector_edge_knife_case(self):
        # 1+j sits exactly on a QPSK sector edge. The shifted point collapses
        # to (numerically almost) zero and does not decode to index 0, so the
        # implication holds vacuously at this measure-zero input.
        shifted_ok, plain_ok, holds = check_implication(1 + 1j, 0j, 4)
        assert shifted_ok is False
        assert plain_ok is False  # the edge phase goes to the upper sector
        assert holds is True

    def test_noise_pushing_both_wrong(self):
        shifted_ok, plain_ok, holds = check_implication(1.0 + 0j, -10.0 + 0j, 8)
        assert not shifted_ok and not plain_ok and holds

    @pytest.mark.parametrize("order", [4, 8, 16])
    def test_no_violations_on_random_draws(self, order):
        rng = np.random.default_rng(order)
        for _ in range(2000):
            z = complex(*rng.standard_normal(2))
            eta = complex(*rng.standard_normal(2))
            assert check_implication(z, eta, order)[2]


class TestEmpiricalSep:
    def test_deep_snr_limit(self):
        est = empirical_sep(10.0 + 0j, 1.0, 8, 20_000, seed=0)
        assert est.err_rate == 0.0
        assert est.err_rate_shifted == 0.0

    def test_pure_noise_is_uniform_over_sectors(self):
        for order in (4, 8):
            est = empirical_sep(0j, 1.0, order, 100_000, seed=1)
            expected = (order - 1) / order
            assert est.err_rate == pytest.approx(expected, abs=4 * est.std_err + 1e-9)

    def test_chain_against_closed_form(self):
        z, sigma, order, trials = 1.0 + 0j, 0.5, 8, 200_000
        est = empirical_sep(z, sigma, order, trials, seed=RngSeed(2, (5,)))
        alpha = perturb(z, order).z_hat
        bound = sep_union_bound(alpha, sigma, order)
        assert est.err_rate <= est.err_rate_shifted  # exact under paired noise
        assert est.err_rate_shifted <= bound + 3 * est.std_err_shifted

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            empirical_sep(1.0, 1.0, 8, 0, seed=0)
        with pytest.raises(ValueError):
            empirical_sep(1.0, 0.0, 8, 10, seed=0)

    def test_deterministic_given_seed(self):
        a = empirical_sep(0.4 + 0.2j, 0.7, 4, 5000, seed=RngSeed(3))
        b = empirical_sep(0.4 + 0.2j, 0.7, 4, 5000, seed=RngSeed(3))
        assert a == b


class TestVerificationSuite:
    def test_all_checks_pass_at_reduced_scale(self):
        results = run_verification(seed=0, implication_draws=20_000, bound_trials=50_000)
        assert len(results) > 0
        failed = [r.name for r in results if not r.passed]
        assert failed == []
