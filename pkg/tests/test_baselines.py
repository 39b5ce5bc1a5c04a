"""Tests for the ZF, ZF-OB, and MSM precoders, the LP solver, and the
precoder registry."""

import itertools

import numpy as np
import pytest

from onebit_precoding import (
    LpProblem,
    MpskConstellation,
    available_precoders,
    build_instance,
    get_precoder,
    lp_solve,
    min_margin,
    msm_precode,
    one_bit_amplitude,
    register_precoder,
    to_real,
    zf_onebit,
    zf_precode,
)
from onebit_precoding.baselines import msm_lp_problem


def gaussian_channel(rng, n_users, n_antennas):
    return (
        rng.standard_normal((n_users, n_antennas))
        + 1j * rng.standard_normal((n_users, n_antennas))
    ) / np.sqrt(2.0)


def solve_hermitian_by_elimination(A, b):
    """Plain Gaussian elimination with partial pivoting, independent of
    numpy.linalg, for the small normal-equation oracle."""
    A = A.astype(complex).copy()
    b = b.astype(complex).copy()
    n = A.shape[0]
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(A[col:, col])))
        if pivot != col:
            A[[col, pivot]] = A[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            factor = A[row, col] / A[col, col]
            A[row, col:] -= factor * A[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1 :] @ x[row + 1 :]) / A[row, row]
    return x


class TestZfPrecode:
    def test_identity_channel_scales_symbols(self):
        c = MpskConstellation(8)
        H = np.eye(3, dtype=complex)
        symbols = np.array([0, 2, 5])
        x = zf_precode(H, symbols, c, 1.0)
        s = c.points[symbols]
        scale = x[0] / s[0]
        assert scale.real > 0 and abs(scale.imag) < 1e-12
        np.testing.assert_allclose(x, scale * s, atol=1e-12)

    def test_zero_forcing_property(self):
        rng = np.random.default_rng(0)
        c = MpskConstellation(8)
        H = gaussian_channel(rng, 4, 16)
        symbols = rng.integers(0, 8, size=4)
        x = zf_precode(H, symbols, c, 1.0)
        ratios = (H @ x) / c.points[symbols]
        gain = ratios.mean()
        assert gain.real > 0
        assert np.max(np.abs(ratios - gain)) <= 1e-9 * abs(gain)

    def test_power_normalization(self):
        rng = np.random.default_rng(1)
        c = MpskConstellation(4)
        H = gaussian_channel(rng, 4, 16)
        symbols = rng.integers(0, 4, size=4)
        for power in (1.0, 2.5):
            x = zf_precode(H, symbols, c, power)
            assert np.sum(np.abs(x) ** 2) == pytest.approx(power, rel=1e-12)

    def test_against_elimination_oracle(self):
        rng = np.random.default_rng(2)
        c = MpskConstellation(8)
        H = gaussian_channel(rng, 4, 16)
        symbols = rng.integers(0, 8, size=4)
        x = zf_precode(H, symbols, c, 1.0)
        gram = H @ H.conj().T
        y = solve_hermitian_by_elimination(gram, c.points[symbols])
        expected = H.conj().T @ y
        expected *= 1.0 / np.linalg.norm(expected)
        np.testing.assert_allclose(x, expected, atol=1e-9)

    def test_rank_deficient_channel_surfaces_error(self):
        c = MpskConstellation(4)
        H = np.ones((2, 4), dtype=complex)  # identical rows
        with pytest.raises(np.linalg.LinAlgError):
            zf_precode(H, np.array([0, 1]), c, 1.0)


class TestZfOnebit:
    def test_output_on_alphabet_with_total_power(self):
        rng = np.random.default_rng(3)
        c = MpskConstellation(8)
        H = gaussian_channel(rng, 4, 16)
        symbols = rng.integers(0, 8, size=4)
        x = zf_onebit(H, symbols, c, 1.0)
        a = one_bit_amplitude(1.0, 16)
        np.testing.assert_allclose(np.abs(x.real), a, atol=0)
        np.testing.assert_allclose(np.abs(x.imag), a, atol=0)
        assert np.sum(np.abs(x) ** 2) == pytest.approx(1.0, rel=1e-12)

    def test_matches_sign_pattern_of_zf(self):
        rng = np.random.default_rng(4)
        c = MpskConstellation(8)
        H = gaussian_channel(rng, 3, 8)
        symbols = rng.integers(0, 8, size=3)
        x_zf = zf_precode(H, symbols, c, 1.0)
        x_ob = zf_onebit(H, symbols, c, 1.0)
        a = one_bit_amplitude(1.0, 8)
        np.testing.assert_allclose(x_ob.real, a * np.where(x_zf.real >= 0, 1, -1))
        np.testing.assert_allclose(x_ob.imag, a * np.where(x_zf.imag >= 0, 1, -1))

    def test_aligned_input_is_fixed_point_of_quantization(self):
        # a channel whose ZF solution already sits on the alphabet diagonal
        c = MpskConstellation(4)
        H = np.array([[1.0 - 1j]]) / np.sqrt(2.0)
        x = zf_onebit(H, np.array([0]), c, 1.0)
        a = one_bit_amplitude(1.0, 1)
        np.testing.assert_allclose(x, np.array([a + 1j * a]), atol=1e-12)


class TestLpSolve:
    def test_two_ceilings(self):
        problem = LpProblem(
            objective=np.array([1.0]),
            a_ub=np.array([[1.0], [1.0]]),
            b_ub=np.array([1.0, 2.0]),
            lower=(None,),
            upper=(None,),
        )
        solution = lp_solve(problem)
        assert solution.value == pytest.approx(1.0, abs=1e-9)

    def test_known_vertex(self):
        # maximize x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0
        # vertex at intersection: x = 8/5, y = 6/5
        problem = LpProblem(
            objective=np.array([1.0, 1.0]),
            a_ub=np.array([[1.0, 2.0], [3.0, 1.0]]),
            b_ub=np.array([4.0, 6.0]),
            lower=(0.0, 0.0),
            upper=(None, None),
        )
        solution = lp_solve(problem)
        np.testing.assert_allclose(solution.x, [8.0 / 5.0, 6.0 / 5.0], atol=1e-8)
        assert solution.value == pytest.approx(14.0 / 5.0, abs=1e-8)

    def test_unbounded_raises(self):
        problem = LpProblem(
            objective=np.array([1.0]),
            a_ub=np.zeros((1, 1)),
            b_ub=np.array([1.0]),
            lower=(None,),
            upper=(None,),
        )
        with pytest.raises(RuntimeError):
            lp_solve(problem)

    def test_msm_lp_against_vertex_enumeration(self):
        """Enumerate basic solutions of the MSM polytope and compare."""
        rng = np.random.default_rng(5)
        H = gaussian_channel(rng, 2, 2)
        symbols = rng.integers(0, 4, size=2)
        instance = build_instance(H, symbols, 4, 1.0)
        problem = msm_lp_problem(instance)
        solution = lp_solve(problem)

        n = 5  # 4 box coordinates + margin variable
        a = instance.amplitude
        rows = [np.asarray(problem.a_ub)[k] for k in range(4)]
        rhs = [0.0] * 4
        for j in range(4):  # box faces as equality candidates
            e = np.zeros(n)
            e[j] = 1.0
            rows += [e, -e]
            rhs += [a, a]
        best = -np.inf
        for combo in itertools.combinations(range(len(rows)), n):
            A = np.array([rows[k] for k in combo])
            b = np.array([rhs[k] for k in combo])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            vertex = np.linalg.solve(A, b)
            x, t = vertex[:4], vertex[4]
            feasible = np.all(np.asarray(problem.a_ub) @ vertex <= 1e-9) and np.all(
                np.abs(x) <= a + 1e-9
            )
            if feasible and t > best:
                best = t
        assert solution.value == pytest.approx(best, abs=1e-6)


class TestMsmPrecode:
    def test_single_user_bpsk_matches_enumeration(self):
        rng = np.random.default_rng(6)
        H = gaussian_channel(rng, 1, 1)
        instance = build_instance(H, np.array([0]), 2, 1.0)
        report = msm_precode(instance)
        a = instance.amplitude
        best = max(
            min_margin(instance, a * np.array(signs))
            for signs in itertools.product((-1.0, 1.0), repeat=2)
        )
        assert report.margin == pytest.approx(best, abs=1e-9)

    def test_relaxed_optimum_dominates_every_one_bit_point(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            H = gaussian_channel(rng, 2, 2)
            symbols = rng.integers(0, 4, size=2)
            instance = build_instance(H, symbols, 4, 1.0)
            report = msm_precode(instance)
            a = instance.amplitude
            for signs in itertools.product((-1.0, 1.0), repeat=4):
                assert report.relaxed_optimum >= min_margin(
                    instance, a * np.array(signs)
                ) - 1e-9

    def test_relaxed_optimum_nonnegative(self):
        # x = 0 is always feasible with margin 0
        rng = np.random.default_rng(8)
        for _ in range(10):
            H = gaussian_channel(rng, 3, 4)
            symbols = rng.integers(0, 8, size=3)
            report = msm_precode(build_instance(H, symbols, 8, 1.0))
            assert report.relaxed_optimum >= -1e-9

    def test_reported_margin_matches_vector(self):
        rng = np.random.default_rng(9)
        H = gaussian_channel(rng, 3, 6)
        symbols = rng.integers(0, 8, size=3)
        instance = build_instance(H, symbols, 8, 1.0)
        report = msm_precode(instance)
        assert report.margin == pytest.approx(
            min_margin(instance, report.x_onebit.x_real), abs=0
        )


class TestRegistry:
    def test_builtin_ids_resolve(self):
        for pid in ("zf", "zf-ob", "msm", "falm"):
            assert callable(get_precoder(pid))

    def test_reserved_id_is_listed_but_not_implemented(self):
        assert "squid" in available_precoders()
        with pytest.raises(NotImplementedError):
            get_precoder("squid")

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            get_precoder("mrt")

    def test_outputs_lie_on_alphabet(self):
        rng = np.random.default_rng(10)
        c = MpskConstellation(8)
        H = gaussian_channel(rng, 3, 8)
        symbols = rng.integers(0, 8, size=3)
        a = one_bit_amplitude(1.0, 8)
        for pid in ("zf-ob", "msm", "falm"):
            x = get_precoder(pid)(H, symbols, c, 1.0)
            np.testing.assert_allclose(np.abs(to_real(x)), a, atol=0)

    def test_register_custom_precoder(self):
        def factory(config):
            def precode(H, symbols, constellation, power):
                n = H.shape[1]
                a = one_bit_amplitude(power, n)
                return np.full(n, a + 1j * a)

            return precode

        register_precoder("all-plus", factory)
        try:
            x = get_precoder("all-plus")(np.eye(2, dtype=complex), np.array([0, 0]), MpskConstellation(4), 1.0)
            assert np.all(x == x[0])
            with pytest.raises(ValueError):
                register_precoder("all-plus", factory)
            with pytest.raises(ValueError):
                register_precoder("squid", factory)
        finally:
            from onebit_precoding.baselines import _REGISTRY

            _REGISTRY.pop("all-plus", None)
