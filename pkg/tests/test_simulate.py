import math

import numpy as np
import pytest

from mixedvar import (
    ErrorSpec,
    InvalidDof,
    NotCausal,
    SimConfig,
    VarParams,
    draw_errors,
    simulate_causal,
    simulate_mixed,
)
from mixedvar.simulate import _raw_length


class TestDrawErrors:
    def test_deterministic_given_seed(self):
        spec = ErrorSpec(n=2, df=4.0, seed=99)
        np.testing.assert_array_equal(draw_errors(spec, 500), draw_errors(spec, 500))

    def test_student_t_variance_band(self):
        # df=4 components have variance df/(df-2) = 2
        u = draw_errors(ErrorSpec(n=2, df=4.0, seed=0), 100000)
        assert np.all(u.var(axis=0) > 1.85) and np.all(u.var(axis=0) < 2.15)

    def test_normal_variance_band(self):
        u = draw_errors(ErrorSpec(n=2, distribution="standard_normal", seed=0), 100000)
        assert np.all(u.var(axis=0) > 0.97) and np.all(u.var(axis=0) < 1.03)

    def test_low_dof_rejected(self):
        with pytest.raises(InvalidDof):
            ErrorSpec(n=1, df=2.0)

    def test_bad_count(self):
        with pytest.raises(ValueError):
            draw_errors(ErrorSpec(n=1, seed=0), 0)


class TestRawLength:
    @pytest.mark.parametrize("T", [10, 250, 999, 1000, 4000])
    def test_retained_at_least_T(self, T):
        T_raw, cut = _raw_length(T, 0.10)
        assert T_raw == math.ceil(T / 0.8)
        assert cut == math.floor(0.1 * T_raw)
        assert T_raw - 2 * cut >= T

    def test_no_trim(self):
        assert _raw_length(100, 0.0) == (100, 0)


class TestSimulateMixed:
    def test_zero_matrix_returns_error_rows(self):
        # with Theta = 0 the path equals the error stream, so the retained
        # block must match the corresponding raw error rows exactly
        params = VarParams.from_matrix(np.zeros((2, 2)))
        spec = ErrorSpec(n=2, df=4.0, seed=5)
        cfg = SimConfig(T=200, params=params, trim_frac=0.10)
        Y = simulate_mixed(cfg, spec)
        T_raw, cut = _raw_length(200, 0.10)
        u = draw_errors(spec, T_raw)
        np.testing.assert_array_equal(Y, u[cut:cut + 200])

    def test_diagonal_mixed_first_component_is_scalar_ar(self, theta_diag_strong):
        # with a diagonal matrix the eigenbasis is the identity, so the first
        # component follows the scalar forward recursion on the same draws
        spec = ErrorSpec(n=2, df=4.0, seed=8)
        cfg = SimConfig(T=300, params=theta_diag_strong, trim_frac=0.10)
        Y = simulate_mixed(cfg, spec)
        T_raw, cut = _raw_length(300, 0.10)
        u = draw_errors(spec, T_raw)
        y1 = np.zeros(T_raw)
        prev = 0.0
        for t in range(T_raw):
            prev = 0.5 * prev + u[t, 0]
            y1[t] = prev
        np.testing.assert_allclose(Y[:, 0], y1[cut:cut + 300], atol=1e-12)

    def test_purely_causal_matches_forward_recursion(self):
        params = VarParams.from_matrix([[0.5, 0.0], [0.0, 0.3]])
        spec = ErrorSpec(n=2, df=4.0, seed=9)
        cfg = SimConfig(T=400, params=params, trim_frac=0.10)
        Y = simulate_mixed(cfg, spec)
        T_raw, cut = _raw_length(400, 0.10)
        u = draw_errors(spec, T_raw)
        Z = np.zeros((T_raw, 2))
        state = np.zeros(2)
        for t in range(T_raw):
            state = params.matrix @ state + u[t]
            Z[t] = state
        assert np.max(np.abs(Y[50:] - Z[cut + 50:cut + 400])) < 1e-8

    def test_interior_rows_satisfy_the_var_equation(self, theta_diag_strong):
        # the retained block is an exact window of the stationary solution:
        # residuals against the true matrix recover the drawn errors
        spec = ErrorSpec(n=2, df=4.0, seed=21)
        cfg = SimConfig(T=500, params=theta_diag_strong, trim_frac=0.10)
        Y = simulate_mixed(cfg, spec)
        T_raw, cut = _raw_length(500, 0.10)
        u = draw_errors(spec, T_raw)
        resid = Y[1:] - Y[:-1] @ theta_diag_strong.matrix.T
        np.testing.assert_allclose(resid, u[cut + 1:cut + 500], atol=1e-9)

    def test_requested_length_honored(self, theta_diag_strong):
        for T in (123, 999, 1000):
            cfg = SimConfig(T=T, params=theta_diag_strong, trim_frac=0.10)
            assert simulate_mixed(cfg, ErrorSpec(n=2, df=4.0, seed=1)).shape == (T, 2)

    def test_determinism(self, theta_coupled_strong):
        cfg = SimConfig(T=250, params=theta_coupled_strong)
        spec = ErrorSpec(n=2, df=4.0, seed=77)
        np.testing.assert_array_equal(simulate_mixed(cfg, spec), simulate_mixed(cfg, spec))

    def test_stationarity_proxy_half_variances(self, theta_diag_strong):
        Y = simulate_mixed(SimConfig(T=10000, params=theta_diag_strong),
                           ErrorSpec(n=2, df=4.0, seed=13))
        va = Y[:5000].var(axis=0)
        vb = Y[5000:].var(axis=0)
        assert np.all(np.abs(va - vb) / np.maximum(va, vb) < 0.20)

    def test_noncausal_component_does_not_explode(self, theta_diag_strong):
        Y1 = simulate_mixed(SimConfig(T=5000, params=theta_diag_strong),
                            ErrorSpec(n=2, df=4.0, seed=31))
        Y2 = simulate_mixed(SimConfig(T=5000, params=theta_diag_strong),
                            ErrorSpec(n=2, df=4.0, seed=32))
        assert np.all(np.isfinite(Y1))
        v1, v2 = Y1.var(axis=0), Y2.var(axis=0)
        assert np.all(v1 / v2 < 3.0) and np.all(v2 / v1 < 3.0)

    def test_causal_component_uncorrelated_with_future_noncausal(self, theta_coupled_strong):
        # Cov(Y1*_t, Y2*_{t-h}) = 0 for h <= 0: the causal coordinate loads
        # on past errors only, the noncausal one on strictly future errors
        Y, y1, y2 = simulate_mixed(SimConfig(T=5000, params=theta_coupled_strong),
                                   ErrorSpec(n=2, df=4.0, seed=2),
                                   return_components=True)
        for lead in (0, 1, 2, 5):
            a = y1[:len(y1) - lead, 0]
            b = y2[lead:, 0]
            cov = np.mean((a - a.mean()) * (b - b.mean()))
            se = np.sqrt(a.var() * b.var() / a.size)
            assert abs(cov) < 5.0 * se, (lead, cov, se)

    def test_dimension_mismatch(self, theta_diag_strong):
        with pytest.raises(ValueError):
            simulate_mixed(SimConfig(T=100, params=theta_diag_strong),
                           ErrorSpec(n=3, df=4.0, seed=0))


class TestSimulateCausal:
    def test_zero_matrix_returns_errors(self):
        spec = ErrorSpec(n=2, df=4.0, seed=4)
        params = VarParams.from_matrix(np.zeros((2, 2)))
        Y = simulate_causal(params, spec, T=100, burn_in=0)
        np.testing.assert_array_equal(Y, draw_errors(spec, 100))

    def test_ar1_autocorrelation_band(self):
        y = simulate_causal(VarParams.from_matrix([[0.9]]),
                            ErrorSpec(n=1, df=4.0, seed=0), T=20000, burn_in=200)[:, 0]
        ac = np.corrcoef(y[1:], y[:-1])[0, 1]
        assert 0.85 < ac < 0.95

    def test_matches_mixed_simulator_without_trimming(self):
        params = VarParams.from_matrix([[0.5, 0.1], [0.0, 0.3]])
        spec = ErrorSpec(n=2, df=4.0, seed=6)
        Y_causal = simulate_causal(params, spec, T=300, burn_in=0)
        Y_mixed = simulate_mixed(SimConfig(T=300, params=params, trim_frac=0.0), spec)
        np.testing.assert_allclose(Y_causal, Y_mixed, atol=1e-8)

    def test_noncausal_rejected(self, theta_diag_strong):
        with pytest.raises(NotCausal):
            simulate_causal(theta_diag_strong, ErrorSpec(n=2, df=4.0, seed=0), T=100)

    def test_var2_recursion(self):
        params = VarParams(n=1, p=2, coefficients=(np.array([[0.5]]), np.array([[0.3]])))
        spec = ErrorSpec(n=1, df=4.0, seed=10)
        Y = simulate_causal(params, spec, T=50, burn_in=0)
        u = draw_errors(spec, 50)
        expected = np.zeros(50)
        for t in range(50):
            y1 = expected[t - 1] if t >= 1 else 0.0
            y2 = expected[t - 2] if t >= 2 else 0.0
            expected[t] = 0.5 * y1 + 0.3 * y2 + u[t, 0]
        np.testing.assert_allclose(Y[:, 0], expected, atol=1e-12)
