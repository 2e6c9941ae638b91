import numpy as np
import pytest

from mixedvar import (
    AnnealSchedule,
    ErrorSpec,
    ObjectiveConfig,
    ParseError,
    SimConfig,
    StartStrategy,
    TooShort,
    classify_strict,
    demean,
    estimate_pipeline,
    is_demeaned,
    load_series,
    make_transform_set,
    objective,
    require_length,
    simulate_mixed,
    start_invariant,
)


class TestLoadSeries:
    def test_small_well_formed_csv(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n5.0,6.0\n")
        series = load_series(str(path))
        assert series.T == 3 and series.n == 2
        np.testing.assert_array_equal(series.values, [[1, 2], [3, 4], [5, 6]])
        assert series.columns == ["y1", "y2"]

    def test_header_detected(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("wheat,corn\n1.0,2.0\n3.0,4.0\n")
        series = load_series(str(path))
        assert series.columns == ["wheat", "corn"]
        assert series.T == 2

    def test_non_numeric_cell_strict_names_line(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0,oops\n5.0,6.0\n")
        with pytest.raises(ParseError) as err:
            load_series(str(path))
        assert "line 2" in str(err.value)

    def test_non_numeric_cell_dropped_under_drop_policy(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0,oops\n5.0,6.0\n")
        series = load_series(str(path), policy="drop")
        assert series.T == 2 and series.dropped_rows == 1

    def test_delimiters_equivalent(self, tmp_path):
        comma = tmp_path / "c.csv"
        semi = tmp_path / "s.csv"
        tab = tmp_path / "t.csv"
        comma.write_text("1.5,2.5\n-3.0,4.25\n")
        semi.write_text("1.5;2.5\n-3.0;4.25\n")
        tab.write_text("1.5\t2.5\n-3.0\t4.25\n")
        ref = load_series(str(comma)).values
        np.testing.assert_array_equal(load_series(str(semi)).values, ref)
        np.testing.assert_array_equal(load_series(str(tab)).values, ref)

    def test_leading_date_column_ignored(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("date,y1,y2\n2016-10-18,1.0,2.0\n2016-10-19,3.0,4.0\n")
        series = load_series(str(path))
        assert series.n == 2
        assert series.columns == ["y1", "y2"]
        assert any("non-numeric column" in n for n in series.notes)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ParseError):
            load_series(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_series(str(tmp_path / "nope.csv"))

    def test_require_length(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("\n".join("1.0,2.0" for _ in range(30)))
        series = load_series(str(path))
        with pytest.raises(TooShort):
            require_length(series)  # needs more than 20*n = 40 rows


class TestDemean:
    def test_constant_column_to_zero(self):
        np.testing.assert_array_equal(demean(np.full((5, 1), 3.7)), np.zeros((5, 1)))

    def test_simple_column(self):
        np.testing.assert_array_equal(demean(np.array([[1.0], [2.0], [3.0]])),
                                      [[-1.0], [0.0], [1.0]])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        Y = rng.normal(5.0, 2.0, size=(40, 3))
        once = demean(Y)
        np.testing.assert_allclose(demean(once), once, atol=1e-12)
        assert np.max(np.abs(once.mean(axis=0))) < 1e-12

    def test_is_demeaned(self):
        rng = np.random.default_rng(1)
        Y = rng.normal(3.0, 1.0, size=(50, 2))
        assert not is_demeaned(Y)
        assert is_demeaned(demean(Y))


class TestEstimatePipeline:
    def test_reported_objective_matches_recomputation(self, theta_coupled_strong, t1_config):
        Y = demean(simulate_mixed(SimConfig(T=1000, params=theta_coupled_strong),
                                  ErrorSpec(n=2, df=4.0, seed=20)))
        res = estimate_pipeline(Y, 1, StartStrategy(kind="ols"), t1_config)
        recomputed = objective(Y, res.theta_hat, t1_config)
        assert abs(res.objective_value - recomputed) < 1e-10
        assert res.order.label == classify_strict(res.theta_hat).label
        assert np.isfinite(res.objective_at_start)

    def test_warns_and_demeans_internally(self, theta_coupled_strong, t1_config):
        Y = simulate_mixed(SimConfig(T=500, params=theta_coupled_strong),
                           ErrorSpec(n=2, df=4.0, seed=21)) + [5.0, -3.0]
        with pytest.warns(UserWarning):
            res = estimate_pipeline(Y, 1, StartStrategy(kind="ols"), t1_config)
        assert np.isfinite(res.objective_value)

    def test_sa_route_improves_on_ols_start(self, theta_coupled_strong, t1_config):
        # annealing plus polish should not end above the OLS-started local run
        wins = 0
        for seed in range(10):
            Y = demean(simulate_mixed(SimConfig(T=250, params=theta_coupled_strong),
                                      ErrorSpec(n=2, df=4.0, seed=seed)))
            r_ols = estimate_pipeline(Y, 1, StartStrategy(kind="ols"), t1_config)
            r_sa = estimate_pipeline(
                Y, 1, StartStrategy(kind="ols"), t1_config,
                optimizer="sa_then_polish",
                schedule=AnnealSchedule(q_stages=60, m_per_stage=200, seed=seed))
            wins += r_sa.objective_value <= r_ols.objective_value + 1e-12
        assert wins >= 9

    def test_start_invariance_flag_on_near_unit_data(self, theta_coupled_near_unit, t1_config):
        # when no distant local minimum exists, different starts meet at the
        # same estimate and the comparison flags start invariance
        Y = demean(simulate_mixed(SimConfig(T=2000, params=theta_coupled_near_unit),
                                  ErrorSpec(n=2, df=4.0, seed=8)))
        r1 = estimate_pipeline(Y, 1, StartStrategy(kind="ols"), t1_config)
        r2 = estimate_pipeline(Y, 1, StartStrategy(kind="true_params",
                                                   params=theta_coupled_near_unit), t1_config)
        assert start_invariant([r1, r2], tol=1e-3)

    def test_start_invariance_flag_off_when_estimates_differ(self, theta_diag_strong, t1_config):
        # basin-trapped starts on the strongly separated DGP give different
        # estimates, so the flag must be off
        Y = demean(simulate_mixed(SimConfig(T=1000, params=theta_diag_strong),
                                  ErrorSpec(n=2, df=4.0, seed=104)))
        r1 = estimate_pipeline(Y, 1, StartStrategy(kind="causal_counterpart",
                                                   params=theta_diag_strong), t1_config)
        r2 = estimate_pipeline(Y, 1, StartStrategy(kind="noncausal_counterpart",
                                                   params=theta_diag_strong), t1_config)
        assert (r1.order.n1, r1.order.n2) == (2, 0)
        assert (r2.order.n1, r2.order.n2) == (0, 2)
        assert not start_invariant([r1, r2])

    def test_result_json_payload(self, theta_coupled_strong, t1_config):
        Y = demean(simulate_mixed(SimConfig(T=500, params=theta_coupled_strong),
                                  ErrorSpec(n=2, df=4.0, seed=30)))
        res = estimate_pipeline(Y, 1, StartStrategy(kind="ols"), t1_config)
        payload = res.to_json_dict()
        assert payload["label"] == res.order.label
        assert payload["start_used"] == "ols"
        assert len(payload["eigenvalues"]) == 2
