import numpy as np
import pytest

from rankeffect import (
    CovarianceEstimate,
    EffectEstimate,
    anova_test,
    build_masked_sample,
    build_rank_table,
    chisq_upper_tail,
    derive_pattern_index,
    estimate_effects,
    run_all_methods,
    wald_test,
)
from rankeffect.errors import DomainError, ZeroCovariance, ZeroTrace

from conftest import simple_mask
from oracles import chisq_upper_tail_highprec


def make_effects(p, method="all"):
    p = np.asarray(p, dtype=float)
    d = p.size
    ones = np.ones(d, dtype=int)
    return EffectEstimate(
        p_hat=p, theta1=np.ones(d), theta2=np.ones(d),
        n_complete=10 * ones, n1_only=0 * ones, n2_only=0 * ones, method=method,
    )


def make_cov(v, estimator="simple"):
    v = np.asarray(v, dtype=float)
    trace = float(np.trace(v))
    trace_sq = float(np.sum(v * v))
    nu = trace**2 / trace_sq if trace_sq > 0 else float("nan")
    return CovarianceEstimate(
        v_hat=v, trace=trace, trace_sq=trace_sq, nu_hat=nu, estimator=estimator
    )


class TestChisqUpperTail:
    def test_at_zero(self):
        for k in (0.5, 1.0, 2.0, 7.3):
            assert chisq_upper_tail(0.0, k) == 1.0

    def test_df2_closed_form(self):
        assert chisq_upper_tail(5.991, 2.0) == pytest.approx(0.05, abs=1e-4)

    def test_df1_quantile(self):
        assert chisq_upper_tail(3.841, 1.0) == pytest.approx(0.05, abs=1e-4)

    def test_against_highprec_oracle(self):
        for k in (0.5, 1.0, 2.0, 3.7, 5.0, 12.25, 50.0):
            for x in (0.0, 1e-4, 0.5, 1.0, 3.841, 10.0, 42.0, 120.0, 200.0):
                assert chisq_upper_tail(x, k) == pytest.approx(
                    chisq_upper_tail_highprec(x, k), abs=1e-10
                )

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            chisq_upper_tail(-1.0, 2.0)
        with pytest.raises(DomainError):
            chisq_upper_tail(1.0, 0.0)
        with pytest.raises(DomainError):
            chisq_upper_tail(float("nan"), 2.0)

    def test_monotone_in_statistic(self):
        xs = np.linspace(0, 30, 40)
        for k in (1.0, 2.5, 6.0):
            p = [chisq_upper_tail(x, k) for x in xs]
            assert all(a >= b for a, b in zip(p, p[1:]))


class TestWald:
    def test_null_point_gives_one(self):
        rep = wald_test(make_effects([0.5, 0.5]), make_cov(np.eye(2)), n=50)
        assert rep.statistic == 0.0 and rep.p_value == pytest.approx(1.0)
        assert not rep.reject

    def test_identity_covariance_closed_form(self):
        rep = wald_test(make_effects([0.6, 0.5]), make_cov(np.eye(2)), n=100)
        assert rep.statistic == pytest.approx(1.0)
        assert rep.df == 2.0
        assert rep.p_value == pytest.approx(np.exp(-0.5), abs=1e-12)

    def test_rank_one_covariance_reports_df_one(self):
        v = np.array([[1.0, 0.0], [0.0, 0.0]])
        rep = wald_test(make_effects([0.6, 0.5]), make_cov(v), n=100)
        assert rep.df == 1.0
        assert any("pseudo-inverse" in f for f in rep.flags)
        assert rep.statistic == pytest.approx(1.0)

    def test_zero_covariance_null_vs_error(self):
        zero = make_cov(np.zeros((2, 2)))
        rep = wald_test(make_effects([0.5, 0.5]), zero, n=20)
        assert rep.p_value == 1.0 and "zero-covariance-null" in rep.flags
        with pytest.raises(ZeroCovariance):
            wald_test(make_effects([0.7, 0.5]), zero, n=20)

    def test_invariance_under_congruence(self, rng):
        d = 3
        for _ in range(25):
            dev = rng.uniform(-0.2, 0.2, size=d)
            a = rng.standard_normal((d, d))
            v = a @ a.T + 0.5 * np.eye(d)  # nonsingular
            t = rng.standard_normal((d, d))
            while abs(np.linalg.det(t)) < 1e-3:
                t = rng.standard_normal((d, d))
            base = wald_test(make_effects(0.5 + dev), make_cov(v), n=40)
            dev2 = t @ dev
            dev2 = np.clip(dev2, -0.49, 0.49)  # keep p_hat in range
            if not np.allclose(dev2, t @ dev):
                continue
            rep2 = wald_test(make_effects(0.5 + t @ dev), make_cov(t @ v @ t.T), n=40)
            assert rep2.statistic == pytest.approx(base.statistic, rel=1e-9)
            assert rep2.p_value == pytest.approx(base.p_value, rel=1e-9)


class TestAnova:
    def test_null_point(self):
        rep = anova_test(make_effects([0.5, 0.5]), make_cov(np.eye(2)), n=50)
        assert rep.statistic == 0.0 and rep.p_value == pytest.approx(1.0)

    def test_identity_covariance_df_is_dimension(self):
        rep = anova_test(make_effects([0.6, 0.4]), make_cov(np.eye(2)), n=50)
        assert rep.df == pytest.approx(2.0)

    def test_all_ones_covariance_df_is_one(self):
        rep = anova_test(make_effects([0.6, 0.4]), make_cov(np.ones((2, 2))), n=50)
        assert rep.df == pytest.approx(1.0)

    def test_zero_trace(self):
        zero = make_cov(np.zeros((2, 2)))
        rep = anova_test(make_effects([0.5, 0.5]), zero, n=20)
        assert rep.p_value == 1.0 and "zero-covariance-null" in rep.flags
        with pytest.raises(ZeroTrace):
            anova_test(make_effects([0.7, 0.5]), zero, n=20)

    def test_f_statistic_value(self):
        # F = n/tr(V) * ||dev||^2 = 50/2 * 0.02 = 0.5
        rep = anova_test(make_effects([0.6, 0.4]), make_cov(np.eye(2)), n=50)
        assert rep.statistic == pytest.approx(0.5)
        assert rep.p_value == pytest.approx(chisq_upper_tail(2 * 0.5, 2.0))

    def test_null_calibration_continuous_data(self):
        """Rejection rate under a continuous exchangeable null stays near alpha."""
        rng = np.random.default_rng(321)
        obs = simple_mask(2, 30, 10, 10)
        reps, hits = 1000, 0
        for _ in range(reps):
            s = build_masked_sample(rng.standard_normal(obs.shape), obs)
            idx = derive_pattern_index(s)
            rt = build_rank_table(s, idx)
            eff = estimate_effects(s, idx, rt)
            from rankeffect import covariance_simple

            cov = covariance_simple(s, idx, rt)
            hits += int(anova_test(eff, cov, s.n).reject)
        assert 0.03 <= hits / reps <= 0.08

    def test_p_values_in_unit_interval(self, rng):
        for _ in range(40):
            d = int(rng.integers(1, 4))
            a = rng.standard_normal((d, d))
            v = a @ a.T
            dev = rng.uniform(-0.3, 0.3, size=d)
            for rep in (
                wald_test(make_effects(0.5 + dev), make_cov(v), n=30),
                anova_test(make_effects(0.5 + dev), make_cov(v), n=30),
            ):
                assert 0.0 <= rep.p_value <= 1.0
                assert rep.statistic >= 0.0


class TestRunAllMethods:
    def test_fully_observed_all_equals_complete(self, rng):
        obs = np.ones((4, 12), bool)
        s = build_masked_sample(rng.integers(0, 5, obs.shape).astype(float), obs)
        idx = derive_pattern_index(s)
        reports = {(r.family, r.method): r for r in run_all_methods(s, idx)}
        for fam in ("wald", "anova"):
            assert reports[(fam, "all")].statistic == pytest.approx(
                reports[(fam, "complete")].statistic
            )
            assert reports[(fam, "all")].p_value == pytest.approx(
                reports[(fam, "complete")].p_value
            )
            assert any("inestimable" in f for f in reports[(fam, "incomplete")].flags)
            assert np.isnan(reports[(fam, "incomplete")].p_value)

    def test_single_group2_case_flags_degenerate_part(self, rng):
        obs = simple_mask(3, 33, 8, 1)
        s = build_masked_sample(rng.integers(1, 8, obs.shape).astype(float), obs)
        idx = derive_pattern_index(s)
        reports = {(r.family, r.method): r for r in run_all_methods(s, idx)}
        inc = reports[("anova", "incomplete")]
        assert any("degenerate" in f for f in inc.flags)
        assert 0.0 <= inc.p_value <= 1.0

    def test_six_reports_in_method_order(self, rng):
        obs = simple_mask(2, 8, 3, 3)
        s = build_masked_sample(rng.standard_normal(obs.shape), obs)
        idx = derive_pattern_index(s)
        reports = run_all_methods(s, idx)
        assert [(r.family, r.method) for r in reports] == [
            ("wald", "all"), ("anova", "all"),
            ("wald", "complete"), ("anova", "complete"),
            ("wald", "incomplete"), ("anova", "incomplete"),
        ]
