import numpy as np
import pytest

from coehetnet.analytic import AnalyticCdf, mixture_cdf, type_mixture
from coehetnet.config import ScenarioConfig, UserType
from coehetnet.evaluation import (TooFewSamplesError, kpi_sweep, kpis,
                                  ks_campaign, ks_test, optimize_grid,
                                  sample_from_cdf)


class TestKsTest:
    def test_null_calibration(self):
        # uniform samples against the identity CDF: p-values are uniform, so
        # the alpha=0.05 pass fraction sits near 0.95
        rng = np.random.default_rng(7)
        passes = 0
        for _ in range(1000):
            _, p = ks_test(rng.uniform(size=100), lambda x: x)
            passes += p >= 0.05
        assert 0.93 <= passes / 1000 <= 0.97

    def test_point_mass_at_median(self):
        cdf = lambda x: np.clip(np.asarray(x, float), 0, 1)
        d, p = ks_test(np.full(100, 0.5), cdf)
        assert d == pytest.approx(0.5)
        assert p < 1e-10

    def test_matched_sample_passes(self):
        n = 100
        samples = (np.arange(1, n + 1) - 0.5) / n
        d, p = ks_test(samples, lambda x: x)
        assert d == pytest.approx(0.5 / n)
        assert p > 0.999

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamplesError):
            ks_test([0.1, 0.2, 0.3], lambda x: x)


class TestKsCampaign:
    def test_self_consistency(self, cfg):
        report = ks_campaign(cfg, "rate", n_trials=200, subsample=100,
                             base_seed=99, self_test=True)
        assert report.pass_ratio >= 0.93
        assert 0.4 <= report.mean_significance <= 0.6
        assert report.n_trials == 200 and report.sample_size == 100

    def test_single_drop_mode_runs(self, cfg):
        report = ks_campaign(cfg.replace(n_ue=400), "rate", n_trials=20,
                             subsample=50, base_seed=3, single_drop=True)
        assert 0.0 <= report.pass_ratio <= 1.0

    def test_sample_from_cdf_matches_target(self, cfg):
        cdf = mixture_cdf(cfg.bias_db, cfg.eta, cfg.rho, cfg, metric="rate")
        values = sample_from_cdf(cdf, 4000, np.random.default_rng(17))
        d, p = ks_test(values, cdf.evaluator)
        assert p > 0.01


class TestKpis:
    def test_full_expansion_time_zeroes_r10(self, cfg):
        mix = type_mixture(cfg.bias_db, cfg)
        dead_weight = (mix.weights[UserType.MACRO]
                       + mix.weights[UserType.DIRECT_MICRO])
        assert dead_weight > 0.1
        res = kpis(cfg.bias_db, 1.0, cfg.rho, cfg)
        assert res.r10_bps == 0.0

    def test_theta_products(self, cfg):
        res = kpis(cfg.bias_db, 0.2, 0.5, cfg)
        assert res.theta10 == res.se10 * res.ee10
        assert res.theta50 == res.se50 * res.ee50
        assert res.r10_bps > 0


class TestOptimizeGrid:
    def test_rho_tie_break_for_band_free_objective(self, cfg):
        # with full-band noise the SE distribution has no rho dependence at
        # all, so the whole rho axis ties and the smallest wins
        res = optimize_grid(10.0, cfg.replace(noise_bandwidth_mode="full_band"),
                            objective="se10", step=0.05)
        assert res.rho_star == 0.0

    def test_deterministic(self, cfg):
        a = optimize_grid(10.0, cfg, "r10", step=0.05)
        b = optimize_grid(10.0, cfg, "r10", step=0.05)
        assert (a.eta_star, a.rho_star, a.value) == (b.eta_star, b.rho_star, b.value)
        assert np.array_equal(a.grid, b.grid)

    def test_step_validation(self, cfg):
        with pytest.raises(ValueError):
            optimize_grid(10.0, cfg, "r10", step=0.7)
        with pytest.raises(ValueError):
            optimize_grid(10.0, cfg, "r42")

    def test_optimum_trends_across_cells(self, cfg):
        # eta* grows with bias; rho* shrinks with bias and with w_micro
        best = {}
        for bias in (10.0, 20.0):
            for w in (1 / 3, 1 / 2, 2 / 3):
                best[(bias, w)] = optimize_grid(bias, cfg.replace(w_micro=w),
                                                "r10", step=0.01)
        for w in (1 / 3, 1 / 2, 2 / 3):
            assert best[(20.0, w)].eta_star > best[(10.0, w)].eta_star
            assert best[(20.0, w)].rho_star < best[(10.0, w)].rho_star
        for bias in (10.0, 20.0):
            assert (best[(bias, 1 / 3)].rho_star > best[(bias, 1 / 2)].rho_star
                    > best[(bias, 2 / 3)].rho_star)


class TestKpiSweep:
    def test_theta50_nonincreasing_in_eta(self, cfg):
        etas = np.round(np.arange(0.0, 1.0001, 0.05), 10)
        for bias in (10.0, 20.0):
            sweep = kpi_sweep(cfg.replace(rho=0.5, w_micro=0.5), bias, "eta",
                              etas, objectives=("theta50",))
            assert np.all(np.diff(sweep["theta50"]) <= 1e-9)

    def test_rho_sweep_runs(self, cfg):
        rhos = np.round(np.arange(0.0, 1.0001, 0.25), 10)
        sweep = kpi_sweep(cfg, 10.0, "rho", rhos, objectives=("r10", "se10"))
        assert len(sweep["r10"]) == len(rhos)

    def test_unknown_parameter(self, cfg):
        with pytest.raises(ValueError):
            kpi_sweep(cfg, 10.0, "gamma", np.array([0.1]), objectives=("r10",))
