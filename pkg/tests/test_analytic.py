import math

import numpy as np
import pytest

from coehetnet.analytic import (AnalyticCdf, NotBracketedError, engine_for,
                                distance_cdf, mixture_cdf, percentile,
                                rate_cdf_per_type, received_power_cdf,
                                type_mixture)
from coehetnet.config import ScenarioConfig, UserType
from coehetnet.radio import total_network_power
from coehetnet.simulator import empirical_cdf, pooled_metric


@pytest.fixture(scope="module")
def engine(cfg):
    return engine_for(cfg, cfg.bias_db)


class TestDistanceCdf:
    def test_zero_and_saturation(self, cfg):
        for zeta in UserType:
            assert distance_cdf(zeta, 10.0, 0.0, cfg) == 0.0
            assert distance_cdf(zeta, 10.0, 5000.0, cfg) == 1.0

    def test_against_simulated_distances(self, cfg, engine, drop_pool):
        # pooled serving distances of each type vs the tabulated CDF
        for zeta in UserType:
            dists = []
            for d in drop_pool:
                m = d.user_type == zeta
                xy = d.user_positions[m]
                if zeta == UserType.MACRO:
                    dists.append(np.hypot(xy[:, 0], xy[:, 1]))
                else:
                    ang = 2 * np.pi * (d.bs_index[m] - 1) / cfg.n_micro
                    dists.append(np.hypot(xy[:, 0] - 800 * np.cos(ang),
                                          xy[:, 1] - 800 * np.sin(ang)))
            x = np.sort(np.concatenate(dists))
            emp = np.arange(1, len(x) + 1) / len(x)
            ks = np.max(np.abs(emp - engine.distance_cdf(zeta, x)))
            assert ks <= 0.01, f"{zeta.name}: KS {ks:.4f}"


class TestReceivedPowerCdf:
    def test_limits(self, cfg, engine):
        for zeta in UserType:
            assert received_power_cdf(zeta, 10.0, 1e-30, cfg) == pytest.approx(0.0)
            p_sat = (engine.tier_power[zeta]
                     / engine.r_lo[zeta] ** engine.tier_exponent[zeta])
            assert received_power_cdf(zeta, 10.0, p_sat, cfg) >= 1 - 1e-9

    def test_median_is_transformed_distance_median(self, cfg, engine):
        # the power CDF is the monotone image of the distance CDF
        grid, f = engine._dist_tab[UserType.DIRECT_MICRO]
        d_med = np.interp(0.5, f, grid)
        p_med = cfg.micro_power_w / d_med ** cfg.alpha2
        assert received_power_cdf(UserType.DIRECT_MICRO, 10.0, p_med, cfg) \
            == pytest.approx(0.5, abs=1e-3)


class TestRateCdfPerType:
    def test_zero_rate_has_zero_mass_when_alive(self, cfg):
        for zeta in UserType:
            assert rate_cdf_per_type(zeta, 10.0, 0.2, 0.5, 0.0, cfg) == 0.0

    def test_macro_is_atom_when_expansion_takes_all_time(self, cfg):
        f = rate_cdf_per_type(UserType.MACRO, 10.0, 1.0, 0.5,
                              np.array([0.0, 1e3, 1e9]), cfg)
        assert np.all(f == 1.0)

    def test_against_pooled_simulation(self, cfg, engine, drop_pool):
        # realized-count sharing in the simulator smears the per-type CDFs
        # around the expected-count analytic ones; ceilings frozen from a
        # 400-drop calibration run
        ceilings = {UserType.DIRECT_MICRO: 0.02, UserType.MACRO: 0.08,
                    UserType.CRE: 0.32}
        for zeta in UserType:
            vals = np.sort(np.concatenate(
                [d.rate_bps[d.user_type == zeta] for d in drop_pool]))
            emp = np.arange(1, len(vals) + 1) / len(vals)
            f = engine.type_metric_cdf("rate", zeta, vals, cfg.eta, cfg.rho,
                                       cfg.w_micro, cfg.n_ue,
                                       cfg.noise_bandwidth_mode)
            ks = np.max(np.abs(emp - f))
            assert ks <= ceilings[zeta], f"{zeta.name}: KS {ks:.4f}"


class TestMixture:
    def test_degenerate_single_type(self):
        cfg = ScenarioConfig(w_micro=1.0, bias_db=0.0)
        mix = type_mixture(0.0, cfg)
        assert mix.weights[UserType.DIRECT_MICRO] == pytest.approx(1.0)
        cdf = mixture_cdf(0.0, 0.2, 0.5, cfg, metric="rate")
        eng = engine_for(cfg, 0.0)
        grid = np.linspace(0, cdf.support_hint[1], 257)
        direct = eng.type_metric_cdf("rate", UserType.DIRECT_MICRO, grid, 0.2,
                                     0.5, 1.0, cfg.n_ue, cfg.noise_bandwidth_mode)
        assert np.allclose(cdf.evaluator(grid), direct, atol=1e-12)

    def test_upper_support_reaches_one(self, cfg):
        for metric in ("rate", "se", "ee"):
            cdf = mixture_cdf(10.0, 0.2, 0.5, cfg, metric=metric)
            assert float(cdf.evaluator(cdf.support_hint[1])) >= 1 - 1e-9

    def test_monotone_on_grid(self, cfg):
        for metric in ("rate", "se", "ee"):
            cdf = mixture_cdf(10.0, 0.2, 0.5, cfg, metric=metric)
            grid = np.linspace(0, cdf.support_hint[1], 1000)
            vals = np.asarray(cdf.evaluator(grid))
            assert np.all(np.diff(vals) >= -1e-12)
            assert np.all((vals >= 0) & (vals <= 1))

    def test_type_mixture_bookkeeping(self, cfg):
        mix = type_mixture(0.0, cfg)
        assert mix.expected_counts[UserType.CRE] == 0.0
        mix10 = type_mixture(10.0, cfg)
        assert sum(mix10.expected_counts.values()) == pytest.approx(cfg.n_ue,
                                                                    abs=1e-9)
        assert sum(mix10.weights.values()) == pytest.approx(1.0, abs=1e-12)
        assert (mix10.per_bs_counts[UserType.DIRECT_MICRO]
                == pytest.approx(mix10.expected_counts[UserType.DIRECT_MICRO]
                                 / cfg.n_micro))


class TestIdentities:
    def test_rate_cdf_composition(self, cfg, engine):
        # the rate CDF is exactly the received-power CDF at the SINR threshold
        eta, rho = 0.2, 0.5
        mix = engine.type_mixture(cfg.w_micro, cfg.n_ue)
        for zeta in UserType:
            s2 = float(engine.sigma2(zeta, rho, cfg.w_micro, cfg.n_ue,
                                     cfg.noise_bandwidth_mode))
            eta_z = eta if zeta == UserType.CRE else 1 - eta
            rho_z = {UserType.MACRO: rho, UserType.DIRECT_MICRO: 1 - rho,
                     UserType.CRE: 0.5}[zeta]
            coeff = eta_z * cfg.total_bandwidth_hz * rho_z / mix.per_bs_counts[zeta]
            c = np.linspace(1e3, 2e7, 64)
            direct = rate_cdf_per_type(zeta, cfg.bias_db, eta, rho, c, cfg)
            composed = received_power_cdf(zeta, cfg.bias_db,
                                          s2 * (np.exp2(c / coeff) - 1), cfg)
            assert np.allclose(direct, composed, atol=1e-12)

    def test_rate_se_ee_quantile_consistency(self, cfg, engine):
        # per type: rate = SE * (W rho_z / N_bs) and EE = rate / P_tot, so the
        # CDFs agree under the same change of variable
        eta, rho = 0.2, 0.5
        ptot = total_network_power(eta, cfg)
        mix = engine.type_mixture(cfg.w_micro, cfg.n_ue)
        args = (cfg.w_micro, cfg.n_ue, cfg.noise_bandwidth_mode)
        for zeta in UserType:
            rho_z = {UserType.MACRO: rho, UserType.DIRECT_MICRO: 1 - rho,
                     UserType.CRE: 0.5}[zeta]
            scale = cfg.total_bandwidth_hz * rho_z / mix.per_bs_counts[zeta]
            v = np.linspace(1e4, 1e7, 50)
            f_rate = engine.type_metric_cdf("rate", zeta, v, eta, rho, *args)
            f_se = engine.type_metric_cdf("se", zeta, v / scale, eta, rho, *args)
            f_ee = engine.type_metric_cdf("ee", zeta, v / ptot, eta, rho, *args,
                                          total_power_w=ptot)
            assert np.max(np.abs(f_rate - f_se)) <= 1e-9
            assert np.max(np.abs(f_rate - f_ee)) <= 1e-9


class TestPercentile:
    def test_uniform_cdf(self):
        cdf = AnalyticCdf(evaluator=lambda v: np.clip(np.asarray(v, float), 0, 1),
                          support_hint=(0.0, 1.0), atom_at_zero=0.0)
        assert percentile(cdf, 0.1) == pytest.approx(0.1, abs=1e-9)

    def test_atom_short_circuit(self):
        cdf = AnalyticCdf(evaluator=lambda v: np.clip(0.3 + np.asarray(v, float),
                                                      0, 1),
                          support_hint=(0.0, 1.0), atom_at_zero=0.3)
        assert percentile(cdf, 0.25) == 0.0

    def test_not_bracketed(self):
        cdf = AnalyticCdf(evaluator=lambda v: np.minimum(np.asarray(v, float), 0.5),
                          support_hint=(0.0, 1.0), atom_at_zero=0.0)
        with pytest.raises(NotBracketedError):
            percentile(cdf, 0.9)

    def test_median_of_sample_matched_cdf(self, drop_pool):
        # wrap the pooled empirical CDF and invert its median
        pooled = pooled_metric(drop_pool, "rate")
        emp = empirical_cdf(pooled)
        cdf = AnalyticCdf(evaluator=emp, support_hint=(0.0, float(pooled.max())),
                          atom_at_zero=0.0)
        assert percentile(cdf, 0.5) == pytest.approx(float(np.median(pooled)),
                                                     rel=0.02)

    def test_round_trip(self, cfg):
        cdf = mixture_cdf(10.0, 0.2, 0.5, cfg, metric="rate")
        for q in (0.05, 0.1, 0.25, 0.5, 0.75, 0.9):
            v = percentile(cdf, q)
            f = float(cdf.evaluator(v))
            assert q <= f <= q + 1e-6
