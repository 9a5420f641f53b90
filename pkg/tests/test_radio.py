import math

import numpy as np
import pytest

from coehetnet.config import ScenarioConfig, UserType
from coehetnet.radio import (DegenerateDistanceError, OverMaxError,
                             bs_power_in, energy_efficiency,
                             interference_power, interference_variance,
                             noise_power, received_power, spectral_efficiency,
                             total_network_power, user_rate)
from coehetnet.scenario import build_scenario


@pytest.fixture(scope="module")
def layout(cfg):
    return build_scenario(cfg)


class TestReceivedPower:
    def test_unit_distance(self, layout):
        macro = layout.stations[0]
        assert received_power(macro, (1.0, 0.0)) == pytest.approx(macro.power_w)

    def test_macro_at_disc_edge(self, cfg, layout):
        p = received_power(layout.stations[0], (1000.0, 0.0))
        assert p == pytest.approx(10 ** 1.6 / 1000.0 ** 3.5, rel=1e-12)

    def test_inverse_power_law(self, layout):
        micro = layout.stations[1]
        near = received_power(micro, (micro.x + 50.0, micro.y))
        far = received_power(micro, (micro.x + 100.0, micro.y))
        assert near / far == pytest.approx(16.0, rel=1e-12)

    def test_zero_distance_raises(self, layout):
        with pytest.raises(DegenerateDistanceError):
            received_power(layout.stations[0], (0.0, 0.0))


class TestInterference:
    def test_macro_is_noise_only(self, cfg, layout):
        assert interference_power(UserType.MACRO, layout, cfg) == 0.0
        assert (interference_variance(UserType.MACRO, layout, cfg)
                == pytest.approx(noise_power(cfg, cfg.total_bandwidth_hz)))

    def test_direct_micro_hears_all_nine(self, cfg, layout):
        expected = sum(cfg.micro_power_w
                       / (2 * 800 * math.sin(math.pi * j / 10)) ** 4
                       for j in range(1, 10))
        assert (interference_power(UserType.DIRECT_MICRO, layout, cfg)
                == pytest.approx(expected, rel=1e-12))

    def test_cre_hears_same_parity_four(self, cfg, layout):
        expected = sum(cfg.micro_power_w
                       / (2 * 800 * math.sin(math.pi * j / 10)) ** 4
                       for j in (2, 4, 6, 8))
        assert (interference_power(UserType.CRE, layout, cfg)
                == pytest.approx(expected, rel=1e-12))

    def test_strict_type_ordering(self, cfg, layout):
        s = {z: interference_variance(z, layout, cfg) for z in UserType}
        assert s[UserType.MACRO] < s[UserType.CRE] < s[UserType.DIRECT_MICRO]

    def test_allocation_bandwidth_argument(self, cfg, layout):
        narrow = interference_variance(UserType.MACRO, layout, cfg,
                                       noise_bandwidth_hz=1e6)
        assert narrow == pytest.approx(noise_power(cfg, 1e6))


class TestNoisePower:
    def test_one_hertz(self, cfg):
        # -173 dBm/Hz + 7 dB noise figure = 10^-16.6 mW/Hz = 10^-19.6 W/Hz
        assert noise_power(cfg, 1.0) == pytest.approx(10 ** -19.6, rel=1e-12)

    def test_full_band(self, cfg):
        assert noise_power(cfg, 100e6) == pytest.approx(2.5119e-12, rel=1e-4)

    def test_linear_in_bandwidth(self, cfg):
        assert noise_power(cfg, 2e6) == pytest.approx(2 * noise_power(cfg, 1e6))


class TestUserRate:
    def test_macro_gets_nothing_at_full_expansion_time(self, cfg):
        full = cfg.replace(eta=1.0)
        assert user_rate(UserType.MACRO, 1e-9, 10, full) == 0.0

    def test_unit_snr(self, cfg):
        s2 = 3e-12
        rate = user_rate(UserType.CRE, s2, 4, cfg, sigma2=s2)
        assert rate == pytest.approx((cfg.eta / 4) * cfg.total_bandwidth_hz * 0.5)

    def test_halves_when_shared_twice(self, cfg):
        one = user_rate(UserType.DIRECT_MICRO, 1e-9, 1, cfg)
        two = user_rate(UserType.DIRECT_MICRO, 1e-9, 2, cfg)
        assert two == pytest.approx(one / 2)


class TestSpectralEfficiency:
    def test_zero_power(self, cfg):
        assert spectral_efficiency(UserType.MACRO, 0.0, cfg) == 0.0

    def test_cre_dead_without_expansion_time(self, cfg):
        assert spectral_efficiency(UserType.CRE, 1e-9, cfg.replace(eta=0.0)) == 0.0

    def test_ratio_identity_with_rate(self, cfg):
        p_r, n = 2e-9, 7
        for zeta in UserType:
            se = spectral_efficiency(zeta, p_r, cfg)
            rate = user_rate(zeta, p_r, n, cfg)
            rho_z = {UserType.MACRO: cfg.rho, UserType.DIRECT_MICRO: 1 - cfg.rho,
                     UserType.CRE: 0.5}[zeta]
            assert se * cfg.total_bandwidth_hz * rho_z / n == pytest.approx(rate)


class TestPowerModel:
    def test_macro_at_rated_output(self, cfg):
        p = bs_power_in(cfg.macro_power_model, cfg.macro_power_w)
        assert p == pytest.approx(6 * 130 + 4.7 * 10 ** 1.6, rel=1e-12)
        assert p == pytest.approx(968.0, rel=1e-2)

    def test_macro_sleep(self, cfg):
        assert bs_power_in(cfg.macro_power_model, 0.0) == pytest.approx(450.0)

    def test_micro_at_rated_output(self, cfg):
        p = bs_power_in(cfg.micro_power_model, cfg.micro_power_w)
        assert p == pytest.approx(113.0, rel=1e-2)

    def test_over_max_raises(self, cfg):
        with pytest.raises(OverMaxError):
            bs_power_in(cfg.macro_power_model, 41.0)

    def test_total_network_power_endpoints(self, cfg):
        assert total_network_power(0.0, cfg) == pytest.approx(2098.0, rel=5e-3)
        assert total_network_power(1.0, cfg) == pytest.approx(1580.0, rel=5e-3)

    def test_total_power_affine_decreasing(self, cfg):
        p0, p1 = total_network_power(0.0, cfg), total_network_power(1.0, cfg)
        assert p1 < p0
        assert total_network_power(0.3, cfg) == pytest.approx(0.7 * p0 + 0.3 * p1)


class TestEnergyEfficiency:
    def test_zero_rate(self, cfg):
        assert energy_efficiency(0.0, 0.0, cfg) == 0.0

    def test_one_bit_per_joule(self, cfg):
        p_tot = total_network_power(0.0, cfg)
        assert energy_efficiency(p_tot, 0.0, cfg) == pytest.approx(1.0)

    def test_linear_in_rate(self, cfg):
        assert (energy_efficiency(6e6, 0.4, cfg)
                == pytest.approx(3 * energy_efficiency(2e6, 0.4, cfg)))
