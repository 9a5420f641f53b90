"""Link-level quantities: received power, interference-plus-noise variances,
per-user rate under the time/frequency split, and BS power consumption."""

from __future__ import annotations

import math

import numpy as np

from .config import PowerModelParams, ScenarioConfig, UserType
from .scenario import BaseStation, Layout


class DegenerateDistanceError(ValueError):
    """Received power is undefined at zero distance."""


class OverMaxError(ValueError):
    """Requested output power exceeds the BS class maximum."""


def eta_for_type(zeta: UserType, eta: float) -> float:
    """Time share of a user type: range-expanded users get eta, others 1-eta."""
    return eta if zeta == UserType.CRE else 1.0 - eta


def rho_for_type(zeta: UserType, rho: float) -> float:
    """Band share: macro rho, direct micro 1-rho, range-expanded half band."""
    if zeta == UserType.MACRO:
        return rho
    if zeta == UserType.DIRECT_MICRO:
        return 1.0 - rho
    return 0.5


def received_power(bs: BaseStation, user_xy) -> float:
    """Path-loss-only received power P_t / d^gamma in watts."""
    d = math.hypot(bs.x - user_xy[0], bs.y - user_xy[1])
    if d == 0.0:
        raise DegenerateDistanceError("user is exactly at the BS position")
    return bs.power_w / d ** bs.path_loss_exponent

def noise_power(cfg: ScenarioConfig, bandwidth_hz: float) -> float:
    """Thermal noise plus noise figure integrated over a bandwidth, in watts."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return cfg.noise_psd_w_hz * bandwidth_hz


def interference_power(zeta: UserType, layout: Layout, cfg: ScenarioConfig) -> float:
    """Co-channel interference at a served user, by ring symmetry a per-type constant.

    Direct micro users hear every other micro; range-expanded users hear only
    the micros on the same half of the alternating band split (even ring
    separations); macro users hear nothing.  Distances are micro-to-micro.
    """
    if zeta == UserType.MACRO:
        return 0.0
    ring = cfg.ring_radius_m
    n = layout.n_micro
    total = 0.0
    for sep in range(1, n):
        if zeta == UserType.CRE and sep % 2 != 0:
            continue
        l = 2.0 * ring * math.sin(math.pi * sep / n)
        total += cfg.micro_power_w / l ** cfg.alpha2
    return total


def interference_variance(zeta: UserType, layout: Layout, cfg: ScenarioConfig,
                          noise_bandwidth_hz: float | None = None) -> float:
    """Interference-plus-noise power for one user type, in watts.

    By default the noise term is integrated over the full system band; pass
    an explicit bandwidth for the per-user-allocation noise convention.
    """
    bw = cfg.total_bandwidth_hz if noise_bandwidth_hz is None else noise_bandwidth_hz
    return noise_power(cfg, bw) + interference_power(zeta, layout, cfg)


def _default_sigma2(zeta: UserType, cfg: ScenarioConfig) -> float:
    from .scenario import build_scenario
    return interference_variance(zeta, build_scenario(cfg), cfg)


def user_rate(zeta: UserType, p_r: float, n_shared: float,
              cfg: ScenarioConfig, sigma2: float | None = None) -> float:
    """Per-user rate (bit/s) with the type's time/band share split n_shared ways."""
    if n_shared < 1:
        raise ValueError("n_shared must be >= 1")
    if p_r < 0:
        raise ValueError("received power must be nonnegative")
    eta_z = eta_for_type(zeta, cfg.eta)
    rho_z = rho_for_type(zeta, cfg.rho)
    if eta_z == 0.0 or rho_z == 0.0:
        return 0.0
    s2 = _default_sigma2(zeta, cfg) if sigma2 is None else sigma2
    return (eta_z / n_shared) * cfg.total_bandwidth_hz * rho_z * math.log2(1.0 + p_r / s2)


def spectral_efficiency(zeta: UserType, p_r: float, cfg: ScenarioConfig,
                        sigma2: float | None = None) -> float:
    """Rate per occupied bandwidth (bit/s/Hz): the sharing count cancels."""
    if p_r < 0:
        raise ValueError("received power must be nonnegative")
    eta_z = eta_for_type(zeta, cfg.eta)
    if eta_z == 0.0:
        return 0.0
    s2 = _default_sigma2(zeta, cfg) if sigma2 is None else sigma2
    return eta_z * math.log2(1.0 + p_r / s2)


def bs_power_in(params: PowerModelParams, p_out_w: float) -> float:
    """Consumed power of one BS: linear in output when on, sleep floor when off."""
    if p_out_w < 0:
        raise ValueError("output power must be nonnegative")
    if p_out_w > params.p_max_w:
        raise OverMaxError(f"output {p_out_w} W exceeds p_max {params.p_max_w} W")
    if p_out_w == 0.0:
        return params.n_trx * params.p_sleep_w
    return params.n_trx * params.p0_w + params.delta_p * p_out_w


def total_network_power(eta: float, cfg: ScenarioConfig) -> float:
    """Network consumption: macro silent during the eta fraction, micros always on."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    macro_on = bs_power_in(cfg.macro_power_model, cfg.macro_power_w)
    macro_sleep = bs_power_in(cfg.macro_power_model, 0.0)
    micro_on = bs_power_in(cfg.micro_power_model, cfg.micro_power_w)
    return (1.0 - eta) * macro_on + eta * macro_sleep + cfg.n_micro * micro_on


def energy_efficiency(rate_bps, eta: float, cfg: ScenarioConfig):
    """Per-user bit/J: rate divided by the whole network's consumed power."""
    return np.asarray(rate_bps, float) / total_network_power(eta, cfg)
