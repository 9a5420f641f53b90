"""Monte Carlo drop engine producing per-user rate/SE/EE samples.

Each drop places users, associates them with the exact biased-power rule,
and splits every type's time/frequency share equally over the users the
serving BS actually drew (realized counts).  The interference-plus-noise
constants are the same per-type values the analytic engine uses, so the
comparison between the two isolates the geometric and counting
approximations of the closed-form model.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import engine_for
from .config import ScenarioConfig, UserType, USER_TYPES
from .radio import total_network_power
from .scenario import build_scenario, sample_users, associate_many


class EmptySampleError(ValueError):
    """An empirical CDF needs at least one sample."""


@dataclass(frozen=True)
class DropSample:
    """Per-user outcome of one drop, plus reproducibility metadata."""

    user_positions: np.ndarray
    bs_index: np.ndarray
    user_type: np.ndarray
    p_r_w: np.ndarray
    sinr: np.ndarray
    rate_bps: np.ndarray
    se_bps_hz: np.ndarray
    ee_bpj: np.ndarray
    seed: int | None
    cfg_hash: str

    def metric(self, name: str) -> np.ndarray:
        return {"rate": self.rate_bps, "se": self.se_bps_hz,
                "ee": self.ee_bpj}[name]


def _sigma2_constants(cfg: ScenarioConfig) -> dict[UserType, float]:
    eng = engine_for(cfg)
    return {z: float(eng.sigma2(z, cfg.rho, cfg.w_micro, cfg.n_ue,
                                cfg.noise_bandwidth_mode))
            for z in USER_TYPES}


def run_drop(cfg: ScenarioConfig, rng_stream, *,
             exact_interference: bool = False) -> DropSample:
    """One full drop: placement, association, shared-resource rates.

    `rng_stream` is a numpy Generator or an integer seed.  With
    `exact_interference` the per-user interferer path losses replace the
    per-type constants (sensitivity analysis; default off).
    """
    seed = rng_stream if isinstance(rng_stream, (int, np.integer)) else None
    rng = np.random.default_rng(rng_stream) if seed is not None else rng_stream

    layout = build_scenario(cfg)
    xy = sample_users(cfg, layout, rng)
    bs_index, zeta, p_r = associate_many(xy, layout, cfg.bias_db)

    # equal split of each type's resources over the users its BS drew
    key = bs_index * len(USER_TYPES) + zeta
    counts = np.bincount(key, minlength=(cfg.n_micro + 1) * len(USER_TYPES))
    n_shared = counts[key]

    sig2_const = _sigma2_constants(cfg)
    if exact_interference:
        sigma2 = _per_user_sigma2(cfg, layout, xy, bs_index, zeta, sig2_const)
    else:
        sigma2 = np.array([sig2_const[UserType(z)] for z in range(3)])[zeta]

    eta_z = np.where(zeta == UserType.CRE, cfg.eta, 1.0 - cfg.eta)
    rho_z = np.where(zeta == UserType.MACRO, cfg.rho,
                     np.where(zeta == UserType.DIRECT_MICRO, 1.0 - cfg.rho, 0.5))
    sinr = p_r / sigma2
    log_term = np.log2(1.0 + sinr)
    rate = (eta_z / n_shared) * cfg.total_bandwidth_hz * rho_z * log_term
    se = eta_z * log_term
    ee = rate / total_network_power(cfg.eta, cfg)
    return DropSample(user_positions=xy, bs_index=bs_index, user_type=zeta,
                      p_r_w=p_r, sinr=sinr, rate_bps=rate, se_bps_hz=se,
                      ee_bpj=ee, seed=seed, cfg_hash=cfg.config_hash())


def _per_user_sigma2(cfg, layout, xy, bs_index, zeta, sig2_const):
    """Noise constant per type plus each user's actual interferer sum."""
    noise = {z: sig2_const[z] - _interference_const(cfg, layout, z)
             for z in USER_TYPES}
    micros = layout.micro_positions()
    d = np.hypot(xy[:, 0, None] - micros[None, :, 0],
                 xy[:, 1, None] - micros[None, :, 1])
    contrib = cfg.micro_power_w / np.maximum(d, 1e-12) ** cfg.alpha2
    total = contrib.sum(axis=1)
    parity = np.arange(cfg.n_micro) % 2
    even_sum = contrib[:, parity == 0].sum(axis=1)
    odd_sum = contrib[:, parity == 1].sum(axis=1)
    own = np.zeros(len(xy))
    micro_users = bs_index > 0
    own[micro_users] = contrib[micro_users, bs_index[micro_users] - 1]
    same_parity = np.where((bs_index - 1) % 2 == 0, even_sum, odd_sum)
    sigma2 = np.array([noise[UserType(z)] for z in range(3)])[zeta]
    sigma2 = sigma2 + np.where(
        zeta == UserType.DIRECT_MICRO, total - own,
        np.where(zeta == UserType.CRE, same_parity - own, 0.0))
    return sigma2


def _interference_const(cfg, layout, zeta):
    from .radio import interference_power
    return interference_power(zeta, layout, cfg)


def run_drops(cfg: ScenarioConfig, n_drops: int, *, base_seed: int | None = None,
              threads: int = 1, exact_interference: bool = False) -> list[DropSample]:
    """Independent drops on spawned RNG streams, merged by drop index."""
    root = np.random.SeedSequence(cfg.rng_seed if base_seed is None else base_seed)
    streams = [np.random.default_rng(s) for s in root.spawn(n_drops)]

    def one(i: int) -> DropSample:
        return run_drop(cfg, streams[i], exact_interference=exact_interference)

    if threads <= 1:
        return [one(i) for i in range(n_drops)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(n_drops)))


def pooled_metric(drops: list[DropSample], metric: str) -> np.ndarray:
    return np.concatenate([d.metric(metric) for d in drops])


class EmpiricalCdf:
    """Right-continuous step CDF of a finite sample."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise EmptySampleError("empirical CDF of an empty sample")
        self.samples = np.sort(samples)
        self.n = len(self.samples)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.samples, x, side="right") / self.n


def empirical_cdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)


def drop_sample_to_csv(drop: DropSample, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x_m", "y_m", "bs_index", "user_type", "p_r_w", "sinr",
                     "rate_bps", "se_bps_hz", "ee_bpj"])
        for i in range(len(drop.user_positions)):
            wr.writerow([
                f"{drop.user_positions[i, 0]:.6f}",
                f"{drop.user_positions[i, 1]:.6f}",
                int(drop.bs_index[i]), int(drop.user_type[i]),
                f"{drop.p_r_w[i]:.10e}", f"{drop.sinr[i]:.10e}",
                f"{drop.rate_bps[i]:.6f}", f"{drop.se_bps_hz[i]:.8f}",
                f"{drop.ee_bpj[i]:.8f}",
            ])
