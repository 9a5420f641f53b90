"""Deployment construction, user placement, and biased association."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, UserType
from .geometry import ring_geometry


@dataclass(frozen=True)
class BaseStation:
    x: float
    y: float
    power_w: float
    path_loss_exponent: float
    is_macro: bool


@dataclass(frozen=True)
class Layout:
    """Index 0 is the macro BS; indices 1..n_micro are the ring micros."""

    stations: tuple[BaseStation, ...]
    positions: np.ndarray        # (n_bs, 2)
    powers_w: np.ndarray         # (n_bs,)
    exponents: np.ndarray        # (n_bs,)

    @property
    def n_micro(self) -> int:
        return len(self.stations) - 1

    def micro_positions(self) -> np.ndarray:
        return self.positions[1:]


@dataclass(frozen=True)
class Drop:
    """One placement realization with its association outcome."""

    bs_positions: np.ndarray
    user_positions: np.ndarray
    bs_index: np.ndarray
    user_type: np.ndarray


def build_scenario(cfg: ScenarioConfig) -> Layout:
    """Macro at the origin plus n_micro equally spaced micros on the ring."""
    stations = [BaseStation(0.0, 0.0, cfg.macro_power_w, cfg.alpha1, True)]
    for i in range(cfg.n_micro):
        ang = 2.0 * math.pi * i / cfg.n_micro
        stations.append(BaseStation(
            cfg.ring_radius_m * math.cos(ang),
            cfg.ring_radius_m * math.sin(ang),
            cfg.micro_power_w, cfg.alpha2, False,
        ))
    positions = np.array([[s.x, s.y] for s in stations])
    return Layout(
        stations=tuple(stations),
        positions=positions,
        powers_w=np.array([s.power_w for s in stations]),
        exponents=np.array([s.path_loss_exponent for s in stations]),
    )


def _sample_uniform_disc(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the closed disc, by rejection in the bounding square."""
    out = np.empty((n, 2))
    got = 0
    while got < n:
        m = int((n - got) * 4 / math.pi * 1.1) + 16
        xy = rng.uniform(-radius, radius, size=(m, 2))
        xy = xy[xy[:, 0] ** 2 + xy[:, 1] ** 2 <= radius * radius]
        take = min(len(xy), n - got)
        out[got:got + take] = xy[:take]
        got += take
    return out


def _sample_in_coverage_circles(n: int, cfg: ScenarioConfig,
                                rng: np.random.Generator) -> np.ndarray:
    """Users inside the zero-bias coverage circles, clipped to the disc.

    The n users are split in equal quotas over the micros (remainder goes to
    micros drawn without replacement); per-micro counts kept deterministic so
    the realized per-BS load matches the analytic average as closely as the
    layout symmetry allows.
    """
    geo = ring_geometry(cfg, 0.0)
    circle = geo.dir_circle
    center_radius = math.hypot(circle.cx, circle.cy)
    base, extra = divmod(n, cfg.n_micro)
    micro_idx = np.repeat(np.arange(cfg.n_micro), base)
    if extra:
        micro_idx = np.concatenate([micro_idx, rng.choice(cfg.n_micro, extra, replace=False)])
    angles = 2.0 * np.pi * micro_idx / cfg.n_micro
    centers = np.column_stack([center_radius * np.cos(angles),
                               center_radius * np.sin(angles)])
    out = np.empty((n, 2))
    pending = np.arange(n)
    while len(pending):
        m = len(pending)
        rr = circle.r * np.sqrt(rng.uniform(size=m))
        th = rng.uniform(0.0, 2.0 * np.pi, size=m)
        pts = centers[pending] + np.column_stack([rr * np.cos(th), rr * np.sin(th)])
        ok = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= cfg.disc_radius_m ** 2
        out[pending[ok]] = pts[ok]
        pending = pending[~ok]
    return out


def sample_users(cfg: ScenarioConfig, layout: Layout,
                 rng: np.random.Generator) -> np.ndarray:
    """floor(w_micro*N) users inside micro coverage circles, rest uniform on the disc."""
    n_in = int(cfg.w_micro * cfg.n_ue)
    parts = []
    if n_in:
        parts.append(_sample_in_coverage_circles(n_in, cfg, rng))
    if cfg.n_ue - n_in:
        parts.append(_sample_uniform_disc(cfg.n_ue - n_in, cfg.disc_radius_m, rng))
    return np.vstack(parts)


def associate_many(xy: np.ndarray, layout: Layout,
                   bias_db: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized association: returns (bs_index, user_type, received_power_w).

    Argmax of the bias-scaled received power; exact biased-power ties go to
    the micro tier (lowest index among equal micros).  A micro winner is a
    direct user when its unbiased power already matches or beats the macro.
    """
    d = np.hypot(xy[:, 0, None] - layout.positions[None, :, 0],
                 xy[:, 1, None] - layout.positions[None, :, 1])
    d = np.maximum(d, 1e-12)  # off-BS placement assumed; keep powers finite
    p_r = layout.powers_w[None, :] / d ** layout.exponents[None, :]
    p_macro = p_r[:, 0]
    best_micro = np.argmax(p_r[:, 1:], axis=1)
    p_best = p_r[np.arange(len(xy)), best_micro + 1]
    micro_wins = p_best * 10.0 ** (bias_db / 10.0) >= p_macro
    user_type = np.where(~micro_wins, UserType.MACRO,
                         np.where(p_best >= p_macro,
                                  UserType.DIRECT_MICRO, UserType.CRE))
    bs_index = np.where(micro_wins, best_micro + 1, 0)
    return bs_index, user_type, np.where(micro_wins, p_best, p_macro)


def associate(user_xy, layout: Layout, bias_db: float) -> tuple[int, UserType]:
    """Single-user association; see associate_many."""
    bs, zeta, _ = associate_many(np.asarray(user_xy, float).reshape(1, 2),
                                 layout, bias_db)
    return int(bs[0]), UserType(int(zeta[0]))


def make_drop(cfg: ScenarioConfig, rng: np.random.Generator) -> Drop:
    layout = build_scenario(cfg)
    xy = sample_users(cfg, layout, rng)
    bs, zeta, _ = associate_many(xy, layout, cfg.bias_db)
    return Drop(bs_positions=layout.positions, user_positions=xy,
                bs_index=bs, user_type=zeta)


def drop_to_csv(drop: Drop, path: str | Path) -> None:
    """One row per user: x, y, serving BS index, user type."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x_m", "y_m", "bs_index", "user_type"])
        for (x, y), b, z in zip(drop.user_positions, drop.bs_index, drop.user_type):
            wr.writerow([f"{x:.6f}", f"{y:.6f}", int(b), int(z)])
