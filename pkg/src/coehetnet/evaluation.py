"""Goodness-of-fit campaign, KPI extraction, and resource-split optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kolmogorov

from .analytic import AnalyticCdf, engine_for, mixture_cdf, percentile
from .config import ScenarioConfig
from .radio import total_network_power
from .simulator import run_drop

METRICS = ("rate", "se", "ee")
OBJECTIVES = ("r10", "se10", "ee10", "theta10", "theta50")


class TooFewSamplesError(ValueError):
    """The asymptotic KS p-value needs a minimum sample size."""


@dataclass(frozen=True)
class KsReport:
    mean_significance: float
    pass_ratio: float
    n_trials: int
    sample_size: int
    alpha: float = 0.05

    def as_dict(self) -> dict:
        return {"mean_significance": self.mean_significance,
                "pass_ratio": self.pass_ratio, "n_trials": self.n_trials,
                "sample_size": self.sample_size, "alpha": self.alpha}


@dataclass(frozen=True)
class KpiResult:
    r10_bps: float
    se10: float
    se50: float
    ee10: float
    ee50: float
    theta10: float = field(init=False)
    theta50: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta10", self.se10 * self.ee10)
        object.__setattr__(self, "theta50", self.se50 * self.ee50)

    def as_dict(self) -> dict:
        return {"r10_mbps": self.r10_bps / 1e6, "se10": self.se10,
                "se50": self.se50, "ee10": self.ee10, "ee50": self.ee50,
                "theta10": self.theta10, "theta50": self.theta50}


def ks_test(samples, cdf) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    The p-value uses the Kolmogorov survival function with the standard
    small-sample argument correction (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n < 8:
        raise TooFewSamplesError(f"need at least 8 samples, got {n}")
    f = np.clip(np.asarray(cdf(x), dtype=float), 0.0, 1.0)
    i = np.arange(1, n + 1)
    d = float(np.max(np.maximum(i / n - f, f - (i - 1) / n)))
    en = math.sqrt(n)
    p = float(kolmogorov((en + 0.12 + 0.11 / en) * d))
    return d, p


def sample_from_cdf(cdf: AnalyticCdf, n: int, rng: np.random.Generator,
                    iterations: int = 60) -> np.ndarray:
    """Inverse-transform samples from an analytic CDF (vectorized bisection)."""
    u = rng.uniform(0.0, 1.0, size=n)
    lo = np.zeros(n)
    hi = np.full(n, cdf.support_hint[1])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        ge = np.asarray(cdf.evaluator(mid)) >= u
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    return np.where(u <= cdf.atom_at_zero, 0.0, hi)


def ks_campaign_multi(cfg: ScenarioConfig, metrics=METRICS, n_trials: int = 400,
                      subsample: int = 100, base_seed: int | None = None,
                      alpha: float = 0.05, self_test: bool = False,
                      single_drop: bool = False,
                      exact_interference: bool = False) -> dict[str, KsReport]:
    """KS trials against the analytic mixtures, one fresh drop per trial.

    Each trial subsamples `subsample` users without replacement from a
    1000-user drop and tests every requested metric on the same drop.  With
    `self_test` the samples are drawn from the analytic CDF itself (null
    calibration); with `single_drop` all trials reuse the first drop.
    """
    cdfs = {m: mixture_cdf(cfg.bias_db, cfg.eta, cfg.rho, cfg, metric=m)
            for m in metrics}
    root = np.random.SeedSequence(cfg.rng_seed if base_seed is None else base_seed)
    streams = [np.random.default_rng(s) for s in root.spawn(n_trials)]
    pvals = {m: [] for m in metrics}
    passes = {m: 0 for m in metrics}
    drop = None
    for i in range(n_trials):
        rng = streams[i]
        if not self_test:
            if drop is None or not single_drop:
                drop = run_drop(cfg, rng, exact_interference=exact_interference)
            idx = rng.choice(len(drop.user_positions), subsample, replace=False)
        for m in metrics:
            if self_test:
                values = sample_from_cdf(cdfs[m], subsample, rng)
            else:
                values = drop.metric(m)[idx]
            _, p = ks_test(values, cdfs[m])
            pvals[m].append(p)
            passes[m] += p >= alpha
    return {m: KsReport(mean_significance=float(np.mean(pvals[m])),
                        pass_ratio=passes[m] / n_trials,
                        n_trials=n_trials, sample_size=subsample, alpha=alpha)
            for m in metrics}


def ks_campaign(cfg: ScenarioConfig, metric: str = "rate", n_trials: int = 400,
                subsample: int = 100, **kwargs) -> KsReport:
    return ks_campaign_multi(cfg, metrics=(metric,), n_trials=n_trials,
                             subsample=subsample, **kwargs)[metric]


def kpis(bias_db: float, eta: float, rho: float, cfg: ScenarioConfig) -> KpiResult:
    """Percentile KPIs of the analytic mixtures at one operating point."""
    cdf_rate = mixture_cdf(bias_db, eta, rho, cfg, metric="rate")
    cdf_se = mixture_cdf(bias_db, eta, rho, cfg, metric="se")
    cdf_ee = mixture_cdf(bias_db, eta, rho, cfg, metric="ee")
    return KpiResult(
        r10_bps=percentile(cdf_rate, 0.1),
        se10=percentile(cdf_se, 0.1), se50=percentile(cdf_se, 0.5),
        ee10=percentile(cdf_ee, 0.1), ee50=percentile(cdf_ee, 0.5),
    )


def _total_power_affine(eta_grid: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    p_on = total_network_power(0.0, cfg)
    p_slept = total_network_power(1.0, cfg)
    return p_on + (p_slept - p_on) * eta_grid


def _objective_grid(bias_db: float, cfg: ScenarioConfig, objective: str,
                    eta_grid: np.ndarray, rho_grid: np.ndarray) -> np.ndarray:
    """Objective surface over broadcast (eta, rho) arrays."""
    eng = engine_for(cfg, bias_db)
    mode = cfg.noise_bandwidth_mode
    args = dict(w_micro=cfg.w_micro, n_ue=cfg.n_ue, mode=mode)
    ptot = _total_power_affine(np.asarray(eta_grid, float), cfg)

    def q(metric, qq, **extra):
        return eng.quantile_grid(metric, qq, eta_grid, rho_grid, **args, **extra)

    if objective == "r10":
        return q("rate", 0.1)
    if objective == "se10":
        return q("se", 0.1)
    if objective == "ee10":
        return q("ee", 0.1, total_power_w=ptot)
    if objective == "theta10":
        return q("se", 0.1) * q("ee", 0.1, total_power_w=ptot)
    if objective == "theta50":
        return q("se", 0.5) * q("ee", 0.5, total_power_w=ptot)
    raise ValueError(f"unknown objective {objective!r}")


@dataclass(frozen=True)
class OptimizeResult:
    eta_star: float
    rho_star: float
    value: float
    objective: str
    etas: np.ndarray
    rhos: np.ndarray
    grid: np.ndarray          # shape (len(etas), len(rhos))

    def __iter__(self):
        return iter((self.eta_star, self.rho_star, self.value))


def optimize_grid(bias_db: float, cfg: ScenarioConfig, objective: str = "r10",
                  step: float = 0.01) -> OptimizeResult:
    """Exhaustive search over the (eta, rho) grid; ties go to the smallest
    eta, then the smallest rho."""
    if not 0.0 < step <= 0.5:
        raise ValueError("step must lie in (0, 0.5]")
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    n = int(round(1.0 / step))
    etas = np.round(np.linspace(0.0, 1.0, n + 1), 12)
    rhos = np.round(np.linspace(0.0, 1.0, n + 1), 12)
    ee_grid, rr_grid = np.meshgrid(etas, rhos, indexing="ij")
    grid = _objective_grid(bias_db, cfg, objective, ee_grid, rr_grid)
    best = grid.max()
    ties = np.argwhere(grid == best)
    i, j = min(map(tuple, ties))  # row-major: smallest eta first, then rho
    return OptimizeResult(eta_star=float(etas[i]), rho_star=float(rhos[j]),
                          value=float(best), objective=objective,
                          etas=etas, rhos=rhos, grid=grid)


def kpi_sweep(cfg: ScenarioConfig, bias_db: float, parameter: str,
              values: np.ndarray, objectives=OBJECTIVES) -> dict[str, np.ndarray]:
    """KPI curves along one resource parameter, the other held at the config value."""
    values = np.asarray(values, dtype=float)
    if parameter == "eta":
        eta_grid, rho_grid = values, np.full_like(values, cfg.rho)
    elif parameter == "rho":
        eta_grid, rho_grid = np.full_like(values, cfg.eta), values
    else:
        raise ValueError("parameter must be 'eta' or 'rho'")
    out = {parameter: values}
    eng = engine_for(cfg, bias_db)
    args = dict(w_micro=cfg.w_micro, n_ue=cfg.n_ue, mode=cfg.noise_bandwidth_mode)
    ptot = _total_power_affine(eta_grid, cfg)
    cache: dict[tuple, np.ndarray] = {}

    def q(metric, qq):
        key = (metric, qq)
        if key not in cache:
            extra = {"total_power_w": ptot} if metric == "ee" else {}
            cache[key] = eng.quantile_grid(metric, qq, eta_grid, rho_grid,
                                           **args, **extra)
        return cache[key]

    for obj in objectives:
        if obj == "r10":
            out[obj] = q("rate", 0.1)
        elif obj == "se10":
            out[obj] = q("se", 0.1)
        elif obj == "se50":
            out[obj] = q("se", 0.5)
        elif obj == "ee10":
            out[obj] = q("ee", 0.1)
        elif obj == "ee50":
            out[obj] = q("ee", 0.5)
        elif obj == "theta10":
            out[obj] = q("se", 0.1) * q("ee", 0.1)
        elif obj == "theta50":
            out[obj] = q("se", 0.5) * q("ee", 0.5)
        else:
            raise ValueError(f"unknown sweep objective {obj!r}")
    return out
