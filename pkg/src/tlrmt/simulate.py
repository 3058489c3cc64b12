"""Synthetic panels: global-factor-model scenarios and i.i.d. noise baselines.

Returns follow ``R[i, t] = mu[i] + b[i] * M[t] + eps[i, t]`` with ``M`` a
GJR-GARCH(1,1) path and Gaussian residuals independent across series.
Holiday cells have their return overwritten by 0 (price carried forward).
Returns are in the units of the factor parameters (percent for the default
coefficients); prices are ``100 * exp(return_unit * cumsum(R))``, so
``to_returns(prices) == return_unit * R``.

Scenario files are JSON. Per-series fields (``mu``, ``b``, ``sigma_eps``,
``holiday_prob``) accept a scalar, a list of length ``n`` or a draw spec
``{"uniform": [lo, hi], "zero": k}`` (``zero`` sets the last ``k`` entries
to 0). Draws use the scenario seed, so a file pins the panel exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta

import numpy as np

from tlrmt.garch import REFERENCE_PARAMS, GjrGarchParams, simulate_gjr
from tlrmt.panel import PricePanel, ReturnPanel

SCENARIO_VERSION = 1
START_DATE = date(1999, 1, 4)


def business_days(count: int, start: date = START_DATE) -> list[str]:
    out, d = [], start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += timedelta(days=1)
    return out


def _resolve(spec, n: int, rng: np.random.Generator, name: str) -> np.ndarray:
    if isinstance(spec, dict):
        lo, hi = spec["uniform"]
        v = rng.uniform(lo, hi, n)
        k = int(spec.get("zero", 0))
        if k:
            v[n - k:] = 0.0
        return v
    v = np.broadcast_to(np.asarray(spec, dtype=float), (n,)).copy()
    if v.shape != (n,):
        raise ValueError(f"{name}: expected {n} values")
    return v


@dataclass
class GfmScenario:
    n: int
    t: int
    mu: object = 0.0
    b: object = 1.0
    sigma_eps: object = 1.0
    factor_params: GjrGarchParams = REFERENCE_PARAMS
    holiday_prob: object = 0.0
    seed: int = 0
    return_unit: float = 0.01
    version: int = SCENARIO_VERSION

    def __post_init__(self):
        if isinstance(self.factor_params, dict):
            self.factor_params = GjrGarchParams(**self.factor_params)
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.t < 100:
            raise ValueError(f"need t >= 100, got {self.t}")

    def resolved(self) -> dict[str, np.ndarray]:
        """Per-series arrays; draws come from a dedicated child of the seed."""
        rng = np.random.default_rng(np.random.SeedSequence(self.seed).spawn(4)[3])
        out = {k: _resolve(getattr(self, k), self.n, rng, k)
               for k in ("mu", "b", "sigma_eps", "holiday_prob")}
        if not (out["sigma_eps"] > 0).all():
            raise ValueError("sigma_eps must be > 0")
        hp = out["holiday_prob"]
        if ((hp < 0) | (hp > 0.2)).any():
            raise ValueError("holiday_prob must lie in [0, 0.2]")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["factor_params"] = asdict(self.factor_params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GfmScenario":
        d = dict(d)
        version = d.pop("version", SCENARIO_VERSION)
        if version != SCENARIO_VERSION:
            raise ValueError(f"unsupported scenario version {version}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "GfmScenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class GfmSample:
    prices: PricePanel
    returns: ReturnPanel
    clean_returns: np.ndarray
    factor: np.ndarray
    factor_variance: np.ndarray
    residuals: np.ndarray
    params: dict = field(default_factory=dict)

    def true_correlations(self) -> np.ndarray:
        """Population lag-0 correlation matrix implied by the scenario."""
        b, s = self.params["b"], self.params["sigma_eps"]
        vm = self.params["factor_unconditional_variance"]
        cov = vm * np.outer(b, b) + np.diag(s**2)
        d = np.sqrt(np.diag(cov))
        return cov / np.outer(d, d)

    def true_factor_corr(self) -> np.ndarray:
        b, s = self.params["b"], self.params["sigma_eps"]
        vm = self.params["factor_unconditional_variance"]
        return b * np.sqrt(vm) / np.sqrt(b**2 * vm + s**2)


def generate(scenario: GfmScenario) -> GfmSample:
    n, t = scenario.n, scenario.t
    ss = np.random.SeedSequence(scenario.seed).spawn(4)
    p = scenario.resolved()
    m, s2 = simulate_gjr(scenario.factor_params, t, rng=np.random.default_rng(ss[0]))
    eps = np.random.default_rng(ss[1]).standard_normal((n, t)) * p["sigma_eps"][:, None]
    clean = p["mu"][:, None] + np.outer(p["b"], m) + eps
    holiday = np.random.default_rng(ss[2]).random((n, t)) < p["holiday_prob"][:, None]
    r = np.where(holiday, 0.0, clean)
    steps = np.cumsum(r * scenario.return_unit, axis=1)
    logp = np.log(100.0) + np.concatenate([np.zeros((n, 1)), steps], axis=1)
    stamps = business_days(t + 1)
    names = [f"S{i:02d}" for i in range(n)]
    prices = PricePanel(names, stamps, np.exp(logp), np.zeros((n, t + 1), dtype=bool))
    returns = ReturnPanel(names, stamps[1:], r, holiday | (r == 0.0))
    vm = (scenario.factor_params.alpha0 / (1 - scenario.factor_params.persistence))
    params = dict(p, factor_unconditional_variance=vm)
    return GfmSample(prices, returns, clean, m, s2, eps, params)


def noise_panel(n: int, t: int, seed=None) -> ReturnPanel:
    """i.i.d. standard normal ``(n, t)`` panel, fully unmasked."""
    if t <= n:
        raise ValueError(f"need t > n, got n={n}, t={t}")
    x = np.random.default_rng(seed).standard_normal((n, t))
    return ReturnPanel([f"S{i:02d}" for i in range(n)], [str(k) for k in range(t)], x)
