"""GJR-GARCH(1,1) with Gaussian innovations: simulation, MLE and forecasting.

    sigma2[t] = alpha0 + (alpha1 + gamma * 1{eps[t-1] < 0}) * eps[t-1]**2
                + beta1 * sigma2[t-1]
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, signal, stats
from scipy.special import expit, logit, softmax

from tlrmt.panel import fmt

MAX_PERSISTENCE = 0.9999


class GarchError(RuntimeError):
    """Optimizer failure or boundary solution."""


@dataclass(frozen=True)
class GjrGarchParams:
    alpha0: float
    alpha1: float
    beta1: float
    gamma: float

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        for k in ("alpha1", "beta1", "gamma"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be >= 0, got {getattr(self, k)}")

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1 + 0.5 * self.gamma

    @property
    def stationary(self) -> bool:
        return self.persistence < 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha0, self.alpha1, self.beta1, self.gamma])


REFERENCE_PARAMS = GjrGarchParams(alpha0=0.2486, alpha1=0.0170, beta1=0.8790, gamma=0.1591)
NAMES = ("alpha0", "alpha1", "beta1", "gamma")


def unconditional_variance(params: GjrGarchParams) -> float:
    p = params.persistence
    if p >= 1.0:
        raise ValueError(f"non-stationary parameters: persistence {p:.6g} >= 1")
    return params.alpha0 / (1.0 - p)


def simulate_gjr(params: GjrGarchParams, t: int, seed=None,
                 rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``(M, sigma2)`` of length ``t`` starting from the unconditional variance."""
    if t < 100:
        raise ValueError(f"need t >= 100, got {t}")
    s2 = unconditional_variance(params)
    rng = rng if rng is not None else np.random.default_rng(seed)
    eta = rng.standard_normal(t)
    m = np.empty(t)
    sigma2 = np.empty(t)
    a0, a1, b1, g = params.as_array()
    for k in range(t):
        sigma2[k] = s2
        m[k] = e = np.sqrt(s2) * eta[k]
        s2 = a0 + (a1 + (g if e < 0 else 0.0)) * e * e + b1 * s2
    return m, sigma2


def conditional_variance(series: np.ndarray, theta, sigma2_0: float) -> np.ndarray:
    """Variance filter. The shock term depends only on data, so the recursion
    is a first-order linear filter in ``sigma2``."""
    a0, a1, b1, g = theta
    e = np.asarray(series, dtype=float)
    shock = a0 + (a1 + g * (e[:-1] < 0)) * e[:-1] ** 2
    rest = signal.lfilter([1.0], [1.0, -b1], shock, zi=[b1 * sigma2_0])[0]
    return np.concatenate([[sigma2_0], rest])


def loglik(series: np.ndarray, theta, sigma2_0: float | None = None) -> float:
    e = np.asarray(series, dtype=float)
    s0 = e.var() if sigma2_0 is None else sigma2_0
    s2 = conditional_variance(e, theta, s0)
    if not (s2 > 0).all():
        return -np.inf
    return float(-0.5 * np.sum(np.log(2 * np.pi * s2) + e**2 / s2))


# persistence split: alpha1, beta1, gamma/2 are shares of p = expit(x1)
def _unpack(x) -> np.ndarray:
    a0 = np.exp(x[0])
    p = MAX_PERSISTENCE * expit(x[1])
    w = softmax([0.0, x[2], x[3]])
    return np.array([a0, p * w[0], p * w[1], 2.0 * p * w[2]])


def _pack(theta) -> np.ndarray:
    a0, a1, b1, g = theta
    shares = np.array([a1, b1, 0.5 * g])
    p = shares.sum()
    shares = np.clip(shares / p, 1e-8, None)
    return np.array([np.log(a0), logit(p / MAX_PERSISTENCE),
                     np.log(shares[1] / shares[0]), np.log(shares[2] / shares[0])])


def numerical_hessian(f, x, rel_step: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1e-2)
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k); ei[i] = h[i]
            ej = np.zeros(k); ej[j] = h[j]
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej))
            hess[i, j] = hess[j, i] = v / (4 * h[i] * h[j])
    return hess


@dataclass
class GjrGarchFit:
    params: GjrGarchParams
    cond_variance: np.ndarray
    loglik: float
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    innovations: np.ndarray
    last_shock: float
    start_loglik: float
    n_obs: int

    @property
    def persistence(self) -> float:
        return self.params.persistence

    def summary(self) -> dict:
        table = {}
        for k, name in enumerate(NAMES):
            table[name] = {
                "value": getattr(self.params, name),
                "std_error": float(self.std_errors[k]),
                "t_value": float(self.t_values[k]),
                "p_value": float(self.p_values[k]),
            }
        return table

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "std_errors": dict(zip(NAMES, map(float, self.std_errors))),
            "t_values": dict(zip(NAMES, map(float, self.t_values))),
            "p_values": dict(zip(NAMES, map(float, self.p_values))),
            "loglik": self.loglik,
            "persistence": self.persistence,
            "unconditional_variance": unconditional_variance(self.params),
            "n_obs": self.n_obs,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _start_values(e: np.ndarray) -> np.ndarray:
    # moment-matched: fixed shock/memory split, alpha0 from the sample variance
    v = e.var()
    a1, g, b1 = 0.05, 0.05, 0.85
    return np.array([v * (1 - a1 - b1 - g / 2), a1, b1, g])


def fit_gjr(series, sigma2_0: float | None = None) -> GjrGarchFit:
    """Gaussian MLE of GJR-GARCH(1,1).

    ``series`` must already be mean-removed. The first conditional variance
    is the sample variance. Standard errors come from the inverse of the
    numerically differentiated observed information in the natural
    parameter space.
    """
    e = np.asarray(series, dtype=float)
    if e.ndim != 1 or e.size < 500:
        raise ValueError(f"need a 1-D series with at least 500 points, got shape {e.shape}")
    if not np.isfinite(e).all():
        raise ValueError("series has non-finite values")
    s0 = e.var() if sigma2_0 is None else sigma2_0
    n = e.size

    def nll_natural(theta):
        return -loglik(e, theta, s0) / n

    def nll(x):
        v = nll_natural(_unpack(x))
        return v if np.isfinite(v) else 1e10

    start = _start_values(e)
    start_ll = loglik(e, start, s0)
    best = None
    for x0 in (_pack(start), _pack([e.var() * 0.05, 0.05, 0.9, 0.05])):
        res = optimize.minimize(nll, x0, method="BFGS", options={"gtol": 1e-7, "maxiter": 2000})
        res2 = optimize.minimize(nll, res.x, method="Nelder-Mead",
                                 options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
        if res2.fun < res.fun:
            res = res2
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun) or best.fun >= 1e10:
        raise GarchError(f"optimizer failed: {best.message}")
    theta = _unpack(best.x)
    if theta[1] + theta[2] + theta[3] / 2 > MAX_PERSISTENCE - 1e-7:
        raise GarchError(f"boundary solution: persistence {theta[1] + theta[2] + theta[3] / 2:.6f}")
    params = GjrGarchParams(*map(float, theta))

    hess = numerical_hessian(lambda th: -loglik(e, th, s0), theta)
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError as exc:
        raise GarchError(f"singular information matrix at {theta}") from exc
    se = np.sqrt(np.abs(np.diag(cov)))
    tv = theta / se
    pv = 2 * stats.norm.sf(np.abs(tv))
    s2 = conditional_variance(e, theta, s0)
    return GjrGarchFit(params, s2, loglik(e, theta, s0), se, tv, pv,
                       e / np.sqrt(s2), float(e[-1]), start_ll, n)


def forecast_variance(fit: GjrGarchFit, horizon: int) -> np.ndarray:
    """Expected conditional variance for steps ``1..horizon`` past the sample.

    Step 1 is exact given the last shock; later steps replace the leverage
    indicator by its mean 1/2, which assumes symmetric innovations.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return forecast_from_state(fit.params, fit.cond_variance[-1], fit.last_shock, horizon)


def forecast_from_state(params: GjrGarchParams, sigma2_last: float, eps_last: float,
                        horizon: int, indicator: float | None = None) -> np.ndarray:
    """``indicator`` overrides the realized leverage indicator of the last
    shock (``0.5`` gives the unconditional expectation)."""
    a0, a1, b1, g = params.as_array()
    ind = float(eps_last < 0) if indicator is None else indicator
    out = np.empty(horizon)
    out[0] = a0 + (a1 + g * ind) * eps_last**2 + b1 * sigma2_last
    p = params.persistence
    for h in range(1, horizon):
        out[h] = a0 + p * out[h - 1]
    return out


def write_path_csv(path, columns: dict[str, np.ndarray], index_name: str = "t", index=None):
    keys = list(columns)
    n = len(columns[keys[0]])
    index = range(n) if index is None else index
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([index_name, *keys])
        for k, i in enumerate(index):
            w.writerow([i, *(fmt(columns[c][k]) for c in keys)])
