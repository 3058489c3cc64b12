"""Singular-value spectra of lagged correlation matrices and power-law fits."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from tlrmt.panel import fmt
from tlrmt.xcorr import Estimator, LagCorrMatrix, corr_matrix

DEFAULT_LAGS = tuple(range(101))
DEFAULT_FIT_RANGE = (1, 100)


def svd_spectrum(c) -> np.ndarray:
    """Singular values of ``c`` in descending order.

    Computed as square roots of the eigenvalues of ``c.T @ c`` (symmetric
    eigensolver), clipped at zero.
    """
    m = c.values if isinstance(c, LagCorrMatrix) else np.asarray(c, dtype=float)
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    ev = np.linalg.eigvalsh(m.T @ m)
    return np.sqrt(np.clip(ev, 0.0, None))[::-1]


@dataclass
class SpectrumCurve:
    lags: list[int]
    lambda_L: np.ndarray
    source: str = "returns"
    full_spectra: list[np.ndarray] | None = None

    def value_at(self, lag: int) -> float:
        return float(self.lambda_L[self.lags.index(lag)])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lag", "lambda_L"])
            for lag, v in zip(self.lags, self.lambda_L):
                w.writerow([lag, fmt(v)])


def lambda_curve(panel, lags=DEFAULT_LAGS, estimator=Estimator.UNIT_DIAGONAL,
                 full: bool = False, source: str = "returns",
                 workers: int | None = None) -> SpectrumCurve:
    """Largest singular value of the lag-``dt`` correlation matrix for each lag."""
    lags = [int(l) for l in lags]
    if not lags:
        raise ValueError("empty lag grid")

    def one(lag):
        return svd_spectrum(corr_matrix(panel, lag, estimator))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            spectra = list(pool.map(one, lags))
    else:
        spectra = [one(lag) for lag in lags]
    top = np.array([s[0] for s in spectra])
    return SpectrumCurve(lags, top, source, spectra if full else None)


@dataclass
class PowerLawFit:
    exponent: float
    amplitude: float
    fit_range: tuple[int, int]
    r_squared: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit_range"] = list(self.fit_range)
        return d

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def fit_power_law(curve: SpectrumCurve, fit_range=DEFAULT_FIT_RANGE) -> PowerLawFit:
    """OLS of ``ln lambda_L`` on ``ln dt``; ``lambda_L ~ amplitude * dt**-exponent``."""
    lo, hi = fit_range
    lo = max(lo, 1)
    lags = np.asarray(curve.lags)
    sel = (lags >= lo) & (lags <= hi)
    if sel.sum() < 5:
        raise ValueError(f"need at least 5 lags in [{lo}, {hi}], got {int(sel.sum())}")
    y = np.asarray(curve.lambda_L, dtype=float)[sel]
    if (y <= 0).any():
        raise ValueError("non-positive lambda_L in fit range")
    x = np.log(lags[sel].astype(float))
    ly = np.log(y)
    xc = x - x.mean()
    slope = (xc @ (ly - ly.mean())) / (xc @ xc)
    intercept = ly.mean() - slope * x.mean()
    resid = ly - (intercept + slope * x)
    ss_tot = ((ly - ly.mean()) ** 2).sum()
    r2 = 1.0 if ss_tot == 0 else 1.0 - (resid @ resid) / ss_tot
    used = lags[sel]
    return PowerLawFit(float(-slope), float(np.exp(intercept)),
                       (int(used.min()), int(used.max())), float(min(max(r2, 0.0), 1.0)))
