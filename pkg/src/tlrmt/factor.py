"""Global factor estimation by PCA, RMT significance and factor diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats

from tlrmt.panel import PanelError, ReturnPanel, row_moments, to_magnitudes
from tlrmt.spectrum import DEFAULT_LAGS, SpectrumCurve, lambda_curve
from tlrmt.xcorr import Estimator, corr_matrix, wishart_bounds


@dataclass(frozen=True)
class StandardizedPanel:
    z: np.ndarray
    row_means: np.ndarray
    row_sigmas: np.ndarray
    mask: np.ndarray
    names: list[str]
    timestamps: list[str]

    @property
    def shape(self) -> tuple[int, int]:
        return self.z.shape


def standardize(panel: ReturnPanel) -> StandardizedPanel:
    """Zero mean, unit population std per row over unmasked cells; masked cells 0."""
    panel.require_usable()
    means, sigmas = row_moments(panel.values, panel.mask)
    flat = np.flatnonzero(~(sigmas > 0))
    if flat.size:
        raise PanelError(f"zero variance in series {panel.names[flat[0]]!r}")
    z = np.where(panel.mask, 0.0, (panel.values - means[:, None]) / sigmas[:, None])
    return StandardizedPanel(z, means, sigmas, panel.mask, panel.names, panel.timestamps)


def _orient(u: np.ndarray) -> np.ndarray:
    """Flip each column so its components sum positive; for a zero sum the
    first non-zero component is made positive."""
    u = u.copy()
    for k in range(u.shape[1]):
        s = u[:, k].sum()
        if abs(s) <= 1e-12 * np.abs(u[:, k]).sum():
            nz = np.flatnonzero(np.abs(u[:, k]) > 1e-12)
            s = u[nz[0], k] if nz.size else 1.0
        if s < 0:
            u[:, k] = -u[:, k]
    return u


@dataclass
class FactorDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pcs: np.ndarray
    loadings: np.ndarray
    residuals: np.ndarray
    n_significant: int
    lambda_plus: float
    corr: np.ndarray
    standardized: StandardizedPanel

    @property
    def global_factor(self) -> np.ndarray:
        return self.pcs[0]

    @property
    def names(self) -> list[str]:
        return self.standardized.names

    def residual_panel(self) -> ReturnPanel:
        sp = self.standardized
        return ReturnPanel(sp.names, sp.timestamps, self.residuals, sp.mask)

    def to_dict(self, threshold: float = 0.1) -> dict:
        shares = variance_shares(self)
        corr = factor_index_corr(self)
        return {
            "names": self.names,
            "eigenvalues": self.eigenvalues.tolist(),
            "lambda_plus": self.lambda_plus,
            "n_significant": self.n_significant,
            "shares": shares,
            "loadings": self.loadings.tolist(),
            "factor_index_correlations": corr.tolist(),
            "uncorrelated": screen_uncorrelated(corr, threshold, self.names),
            "uncorrelated_threshold": threshold,
        }

    def to_json(self, path, threshold: float = 0.1) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(threshold), fh, indent=2)


def decompose(z: StandardizedPanel, overlap: bool = False) -> FactorDecomposition:
    """Eigendecomposition of ``C = z z^T / T`` and the global-factor estimates.

    ``M_t`` is the first principal component ``u_1^T z_t``, loadings are
    ``sigma_i * u_1i`` and residuals ``sigma_i * (z_it - u_1i M_t)``. With
    ``overlap`` the correlation matrix is instead built by the mask-aware
    lag-0 estimator; the projections still use ``z``.
    """
    n, t = z.shape
    if n >= t:
        raise ValueError(f"need N < T, got N={n}, T={t}")
    if overlap:
        c = corr_matrix(ReturnPanel(z.names, z.timestamps, z.z, z.mask), 0,
                        Estimator.OVERLAP).values
        c = 0.5 * (c + c.T)
    else:
        c = z.z @ z.z.T / t
    try:
        w, u = np.linalg.eigh(c)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed on {n}x{n} matrix: {exc}") from exc
    order = np.argsort(w, kind="stable")[::-1]
    w, u = w[order], _orient(u[:, order])
    pcs = u.T @ z.z
    m = pcs[0]
    loadings = z.row_sigmas * u[:, 0]
    resid = z.row_sigmas[:, None] * (z.z - np.outer(u[:, 0], m))
    resid[z.mask] = 0.0
    lp = wishart_bounds(n, t).lambda_plus
    return FactorDecomposition(w, u, pcs, loadings, resid, int((w > lp).sum()), lp, c, z)


def variance_shares(d, trace: float | None = None, n_significant: int | None = None) -> dict:
    """Global-factor share of total variance and of the significant modes.

    ``d`` is a :class:`FactorDecomposition` or a descending eigenvalue
    sequence; for the latter pass ``trace`` and ``n_significant``.
    ``share_significant`` is omitted when nothing is significant.
    """
    if isinstance(d, FactorDecomposition):
        lam = d.eigenvalues
        trace = float(lam.sum()) if trace is None else trace
        k = d.n_significant if n_significant is None else n_significant
    else:
        lam = np.asarray(d, dtype=float)
        trace = float(lam.sum()) if trace is None else trace
        k = 0 if n_significant is None else n_significant
    out = {"share_total": float(lam[0] / trace)}
    if k >= 1:
        out["share_significant"] = float(lam[0] / lam[:k].sum())
    return out


def factor_index_corr(d: FactorDecomposition) -> np.ndarray:
    """Correlation of ``M_t`` with each series, ``sqrt(lambda_1) * u_1i``."""
    c = np.sqrt(max(d.eigenvalues[0], 0.0)) * d.eigenvectors[:, 0]
    return np.clip(c, -1.0, 1.0)


def screen_uncorrelated(correlations, threshold: float = 0.1, names=None) -> list:
    """Names (or indices) of series with ``|corr| < threshold``, weakest first."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    c = np.abs(np.asarray(correlations, dtype=float))
    idx = [int(i) for i in np.argsort(c, kind="stable") if c[i] < threshold]
    return idx if names is None else [names[i] for i in idx]


@dataclass
class AcfReport:
    lags: np.ndarray
    acf: np.ndarray
    ci_halfwidth: float
    ljung_box_stat: float
    ljung_box_pvalue: float
    ljung_box_depth: int

    @property
    def outside_ci(self) -> np.ndarray:
        return np.abs(self.acf[1:]) > self.ci_halfwidth


def acf(series, max_lag: int = 100, lb_depth: int = 20) -> AcfReport:
    """Sample ACF (biased, ``1/T`` normalised) with a 95% white-noise band and
    the Ljung-Box statistic at ``lb_depth`` lags."""
    x = np.asarray(series, dtype=float)
    t = x.size
    if max_lag >= t / 4:
        raise ValueError(f"max_lag {max_lag} must be < T/4 = {t / 4}")
    d = x - x.mean()
    c0 = d @ d / t
    if c0 == 0:
        raise ValueError("constant series")
    lags = np.arange(max_lag + 1)
    rho = np.array([1.0] + [d[:-k] @ d[k:] / t / c0 for k in lags[1:]])
    h = min(lb_depth, t - 1)
    full = rho if h <= max_lag else np.array([1.0] + [d[:-k] @ d[k:] / t / c0 for k in range(1, h + 1)])
    k = np.arange(1, h + 1)
    q = t * (t + 2) * np.sum(full[1:h + 1] ** 2 / (t - k))
    return AcfReport(lags, rho, 1.96 / np.sqrt(t), float(q), float(stats.chi2.sf(q, h)), h)


def residual_spectrum(d: FactorDecomposition, lags=DEFAULT_LAGS,
                      estimator=Estimator.UNIT_DIAGONAL, magnitudes: bool = False,
                      workers: int | None = None) -> SpectrumCurve:
    if not np.isfinite(d.residuals).all():
        raise ValueError("non-finite residuals")
    panel = d.residual_panel()
    if magnitudes:
        return lambda_curve(to_magnitudes(panel), lags, estimator, source="residual-magnitudes",
                            workers=workers)
    return lambda_curve(panel, lags, estimator, source="residuals", workers=workers)
