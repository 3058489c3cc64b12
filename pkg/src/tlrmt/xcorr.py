"""Lagged cross-correlation matrices and Wishart noise reference."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from tlrmt.panel import PanelError, ReturnPanel, fmt

MIN_OVERLAP = 8


class Estimator(str, Enum):
    PLAIN = "plain"
    OVERLAP = "overlap-corrected"
    UNIT_DIAGONAL = "overlap-corrected-unit-diagonal"


@dataclass(frozen=True)
class LagCorrMatrix:
    """``values[i, j]`` correlates ``x_i(t)`` with ``x_j(t + lag)``."""

    lag: int
    values: np.ndarray
    estimator: Estimator
    overlap: np.ndarray
    names: list[str] | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def window(self) -> int:
        return int(self.overlap.max()) if self.overlap.size else 0

    @property
    def unreliable(self) -> np.ndarray:
        return self.overlap < MIN_OVERLAP

    def to_csv(self, path) -> None:
        names = self.names or [f"s{i}" for i in range(self.n)]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(["name", *names]) + "\n")
            for name, row in zip(names, self.values):
                fh.write(",".join([name, *(fmt(v) for v in row)]) + "\n")

    def envelope(self) -> dict:
        return {
            "lag": self.lag,
            "estimator": self.estimator.value,
            "names": self.names,
            "effective_overlap": self.overlap.tolist(),
            "unreliable_pairs": int(self.unreliable.sum()),
            "values": self.values.tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.envelope(), fh, indent=1)


@dataclass(frozen=True)
class WishartBounds:
    q: float
    lambda_plus: float
    lambda_minus: float
    sigma_w: float


def wishart_bounds(n: int, t: int) -> WishartBounds:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if t <= n:
        raise ValueError(f"need t > n for Q = t/n > 1 (n={n}, t={t})")
    q = t / n
    half = 2.0 * np.sqrt(1.0 / q)
    return WishartBounds(q, 1.0 + 1.0 / q + half, 1.0 + 1.0 / q - half, 1.0 / np.sqrt(t))


def _as_arrays(x) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, ReturnPanel):
        return x.values, x.mask
    values = np.asarray(x, dtype=float)
    return values, np.zeros(values.shape, dtype=bool)


def max_lag(t: int) -> int:
    return t // 4


def corr_matrix(x, lag: int = 0, estimator=Estimator.UNIT_DIAGONAL) -> LagCorrMatrix:
    """Cross-correlation matrix of ``x`` at ``lag``.

    ``plain`` is the Pearson correlation over the aligned window of length
    ``T - lag`` with masked zeros left in. The overlap-corrected estimators
    take each series' mean and std over its own unmasked cells in the window
    and average the centred cross-products over the ``T'`` points where both
    cells are unmasked. ``x`` may be a :class:`ReturnPanel` (or magnitude
    panel) or a bare ``(N, T)`` array treated as fully unmasked.
    """
    estimator = Estimator(estimator)
    values, mask = _as_arrays(x)
    if not np.isfinite(values).all():
        raise PanelError("non-finite panel values")
    n, t = values.shape
    if lag < 0 or lag > max_lag(t):
        raise ValueError(f"lag {lag} outside [0, {max_lag(t)}] for T={t}")
    w = t - lag
    lead, follow = values[:, :w], values[:, lag:]
    names = x.names if isinstance(x, ReturnPanel) else None

    if estimator is Estimator.PLAIN:
        a = lead - lead.mean(axis=1, keepdims=True)
        b = follow - follow.mean(axis=1, keepdims=True)
        sa, sb = np.sqrt((a**2).mean(axis=1)), np.sqrt((b**2).mean(axis=1))
        if (sa == 0).any() or (sb == 0).any():
            raise PanelError(f"zero-variance series at lag {lag}")
        c = (a @ b.T) / w / np.outer(sa, sb)
        overlap = np.full((n, n), w, dtype=int)
        return LagCorrMatrix(lag, c, estimator, overlap, names)

    la, lb = ~mask[:, :w], ~mask[:, lag:]
    ca, cb = la.sum(axis=1), lb.sum(axis=1)
    if (ca < 2).any() or (cb < 2).any():
        raise PanelError(f"series with fewer than 2 usable cells at lag {lag}")
    a = np.where(la, lead - (lead * la).sum(axis=1, keepdims=True) / ca[:, None], 0.0)
    b = np.where(lb, follow - (follow * lb).sum(axis=1, keepdims=True) / cb[:, None], 0.0)
    sa = np.sqrt((a**2).sum(axis=1) / ca)
    sb = np.sqrt((b**2).sum(axis=1) / cb)
    if (sa == 0).any() or (sb == 0).any():
        raise PanelError(f"zero-variance series at lag {lag}")
    overlap = la.astype(float) @ lb.T.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (a @ b.T) / overlap / np.outer(sa, sb)
    c[overlap == 0] = 0.0
    if estimator is Estimator.UNIT_DIAGONAL:
        np.fill_diagonal(c, 1.0)
    return LagCorrMatrix(lag, c, estimator, overlap.astype(int), names)


@dataclass(frozen=True)
class OffDiagHistogram:
    counts: np.ndarray
    edges: np.ndarray
    reference_std: float
    ks_distance: float
    ks_pvalue: float
    ks_critical_5pct: float
    n_entries: int

    @property
    def reference_pdf(self) -> np.ndarray:
        centers = 0.5 * (self.edges[1:] + self.edges[:-1])
        return stats.norm.pdf(centers, scale=self.reference_std)


def offdiag_histogram(c: LagCorrMatrix, bins: int = 50) -> OffDiagHistogram:
    """Histogram of upper-triangle entries vs. ``N(0, 1/sqrt(T_eff))``."""
    if c.n < 3:
        raise ValueError("need N >= 3")
    iu = np.triu_indices(c.n, k=1)
    entries = c.values[iu]
    t_eff = float(c.overlap[iu].mean())
    ref = 1.0 / np.sqrt(t_eff)
    lo, hi = entries.min(), entries.max()
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5 / bins, hi + 0.5 / bins
    counts, edges = np.histogram(entries, bins=bins, range=(lo, hi), density=True)
    ks = stats.kstest(entries, stats.norm(scale=ref).cdf)
    crit = stats.kstwo.ppf(0.95, entries.size)
    return OffDiagHistogram(counts, edges, ref, float(ks.statistic), float(ks.pvalue),
                            float(crit), entries.size)
