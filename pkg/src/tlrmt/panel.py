"""Price/return panels: CSV ingestion, log returns and return magnitudes.

All panels are row-major ``(N, T)`` arrays: one row per series, one column
per time step. Non-trading cells (missing prices, exact-zero returns) are
tracked with a boolean mask and stored as 0 so that plain estimators see
"zeros left in" while mask-aware estimators can drop them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

CACHE_FORMAT = "tlrmt-panel-v1"


class PanelError(ValueError):
    """Raised for malformed panel input."""


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def _sort_key(label: str):
    try:
        return (0, float(label))
    except ValueError:
        pass
    try:
        return (1, date.fromisoformat(label).toordinal())
    except ValueError:
        return (2, label)


def check_increasing(timestamps: Sequence[str]) -> None:
    keys = [_sort_key(s) for s in timestamps]
    if len({k[0] for k in keys}) > 1:
        raise PanelError("non-monotone timestamps: mixed label types")
    for k, (a, b) in enumerate(zip(keys, keys[1:])):
        if not a < b:
            raise PanelError(
                f"non-monotone timestamps at row {k + 2}: "
                f"{timestamps[k]!r} then {timestamps[k + 1]!r}"
            )


@dataclass(frozen=True)
class PricePanel:
    names: list[str]
    timestamps: list[str]
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        missing = np.asarray(self.missing, dtype=bool)
        if values.ndim != 2 or values.shape != missing.shape:
            raise PanelError("values and missing mask must be matching 2-D arrays")
        n, t = values.shape
        if n < 2:
            raise PanelError(f"need at least 2 series, got {n}")
        if t < 3:
            raise PanelError(f"need at least 3 time points, got {t}")
        if len(self.names) != n or len(self.timestamps) != t:
            raise PanelError("names/timestamps do not match the value grid")
        bad = ~missing & ~(values > 0)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise PanelError(
                f"non-positive price {values[i, j]!r} for series {self.names[i]!r} "
                f"at {self.timestamps[j]!r}"
            )
        check_increasing(self.timestamps)
        values = np.where(missing, np.nan, values)
        _freeze(values, missing)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)
        object.__setattr__(self, "names", list(self.names))
        object.__setattr__(self, "timestamps", list(self.timestamps))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class ReturnPanel:
    """Log returns with a non-trading mask. ``values[i, t]`` is the return
    from price column ``t`` to ``t + 1``; masked cells hold exactly 0."""

    names: list[str]
    timestamps: list[str]
    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise PanelError("returns must be a 2-D array")
        mask = (
            np.zeros(values.shape, dtype=bool)
            if self.mask is None
            else np.array(self.mask, dtype=bool)
        )
        if mask.shape != values.shape:
            raise PanelError("mask shape does not match returns")
        if len(self.names) != values.shape[0] or len(self.timestamps) != values.shape[1]:
            raise PanelError("names/timestamps do not match the value grid")
        if not np.isfinite(values[~mask]).all():
            raise PanelError("non-finite value in unmasked cell")
        values[mask] = 0.0
        _freeze(values, mask)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "names", list(self.names))
        object.__setattr__(self, "timestamps", list(self.timestamps))

    @property
    def returns(self) -> np.ndarray:
        return self.values

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def require_usable(self, minimum: int = 2) -> None:
        """Raise unless every row has ``minimum`` unmasked cells."""
        short = np.flatnonzero((~self.mask).sum(axis=1) < minimum)
        if short.size:
            raise PanelError(
                f"series {self.names[short[0]]!r} has fewer than {minimum} unmasked cells"
            )

    def with_values(self, values: np.ndarray) -> "ReturnPanel":
        return ReturnPanel(self.names, self.timestamps, values, self.mask)


@dataclass(frozen=True)
class MagnitudePanel(ReturnPanel):
    """``|R - <R>|`` per series, mean over unmasked cells only."""

    def __post_init__(self):
        super().__post_init__()
        if (self.values < 0).any():
            raise PanelError("magnitudes must be non-negative")

    @property
    def magnitudes(self) -> np.ndarray:
        return self.values


@dataclass
class IngestConfig:
    zero_mask: bool = True
    delimiter: str = ","
    encoding: str = "utf-8"


def ingest_csv(path, config: IngestConfig | None = None) -> PricePanel:
    """Read a ``date,<name1>,...,<nameN>`` price CSV. Empty fields are missing."""
    config = config or IngestConfig()
    path = Path(path)
    if not path.is_file():
        raise PanelError(f"{path}: no such file")
    with path.open(newline="", encoding=config.encoding) as fh:
        rows = list(csv.reader(fh, delimiter=config.delimiter))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise PanelError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    names = [h.strip() for h in header[1:]]
    if len(names) < 2:
        raise PanelError(f"{path}: fewer than 2 series in header")
    if len(body) < 3:
        raise PanelError(f"{path}: need at least 3 data rows, got {len(body)}")

    n, t = len(names), len(body)
    values = np.full((n, t), np.nan)
    missing = np.zeros((n, t), dtype=bool)
    stamps = []
    for j, row in enumerate(body):
        line = j + 2
        if len(row) != n + 1:
            raise PanelError(f"{path}:{line}: expected {n + 1} fields, got {len(row)}")
        stamps.append(row[0].strip())
        for i, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                missing[i, j] = True
                continue
            try:
                v = float(cell)
            except ValueError:
                raise PanelError(
                    f"{path}:{line}: non-numeric value {cell!r} in column {names[i]!r}"
                ) from None
            if not (v > 0 and math.isfinite(v)):
                raise PanelError(
                    f"{path}:{line}: non-positive price {cell} in column {names[i]!r} "
                    f"(row {line}, column {i + 2})"
                )
            values[i, j] = v
    try:
        check_increasing(stamps)
    except PanelError as exc:
        raise PanelError(f"{path}: {exc}") from None
    return PricePanel(names, stamps, values, missing)


def to_returns(panel: PricePanel, zero_mask: bool = True) -> ReturnPanel:
    """Log returns ``ln S[t+1] - ln S[t]``.

    A missing price masks both returns that touch it. With ``zero_mask`` set,
    exact-zero returns are treated as non-trading days and masked too.
    """
    logs = np.log(np.where(panel.missing, 1.0, panel.values))
    r = np.diff(logs, axis=1)
    mask = panel.missing[:, 1:] | panel.missing[:, :-1]
    if zero_mask:
        mask |= r == 0.0
    r[mask] = 0.0
    return ReturnPanel(panel.names, panel.timestamps[1:], r, mask)


def to_magnitudes(panel: ReturnPanel) -> MagnitudePanel:
    panel.require_usable()
    live = ~panel.mask
    counts = live.sum(axis=1)
    means = (panel.values * live).sum(axis=1) / counts
    mags = np.where(live, np.abs(panel.values - means[:, None]), 0.0)
    return MagnitudePanel(panel.names, panel.timestamps, mags, panel.mask)


def row_moments(values: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and std of each row over unmasked cells."""
    live = ~mask
    counts = live.sum(axis=1)
    means = np.where(live, values, 0.0).sum(axis=1) / counts
    dev = np.where(live, values - means[:, None], 0.0)
    return means, np.sqrt((dev**2).sum(axis=1) / counts)


# -- cache / CSV serialization ------------------------------------------------


def save_cache(path, prices: PricePanel | None, returns: ReturnPanel, zero_mask: bool = True):
    """Write a self-describing ``.npz`` cache (see README for the layout)."""
    payload = dict(
        format=np.array(CACHE_FORMAT),
        names=np.array(returns.names, dtype=str),
        return_timestamps=np.array(returns.timestamps, dtype=str),
        returns=returns.values,
        return_mask=returns.mask,
        zero_mask=np.array(zero_mask),
    )
    if prices is not None:
        payload.update(
            price_timestamps=np.array(prices.timestamps, dtype=str),
            prices=np.where(prices.missing, 0.0, prices.values),
            price_missing=prices.missing,
        )
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_cache(path) -> tuple[PricePanel | None, ReturnPanel]:
    with np.load(path, allow_pickle=False) as z:
        if str(z["format"]) != CACHE_FORMAT:
            raise PanelError(f"{path}: unknown cache format {str(z['format'])!r}")
        names = [str(s) for s in z["names"]]
        returns = ReturnPanel(
            names, [str(s) for s in z["return_timestamps"]], z["returns"], z["return_mask"]
        )
        prices = None
        if "prices" in z:
            prices = PricePanel(
                names, [str(s) for s in z["price_timestamps"]], z["prices"], z["price_missing"]
            )
    return prices, returns


def fmt(x: float) -> str:
    return f"{x:.12g}"


def write_panel_csv(path, names, timestamps, values, mask=None, label="date"):
    """Write an ``(N, T)`` grid as ``date,<names>`` rows; masked cells left empty."""
    values = np.asarray(values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([label, *names])
        for j, stamp in enumerate(timestamps):
            col = values[:, j]
            if mask is None:
                w.writerow([stamp, *(fmt(v) for v in col)])
            else:
                w.writerow([stamp, *("" if m else fmt(v) for v, m in zip(col, mask[:, j]))])


def read_series_csv(path, column: str | None = None) -> tuple[list[str], np.ndarray]:
    """Read one numeric column (default: the first after the label column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    k = 1 if column is None else header.index(column)
    try:
        vals = np.array([float(r[k]) for r in body])
    except (ValueError, IndexError) as exc:
        raise PanelError(f"{path}: bad value in column {header[k]!r}: {exc}") from None
    return [r[0] for r in body], vals
