"""Command-line pipeline: ``tlrmt <subcommand> [options]``.

Stages talk through files in the output directory. Numeric CSV output uses
12 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from tlrmt import factor as fac
from tlrmt import garch as gj
from tlrmt.panel import (
    IngestConfig,
    PanelError,
    ingest_csv,
    load_cache,
    read_series_csv,
    save_cache,
    to_magnitudes,
    to_returns,
    write_panel_csv,
)
from tlrmt.simulate import GfmScenario, generate, noise_panel
from tlrmt.spectrum import fit_power_law, lambda_curve
from tlrmt.xcorr import Estimator, corr_matrix, offdiag_histogram, wishart_bounds

log = logging.getLogger("tlrmt")


@dataclass
class RunConfig:
    input: str | None = None
    out: str = "out"
    lags: str = "0:100"
    estimator: str = Estimator.UNIT_DIAGONAL.value
    fit_range: str = "1:100"
    significance: float = 0.05
    threshold: float = 0.1
    seed: int = 0
    zero_mask: bool = True
    workers: int = 1

    @property
    def lag_list(self) -> list[int]:
        return parse_lags(self.lags)

    @property
    def fit_bounds(self) -> tuple[int, int]:
        lo, hi = self.fit_range.split(":")
        return int(lo), int(hi)


def parse_lags(text: str) -> list[int]:
    """``"0:100"`` (inclusive range), ``"0:100:5"`` or ``"0,1,5,10"``."""
    text = str(text).strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        step = parts[2] if len(parts) == 3 else 1
        lags = list(range(parts[0], parts[1] + 1, step))
    else:
        lags = [int(p) for p in text.split(",") if p.strip()]
    if not lags:
        raise ValueError(f"empty lag grid {text!r}")
    return lags


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = RunConfig(**raw)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_returns(cfg: RunConfig):
    if not cfg.input:
        raise PanelError("--input is required")
    path = Path(cfg.input)
    if not path.is_file():
        raise PanelError(f"{path}: no such file")
    if path.suffix == ".npz":
        return load_cache(path)
    prices = ingest_csv(path)
    return prices, to_returns(prices, zero_mask=cfg.zero_mask)


def _dump(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_ingest(cfg: RunConfig, args) -> list[Path]:
    if not cfg.input:
        raise PanelError("--input is required")
    prices = ingest_csv(cfg.input, IngestConfig(zero_mask=cfg.zero_mask))
    returns = to_returns(prices, zero_mask=cfg.zero_mask)
    mags = to_magnitudes(returns)
    out = _outdir(cfg)
    paths = [out / "panel.npz", out / "returns.csv", out / "magnitudes.csv"]
    save_cache(paths[0], prices, returns, cfg.zero_mask)
    write_panel_csv(paths[1], returns.names, returns.timestamps, returns.values, returns.mask)
    write_panel_csv(paths[2], mags.names, mags.timestamps, mags.values, mags.mask)
    log.info("ingested %d series x %d prices, %d masked returns",
             *prices.shape, int(returns.mask.sum()))
    return paths


def cmd_spectrum(cfg: RunConfig, args) -> list[Path]:
    _, returns = _load_returns(cfg)
    mags = to_magnitudes(returns)
    out = _outdir(cfg)
    paths = []
    for label, panel in (("returns", returns), ("magnitudes", mags)):
        curve = lambda_curve(panel, cfg.lag_list, cfg.estimator, source=label,
                             workers=cfg.workers)
        p = out / f"curve_{label}.csv"
        curve.to_csv(p)
        paths.append(p)
        try:
            fit = fit_power_law(curve, cfg.fit_bounds)
        except ValueError as exc:
            log.warning("no power-law fit for %s: %s", label, exc)
            continue
        p = out / f"fit_{label}.json"
        fit.to_json(p)
        paths.append(p)
    for lag in parse_lags(args.save_matrices) if args.save_matrices else []:
        for label, panel in (("returns", returns), ("magnitudes", mags)):
            c = corr_matrix(panel, lag, cfg.estimator)
            stem = out / f"corr_{label}_lag{lag}"
            c.to_csv(stem.with_suffix(".csv"))
            c.to_json(stem.with_suffix(".json"))
            paths += [stem.with_suffix(".csv"), stem.with_suffix(".json")]
    return paths


def cmd_factor(cfg: RunConfig, args) -> list[Path]:
    _, returns = _load_returns(cfg)
    d = fac.decompose(fac.standardize(returns), overlap=args.overlap)
    out = _outdir(cfg)
    m = d.global_factor
    paths = [out / "decomposition.json", out / "global_factor.csv", out / "residuals.csv",
             out / "acf.csv"]
    summary = d.to_dict(cfg.threshold)
    a_m = fac.acf(m, args.acf_lags, args.lb_depth)
    a_abs = fac.acf(np.abs(m), args.acf_lags, args.lb_depth)
    summary["acf"] = {
        "ci_halfwidth": a_m.ci_halfwidth,
        "ljung_box": {
            "depth": a_m.ljung_box_depth,
            "factor": {"stat": a_m.ljung_box_stat, "p_value": a_m.ljung_box_pvalue},
            "abs_factor": {"stat": a_abs.ljung_box_stat, "p_value": a_abs.ljung_box_pvalue},
        },
    }
    _dump(paths[0], summary)
    gj.write_path_csv(paths[1], {"M": m, "abs_M": np.abs(m)}, "date", returns.timestamps)
    write_panel_csv(paths[2], returns.names, returns.timestamps, d.residuals, returns.mask)
    gj.write_path_csv(paths[3], {"acf_M": a_m.acf, "acf_abs_M": a_abs.acf}, "lag")
    if args.residual_lags:
        lags = parse_lags(args.residual_lags)
        for label, mag in (("returns", False), ("magnitudes", True)):
            curve = fac.residual_spectrum(d, lags, cfg.estimator, magnitudes=mag,
                                          workers=cfg.workers)
            p = out / f"residual_curve_{label}.csv"
            curve.to_csv(p)
            paths.append(p)
    return paths


def cmd_garch(cfg: RunConfig, args) -> list[Path]:
    if not cfg.input:
        raise PanelError("--input is required")
    if not Path(cfg.input).is_file():
        raise PanelError(f"{cfg.input}: no such file")
    index, x = read_series_csv(cfg.input, args.column)
    if not args.no_demean:
        x = x - x.mean()
    fit = gj.fit_gjr(x)
    fc = gj.forecast_variance(fit, args.horizon)
    out = _outdir(cfg)
    paths = [out / "garch_fit.json", out / "conditional_volatility.csv", out / "forecast.csv"]
    fit.to_json(paths[0])
    gj.write_path_csv(paths[1], {"series": x, "sigma2": fit.cond_variance,
                                 "sigma": np.sqrt(fit.cond_variance)}, "date", index)
    gj.write_path_csv(paths[2], {"variance": fc, "volatility": np.sqrt(fc)}, "h",
                      range(1, args.horizon + 1))
    return paths


def cmd_simulate(cfg: RunConfig, args) -> list[Path]:
    if args.scenario:
        scenario = GfmScenario.load(args.scenario)
    else:
        scenario = GfmScenario(
            n=args.n, t=args.t,
            b={"uniform": [0.3, 1.2], "zero": args.zero_loadings},
            sigma_eps={"uniform": [1.0, 3.0]},
            holiday_prob=args.holiday_prob,
        )
    if args.seed is not None:
        scenario.seed = args.seed
    sample = generate(scenario)
    out = _outdir(cfg)
    paths = [out / "prices.csv", out / "returns.csv", out / "factor.csv", out / "scenario.json"]
    pp, rp = sample.prices, sample.returns
    write_panel_csv(paths[0], pp.names, pp.timestamps, pp.values)
    write_panel_csv(paths[1], rp.names, rp.timestamps, rp.values, rp.mask)
    gj.write_path_csv(paths[2], {"M": sample.factor, "sigma2": sample.factor_variance},
                      "date", rp.timestamps)
    resolved = scenario.to_dict()
    resolved["resolved"] = {k: np.asarray(v).tolist() for k, v in sample.params.items()}
    _dump(paths[3], resolved)
    return paths


def cmd_noise_baseline(cfg: RunConfig, args) -> list[Path]:
    lags = cfg.lag_list
    wb = wishart_bounds(args.n, args.t)
    curves, above, outside, ratios, ks_reject = [], 0, 0, [], 0
    seeds = np.random.SeedSequence(cfg.seed).spawn(args.replicates)
    for ss in seeds:
        panel = noise_panel(args.n, args.t, seed=ss)
        c0 = corr_matrix(panel, 0, Estimator.PLAIN)
        ev = np.linalg.eigvalsh(c0.values)
        above += int((ev > wb.lambda_plus).sum())
        outside += int(((ev > wb.lambda_plus) | (ev < wb.lambda_minus)).sum())
        h = offdiag_histogram(c0)
        iu = np.triu_indices(args.n, 1)
        ratios.append(c0.values[iu].std() * np.sqrt(args.t))
        ks_reject += h.ks_distance > h.ks_critical_5pct
        curves.append(lambda_curve(panel, lags, cfg.estimator).lambda_L)
    curves = np.array(curves)
    out = _outdir(cfg)
    paths = [out / "noise_baseline.csv", out / "noise_summary.json"]
    gj.write_path_csv(paths[0], {"mean": curves.mean(axis=0), "std": curves.std(axis=0, ddof=1)
                                 if len(curves) > 1 else np.zeros(len(lags))}, "lag", lags)
    total = args.replicates * args.n
    _dump(paths[1], {
        "n": args.n, "t": args.t, "replicates": args.replicates,
        "lambda_plus": wb.lambda_plus, "lambda_minus": wb.lambda_minus, "sigma_w": wb.sigma_w,
        "fraction_above_lambda_plus": above / total,
        "fraction_outside_band": outside / total,
        "offdiag_std_over_sigma_w": float(np.mean(ratios)),
        "ks_reject_fraction": ks_reject / args.replicates,
    })
    return paths


COMMANDS = {
    "ingest": cmd_ingest,
    "spectrum": cmd_spectrum,
    "factor": cmd_factor,
    "garch": cmd_garch,
    "simulate": cmd_simulate,
    "noise-baseline": cmd_noise_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--input", help="price CSV or ingest cache (.npz)")
    common.add_argument("--lags", help="lag grid, e.g. 0:100 or 0,1,5")
    common.add_argument("--estimator", choices=[e.value for e in Estimator])
    common.add_argument("--fit-range", dest="fit_range", help="power-law fit range lo:hi")
    common.add_argument("--threshold", type=float, help="uncorrelated-screen threshold")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tlrmt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="CSV prices -> returns cache")
    s.add_argument("--no-zero-mask", dest="zero_mask", action="store_const", const=False)

    s = sub.add_parser("spectrum", parents=[common], help="lambda_L(dt) curves + fits")
    s.add_argument("--no-zero-mask", dest="zero_mask", action="store_const", const=False)
    s.add_argument("--save-matrices", help="lags whose correlation matrices are exported")

    s = sub.add_parser("factor", parents=[common], help="PCA global factor")
    s.add_argument("--no-zero-mask", dest="zero_mask", action="store_const", const=False)
    s.add_argument("--acf-lags", type=int, default=100)
    s.add_argument("--lb-depth", type=int, default=20)
    s.add_argument("--overlap", action="store_true",
                   help="build C with the mask-aware estimator")
    s.add_argument("--residual-lags", help="also write residual lambda_L curves")

    s = sub.add_parser("garch", parents=[common], help="GJR-GARCH(1,1) fit + forecast")
    s.add_argument("--column", help="series column (default: first data column)")
    s.add_argument("--horizon", type=int, default=100)
    s.add_argument("--no-demean", action="store_true")

    s = sub.add_parser("simulate", parents=[common], help="global-factor-model panel")
    s.add_argument("--scenario", help="scenario JSON")
    s.add_argument("--n", type=int, default=48)
    s.add_argument("--t", type=int, default=2744)
    s.add_argument("--zero-loadings", type=int, default=10)
    s.add_argument("--holiday-prob", type=float, default=0.0)

    s = sub.add_parser("noise-baseline", parents=[common], help="i.i.d. noise reference")
    s.add_argument("--n", type=int, default=48)
    s.add_argument("--t", type=int, default=2744)
    s.add_argument("--replicates", type=int, default=100)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        paths = COMMANDS[args.command](cfg, args)
    except (PanelError, ValueError, gj.GarchError, OSError, np.linalg.LinAlgError) as exc:
        print(f"tlrmt {args.command}: error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
