"""Return vs. magnitude lambda_L(dt) curves on a synthetic global-factor panel.

    python scripts/lag_spectrum.py --scenario scripts/scenarios/gfm_n48_t10000.json --out runs/spectrum
"""

import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from tlrmt import (
    GfmScenario,
    decompose,
    fit_power_law,
    generate,
    lambda_curve,
    noise_panel,
    residual_spectrum,
    standardize,
    to_magnitudes,
)


@dataclass
class SpectrumRun:
    scenario: str
    out: str = "runs/spectrum"
    max_lag: int = 100
    noise_replicates: int = 20
    workers: int = 4


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", required=True)
    ap.add_argument("--out", default=SpectrumRun.out)
    ap.add_argument("--max-lag", type=int, default=SpectrumRun.max_lag)
    ap.add_argument("--noise-replicates", type=int, default=SpectrumRun.noise_replicates)
    ap.add_argument("--workers", type=int, default=SpectrumRun.workers)
    run = SpectrumRun(**{k.replace("-", "_"): v for k, v in vars(ap.parse_args()).items()})

    out = Path(run.out)
    out.mkdir(parents=True, exist_ok=True)
    sample = generate(GfmScenario.load(run.scenario))
    lags = range(run.max_lag + 1)
    curves = {
        "returns": lambda_curve(sample.returns, lags, workers=run.workers),
        "magnitudes": lambda_curve(to_magnitudes(sample.returns), lags, source="magnitudes",
                                   workers=run.workers),
    }
    d = decompose(standardize(sample.returns))
    curves["residual_returns"] = residual_spectrum(d, lags, workers=run.workers)
    curves["residual_magnitudes"] = residual_spectrum(d, lags, magnitudes=True,
                                                      workers=run.workers)

    n, t = sample.returns.shape
    noise = np.array([lambda_curve(noise_panel(n, t, seed=s), lags, workers=run.workers).lambda_L
                      for s in np.random.SeedSequence(0).spawn(run.noise_replicates)])

    with open(out / "curves.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(["lag", *curves, "noise_mean", "noise_std"]) + "\n")
        for k, lag in enumerate(lags):
            row = [c.lambda_L[k] for c in curves.values()]
            row += [noise[:, k].mean(), noise[:, k].std(ddof=1)]
            fh.write(f"{lag}," + ",".join(f"{v:.10g}" for v in row) + "\n")

    fits = {name: fit_power_law(c, (1, run.max_lag)).to_dict()
            for name, c in curves.items() if (c.lambda_L[1:] > 0).all()}
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump({"run": asdict(run), "fits": fits,
                   "lambda_0": {k: float(c.lambda_L[0]) for k, c in curves.items()}},
                  fh, indent=2)
    for name, f in fits.items():
        print(f"{name:20s} exponent {f['exponent']:.3f}  r2 {f['r_squared']:.3f}")


if __name__ == "__main__":
    main()
