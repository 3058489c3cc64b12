"""Time-lag random matrix theory, global factor PCA and GJR-GARCH tools
for multivariate return panels."""

from tlrmt.panel import (
    MagnitudePanel,
    PanelError,
    PricePanel,
    ReturnPanel,
    IngestConfig,
    ingest_csv,
    to_magnitudes,
    to_returns,
)
from tlrmt.xcorr import Estimator, LagCorrMatrix, WishartBounds, corr_matrix, wishart_bounds
from tlrmt.spectrum import PowerLawFit, SpectrumCurve, fit_power_law, lambda_curve, svd_spectrum
from tlrmt.factor import (
    AcfReport,
    FactorDecomposition,
    StandardizedPanel,
    acf,
    decompose,
    factor_index_corr,
    residual_spectrum,
    screen_uncorrelated,
    standardize,
    variance_shares,
)
from tlrmt.garch import (
    GjrGarchFit,
    GjrGarchParams,
    fit_gjr,
    forecast_variance,
    simulate_gjr,
    unconditional_variance,
)
from tlrmt.simulate import GfmScenario, generate, noise_panel

__version__ = "0.1.0"
