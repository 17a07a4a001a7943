"""Multifractal analysis toolkit for financial time series.

Core chain: load prices -> log returns -> MF-DFA fluctuation surface ->
generalized Hurst / mass-exponent / singularity spectra -> binomial-cascade
fit, with shuffled and AAFT-surrogate ensembles to locate the source of
multifractality, plus autocorrelation and tail-exponent diagnostics.
"""

__version__ = "0.1.0"

from .gbm import (
    GbmFitResult,
    GbmParams,
    delta_alpha,
    fit_gbm,
    gbm_alpha,
    gbm_h,
    gbm_series,
    gbm_singularity,
    gbm_tau,
)
from .mfdfa import (
    DEFAULT_Q_GRID,
    DegenerateSegmentError,
    FluctuationSurface,
    MfdfaConfig,
    ProfileSeries,
    compute_profile,
    default_scale_grid,
    detrend_segment,
    fluctuation_at,
    fluctuation_surface,
    segment_variances,
)
from .series import (
    AnalysisPeriod,
    PriceSeries,
    ReturnSeries,
    load_price_csv,
    log_returns,
    normalize,
    prices_from_returns,
    slice_period,
    window_extrema,
)
from .spectra import (
    FitRange,
    HurstSpectrum,
    SingularitySpectrum,
    TauSpectrum,
    default_fit_range,
    hurst_spectrum,
    singularity_spectrum,
    spectrum_width,
    tau_from_h,
)
from .stats import (
    AcfResult,
    Ccdf,
    TailFit,
    autocorrelation,
    empirical_ccdf,
    tail_exponent,
)
from .surrogates import EnsembleSpec, RngStream, aaft, ensemble_hurst, shuffle
from .synth import ar1_fourier_noise, pareto_symmetric, white_noise
