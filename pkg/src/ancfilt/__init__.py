"""Adaptive filters and a two-sensor noise cancellation harness."""

from .anc import ALGORITHMS, AlgoConfig, AncResult, SweepRow, make_filter, run_anc, smooth_mse, snr_db, sweep
from .feds_fap import FedsFapFilter, GramCache, MultiplyCount, SelectionResult, residual_correlation, select_fap
from .filters import (
    AdaptiveFilter,
    ApFilter,
    DivergenceError,
    FactorizationError,
    LmsFilter,
    NlmsFilter,
    RlsFilter,
    RlsState,
    ap_step,
    lms_step,
    nlms_step,
    predict,
    rls_init,
    rls_step,
)
from .signal_io import Signal, SynthSpec, WavFormatError, default_channel, read_wav, synth_anc_scenario, write_csv, write_wav

__version__ = "0.1.0"
