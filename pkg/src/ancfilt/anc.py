"""Two-sensor noise cancellation harness: run loop, SNR metrics, sweeps.

The filter sees the reference-sensor signal as its input and the primary
(signal + shaped noise) as its desired signal; the per-sample error is the
denoised output. The clean source, when available, is used for scoring only.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .feds_fap import FedsFapFilter, MultiplyCount
from .filters import (
    AdaptiveFilter,
    ApFilter,
    DivergenceError,
    LmsFilter,
    NlmsFilter,
    RlsFilter,
)
from .signal_io import Signal

ALGORITHMS = ("lms", "nlms", "ap", "rls", "feds", "fap")

# Per-algorithm defaults; step sizes 0.002 (LMS, FEDS, FAP) and 0.005
# (NLMS, AP), window 25, 8 iterations per sample, forgetting 0.99.
_DEFAULTS = {
    "lms": {"mu": 0.002},
    "nlms": {"mu": 0.005, "delta": 1e-8},
    "ap": {"mu": 0.005, "eps": 1e-6, "proj_order": 2},
    "rls": {"forgetting": 0.99, "delta_init": 1e3},
    "feds": {"mu": 0.002, "window_len": 25, "iterations": 8},
    "fap": {"mu": 0.002, "window_len": 25, "iterations": 8},
}

_SWEEPABLE = {"m": "num_taps", "l": "window_len", "mu": "mu", "p": "iterations"}


@dataclass
class AlgoConfig:
    """Algorithm selector plus every tunable knob.

    Only the fields relevant to the chosen algorithm are consulted; setting
    an irrelevant one earns a warning when the config is resolved.
    """

    algorithm: str
    num_taps: int = 8
    mu: float | None = None
    forgetting: float | None = None  # RLS lambda
    delta: float | None = None  # NLMS regularizer
    eps: float | None = None  # AP regularizer
    proj_order: int | None = None  # AP block depth K
    window_len: int | None = None  # FEDS/FAP window L
    iterations: int | None = None  # FEDS/FAP updates per sample P
    delta_init: float | None = None  # RLS Pinv scale
    seed: int = 0

    def __post_init__(self):
        self.algorithm = str(self.algorithm).lower()
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; valid: {', '.join(ALGORITHMS)}")
        if self.num_taps < 1:
            raise ValueError(f"num_taps must be at least 1, got {self.num_taps}")

    def resolved(self) -> "AlgoConfig":
        """Fill per-algorithm defaults, warn about irrelevant settings, validate."""
        defaults = _DEFAULTS[self.algorithm]
        values = {}
        for f in fields(self):
            if f.name in ("algorithm", "num_taps", "seed"):
                values[f.name] = getattr(self, f.name)
                continue
            current = getattr(self, f.name)
            if f.name in defaults:
                values[f.name] = defaults[f.name] if current is None else current
            else:
                if current is not None:
                    warnings.warn(
                        f"{f.name} is ignored for algorithm {self.algorithm!r}", stacklevel=2
                    )
                values[f.name] = None
        cfg = AlgoConfig(**values)
        if cfg.algorithm in ("feds", "fap") and cfg.window_len <= cfg.num_taps:
            raise ValueError(
                f"{cfg.algorithm} requires L > M (got L={cfg.window_len}, M={cfg.num_taps})"
            )
        if cfg.algorithm in ("feds", "fap") and cfg.iterations < 1:
            raise ValueError(f"iterations per sample must be at least 1, got {cfg.iterations}")
        if cfg.proj_order is not None and cfg.proj_order < 1:
            raise ValueError(f"proj_order must be at least 1, got {cfg.proj_order}")
        return cfg


def make_filter(config: AlgoConfig) -> AdaptiveFilter:
    cfg = config.resolved()
    if cfg.algorithm == "lms":
        return LmsFilter(cfg.num_taps, cfg.mu)
    if cfg.algorithm == "nlms":
        return NlmsFilter(cfg.num_taps, cfg.mu, cfg.delta)
    if cfg.algorithm == "ap":
        return ApFilter(cfg.num_taps, cfg.mu, cfg.proj_order, cfg.eps)
    if cfg.algorithm == "rls":
        return RlsFilter(cfg.num_taps, cfg.forgetting, cfg.delta_init)
    return FedsFapFilter(
        cfg.num_taps, cfg.window_len, cfg.mu, cfg.iterations, mode=cfg.algorithm
    )


@dataclass
class AncResult:
    """Everything one cancellation run produces."""

    denoised: Signal
    mse_curve: np.ndarray
    mse_smooth: np.ndarray
    coeff_trajectory: np.ndarray  # one row per snapshot
    snapshot_indices: np.ndarray
    snr_in: float | None
    snr_out: float | None
    snri: float | None
    multiply_counts: MultiplyCount | None = None


def snr_db(clean, contaminated, skip: int = 0) -> float:
    """10 log10 of clean power over (contaminated - clean) power from sample `skip` on."""
    clean = _samples(clean)
    contaminated = _samples(contaminated)
    if clean.size != contaminated.size:
        raise ValueError("clean and contaminated lengths differ")
    if not 0 <= skip < clean.size:
        raise ValueError(f"skip must lie in [0, {clean.size}), got {skip}")
    sig = clean[skip:]
    p_sig = float(np.mean(np.square(sig)))
    if p_sig == 0.0:
        raise ValueError("silent reference segment")
    p_noise = float(np.mean(np.square(contaminated[skip:] - sig)))
    if p_noise == 0.0:
        return float("inf")
    return 10.0 * np.log10(p_sig / p_noise)


def smooth_mse(curve, window: int) -> np.ndarray:
    """Centered moving average with edges truncated to the available samples."""
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    curve = np.asarray(curve, dtype=np.float64)
    if window == 1:
        return curve.copy()
    kernel = np.ones(window)
    sums = np.convolve(curve, kernel, mode="same")
    counts = np.convolve(np.ones_like(curve), kernel, mode="same")
    return sums / counts


def run_anc(
    config: AlgoConfig,
    primary: Signal,
    reference: Signal,
    clean: Signal | None = None,
    snapshot_every: int = 100,
    smooth_window: int = 501,
    out_skip_fraction: float = 0.1,
) -> AncResult:
    """Run one adaptive noise cancellation pass.

    The reference feeds the filter input, the primary is its desired signal,
    and e(n) = primary(n) - y(n) is the denoised output. SNRs are measured
    against clean when given: snr_in over the whole file, snr_out skipping
    the first out_skip_fraction so the convergence transient does not
    dominate. Divergence aborts with the failing sample index.
    """
    if len(primary) != len(reference):
        raise ValueError(f"primary/reference length mismatch: {len(primary)} vs {len(reference)}")
    if clean is not None and len(clean) != len(primary):
        raise ValueError(f"clean/primary length mismatch: {len(clean)} vs {len(primary)}")

    filt = make_filter(config)
    x = reference.samples
    d = primary.samples
    n = x.size
    denoised = np.empty(n)
    snaps = []
    snap_idx = []
    step = filt.step
    for i in range(n):
        _, e = step(x[i], d[i])
        denoised[i] = e
        if i % snapshot_every == 0:
            snaps.append(filt.h.copy())
            snap_idx.append(i)

    mse = np.square(denoised)
    snr_in = snr_out = snri = None
    if clean is not None:
        snr_in = snr_db(clean.samples, d, skip=0)
        snr_out = snr_db(clean.samples, denoised, skip=int(n * out_skip_fraction))
        snri = snr_out - snr_in
    counts = filt.multiply_count if isinstance(filt, FedsFapFilter) else None
    return AncResult(
        denoised=Signal(denoised, primary.sample_rate),
        mse_curve=mse,
        mse_smooth=smooth_mse(mse, min(smooth_window, n)),
        coeff_trajectory=np.array(snaps),
        snapshot_indices=np.array(snap_idx),
        snr_in=snr_in,
        snr_out=snr_out,
        snri=snri,
        multiply_counts=counts,
    )


@dataclass
class SweepRow:
    value: float
    snri: float | None
    snr_out: float | None
    error: str | None = None


def sweep(
    base: AlgoConfig,
    param: str,
    values,
    primary: Signal,
    reference: Signal,
    clean: Signal,
    max_workers: int = 1,
) -> list[SweepRow]:
    """Run one cancellation per value of `param` over the identical scenario.

    Rows come back in input order; invalid configurations or diverging runs
    are recorded on their row instead of aborting the sweep.
    """
    if param not in _SWEEPABLE:
        raise ValueError(f"unknown sweep parameter {param!r}; valid: {', '.join(_SWEEPABLE)}")
    values = list(values)
    if not values:
        raise ValueError("sweep values must be nonempty")
    field_name = _SWEEPABLE[param]

    def one(value) -> SweepRow:
        cast = float(value) if param == "mu" else int(value)
        try:
            cfg = replace(base, **{field_name: cast})
            result = run_anc(cfg, primary, reference, clean)
        except (ValueError, DivergenceError) as exc:
            return SweepRow(float(value), None, None, str(exc))
        return SweepRow(float(value), result.snri, result.snr_out)

    if max_workers <= 1:
        return [one(v) for v in values]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, values))


def _samples(x) -> np.ndarray:
    if isinstance(x, Signal):
        return x.samples
    return np.asarray(x, dtype=np.float64)
