"""Classical per-sample adaptive filters: LMS, NLMS, affine projection, RLS.

Pure single-step update functions operate on plain arrays; the filter classes
wrap them with a tapped delay line and a shared streaming interface
``step(x_new, d_new) -> (y, e)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class DivergenceError(RuntimeError):
    """Coefficients became non-finite; carries the offending sample index."""

    def __init__(self, sample_index: int, algorithm: str = "adaptive filter"):
        self.sample_index = sample_index
        self.algorithm = algorithm
        super().__init__(f"{algorithm} diverged at sample {sample_index}: non-finite coefficients")


class FactorizationError(RuntimeError):
    """The affine-projection block system could not be factorized."""


def predict(h: np.ndarray, x: np.ndarray) -> float:
    """Filter output y = sum_k h_k x(n-k) for a regressor ordered newest first."""
    return float(np.dot(h, x))


def lms_step(h, x, d, mu):
    """One LMS update: h' = h + mu * e * x with a priori error e = d - h.x."""
    y = float(np.dot(h, x))
    e = d - y
    return y, e, h + (mu * e) * x


def nlms_step(h, x, d, mu, delta=1e-8):
    """One NLMS update: h' = h + mu * e * x / (delta + ||x||^2).

    With delta = 0 and a zero regressor the update is defined as zero.
    """
    y = float(np.dot(h, x))
    e = d - y
    denom = delta + float(np.dot(x, x))
    if denom == 0.0:
        return y, e, h.copy()
    return y, e, h + (mu * e / denom) * x


def ap_step(h, x_block, d_block, mu, eps=1e-6):
    """One affine-projection update over the K most recent regressors.

    h' = h + mu X^T (eps I + X X^T)^{-1} (d_block - X h), where row i of
    x_block is the regressor at time n-i. The K x K system is solved with a
    Cholesky factorization; if that fails (eps = 0 and rank-deficient block)
    a FactorizationError is raised and no update is applied.
    """
    k, m = x_block.shape
    if k > m:
        warnings.warn(
            f"projection order K={k} exceeds filter length M={m}; the block solve may be ill conditioned",
            stacklevel=2,
        )
    y_vec = x_block @ h
    e_vec = d_block - y_vec
    gram = x_block @ x_block.T
    gram[np.diag_indices_from(gram)] += eps
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"block Gram factorization failed: {exc}") from exc
    gains = cho_solve(factor, e_vec, check_finite=False)
    return y_vec, e_vec, h + mu * (x_block.T @ gains)


@dataclass
class RlsState:
    """Inverse correlation estimate and the parameters that shaped it."""

    Pinv: np.ndarray
    forgetting: float
    delta_init: float


def rls_init(num_taps: int, forgetting: float = 0.99, delta_init: float = 1e3) -> RlsState:
    """Pinv(0) = delta_init * I, i.e. C(0) = (1/delta_init) * I."""
    if not 0.0 < forgetting <= 1.0:
        raise ValueError(f"forgetting factor must lie in (0, 1], got {forgetting}")
    if delta_init <= 0.0:
        raise ValueError(f"delta_init must be positive, got {delta_init}")
    return RlsState(delta_init * np.eye(num_taps), forgetting, delta_init)


def rls_step(h, state: RlsState, x, d):
    """One RLS update: h' = h + C^{-1}(n) x e with C(n) = lam C(n-1) + x x^T.

    C is kept in inverse form through the rank-one inverse-update identity;
    Pinv is re-symmetrized every step to pin down drift.
    """
    y = float(np.dot(h, x))
    e = d - y
    px = state.Pinv @ x
    denom = state.forgetting + float(np.dot(x, px))
    gain = px / denom
    pinv = (state.Pinv - np.outer(gain, px)) / state.forgetting
    pinv = 0.5 * (pinv + pinv.T)
    return y, e, h + e * gain, RlsState(pinv, state.forgetting, state.delta_init)


class AdaptiveFilter:
    """Streaming contract shared by all algorithms.

    A filter instance is single-threaded mutable state; h(0) = 0 and the
    input prehistory is treated as zero.
    """

    name = "base"

    def __init__(self, num_taps: int):
        if num_taps < 1:
            raise ValueError(f"num_taps must be at least 1, got {num_taps}")
        self.num_taps = num_taps
        self.h = np.zeros(num_taps)
        self.samples_seen = 0

    def step(self, x_new: float, d_new: float):
        raise NotImplementedError

    def _advance(self, y: float, e: float):
        if not np.all(np.isfinite(self.h)):
            raise DivergenceError(self.samples_seen, self.name)
        self.samples_seen += 1
        return y, e


class _TappedDelayFilter(AdaptiveFilter):
    """Base for algorithms driven by the plain length-M regressor window."""

    def __init__(self, num_taps: int):
        super().__init__(num_taps)
        self.window = np.zeros(num_taps)  # x(n) first, x(n-M+1) last

    def step(self, x_new, d_new):
        w = self.window
        w[1:] = w[:-1]
        w[0] = x_new
        y, e = self._update(float(d_new))
        return self._advance(y, e)


class LmsFilter(_TappedDelayFilter):
    name = "lms"

    def __init__(self, num_taps: int, mu: float = 0.002):
        if mu <= 0.0:
            raise ValueError(f"mu must be positive, got {mu}")
        super().__init__(num_taps)
        self.mu = mu

    def _update(self, d):
        y, e, self.h = lms_step(self.h, self.window, d, self.mu)
        return y, e


class NlmsFilter(_TappedDelayFilter):
    name = "nlms"

    def __init__(self, num_taps: int, mu: float = 0.005, delta: float = 1e-8):
        if mu <= 0.0:
            raise ValueError(f"mu must be positive, got {mu}")
        if delta < 0.0:
            raise ValueError(f"delta must be non-negative, got {delta}")
        super().__init__(num_taps)
        self.mu = mu
        self.delta = delta

    def _update(self, d):
        y, e, self.h = nlms_step(self.h, self.window, d, self.mu, self.delta)
        return y, e


class ApFilter(_TappedDelayFilter):
    name = "ap"

    def __init__(self, num_taps: int, mu: float = 0.005, proj_order: int = 2, eps: float = 1e-6):
        if mu <= 0.0:
            raise ValueError(f"mu must be positive, got {mu}")
        if proj_order < 1:
            raise ValueError(f"proj_order must be at least 1, got {proj_order}")
        if eps < 0.0:
            raise ValueError(f"eps must be non-negative, got {eps}")
        super().__init__(num_taps)
        self.mu = mu
        self.proj_order = proj_order
        self.eps = eps
        self.x_block = np.zeros((proj_order, num_taps))
        self.d_block = np.zeros(proj_order)
        self.failed_updates = 0

    def _update(self, d):
        self.x_block[1:] = self.x_block[:-1]
        self.x_block[0] = self.window
        self.d_block[1:] = self.d_block[:-1]
        self.d_block[0] = d
        try:
            y_vec, e_vec, self.h = ap_step(self.h, self.x_block, self.d_block, self.mu, self.eps)
        except FactorizationError:
            # Failure is reported via the counter; the step becomes a no-op update.
            self.failed_updates += 1
            y = predict(self.h, self.window)
            return y, d - y
        return float(y_vec[0]), float(e_vec[0])


class RlsFilter(_TappedDelayFilter):
    name = "rls"

    def __init__(self, num_taps: int, forgetting: float = 0.99, delta_init: float = 1e3):
        super().__init__(num_taps)
        self.state = rls_init(num_taps, forgetting, delta_init)

    def _update(self, d):
        y, e, self.h, self.state = rls_step(self.h, self.state, self.window, d)
        return y, e
