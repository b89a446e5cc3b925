"""Sliding-window greedy coefficient-update filters (FEDS and FAP).

Each sample, the window of the L most recent desired values is approximated by
a combination of the M delayed-input columns x_j(n) = [x(n-j) .. x(n-j-L+1)].
P single-coefficient updates are applied per sample: FEDS walks the
coefficient index cyclically, FAP greedily picks the column with the largest
normalized projection onto the current residual.

All window inner products live in a GramCache advanced by O(M) sliding-window
recursions, and the residual correlations <e, x_j> are carried incrementally,
so a full step costs O(M) multiplications per P-iteration regardless of L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import AdaptiveFilter

SIGMA_MIN = 1e-12  # column-energy guard: weaker columns are never selected/updated


@dataclass
class SelectionResult:
    """Outcome of one coefficient selection."""

    index: int
    residual_corr: float  # <current residual, x_j> over the window
    norm_sq: float  # ||x_j||^2 over the window


@dataclass
class MultiplyCount:
    """Multiplication tally of one step (divisions count, sqrt does not).

    cache_update covers the sliding-window recursions for G and r plus the
    residual-correlation carry; p_iterations covers selection scores and
    coefficient updates; prediction is the output dot product. refresh holds
    the periodic from-scratch rebuild and is excluded from steady_state.
    """

    cache_update: int = 0
    p_iterations: int = 0
    prediction: int = 0
    refresh: int = 0

    @property
    def steady_state(self) -> int:
        return self.cache_update + self.p_iterations + self.prediction

    @property
    def total(self) -> int:
        return self.steady_state + self.refresh


class GramCache:
    """Windowed inner products G[k][j] = <x_k, x_j> and r[j] = <d, x_j>.

    The update exploits two exact identities of the boxcar window:

    * entry recursion: <x_k(n), x_j(n)> = <x_k(n-1), x_j(n-1)>
      + x(n-k) x(n-j) - x(n-k-L) x(n-j-L), applied to row k = 0 only;
    * diagonal shift: <x_k(n), x_j(n)> = <x_{k-1}(n-1), x_{j-1}(n-1)>
      verbatim for k, j >= 1, which costs no arithmetic.

    So G needs 2M multiplications per sample and r another 2M. Every
    refresh_interval samples both are rebuilt from raw history to cap the
    floating-point drift of the add/subtract telescoping in row 0.
    """

    def __init__(self, num_taps: int, window_len: int, refresh_interval: int = 1000):
        if num_taps < 1:
            raise ValueError(f"num_taps must be at least 1, got {num_taps}")
        if window_len <= num_taps:
            raise ValueError(
                f"requires L > M: window length L={window_len} must exceed filter order M={num_taps}"
            )
        if refresh_interval < 1:
            raise ValueError("refresh_interval must be at least 1")
        self.num_taps = num_taps
        self.window_len = window_len
        self.refresh_interval = refresh_interval
        self.G = np.zeros((num_taps, num_taps))
        self.r = np.zeros(num_taps)
        # x history depth M+L covers every lag the recursions touch (up to
        # x(n-(M-1)-L)); d history depth L+1 covers d(n-L).
        self.x_hist = np.zeros(num_taps + window_len)
        self.d_hist = np.zeros(window_len + 1)
        self._since_refresh = 0
        self.last_update_mults = 0
        self.last_refresh_mults = 0

    @property
    def x_window(self) -> np.ndarray:
        """Regressor at time n: x(n), x(n-1), ..., x(n-M+1)."""
        return self.x_hist[: self.num_taps]

    @property
    def x_leaving(self) -> np.ndarray:
        """Regressor at time n-L, the sample row leaving the window."""
        return self.x_hist[self.window_len : self.window_len + self.num_taps]

    @property
    def d_window(self) -> np.ndarray:
        """Desired window d(n), ..., d(n-L+1)."""
        return self.d_hist[: self.window_len]

    def update(self, x_new: float, d_new: float) -> bool:
        """Slide the window by one sample. Returns True when this call refreshed."""
        m, ell = self.num_taps, self.window_len
        xh, dh = self.x_hist, self.d_hist
        xh[1:] = xh[:-1]
        xh[0] = x_new
        dh[1:] = dh[:-1]
        dh[0] = d_new

        self._since_refresh += 1
        if self._since_refresh >= self.refresh_interval:
            self.refresh()
            return True

        new_col = xh[:m]  # x(n-j)
        old_col = xh[ell : ell + m]  # x(n-j-L)
        row0 = self.G[0] + x_new * new_col - xh[ell] * old_col
        self.G[1:, 1:] = self.G[:-1, :-1]
        self.G[0, :] = row0
        self.G[:, 0] = row0
        self.r += d_new * new_col - dh[ell] * old_col
        self.last_update_mults = 4 * m
        self.last_refresh_mults = 0
        return False

    def refresh(self) -> None:
        """Rebuild G and r from raw history, zeroing accumulated drift."""
        m, ell = self.num_taps, self.window_len
        cols = np.lib.stride_tricks.sliding_window_view(self.x_hist, ell)[:m]
        gram = cols @ cols.T
        # mirror the lower triangle so shared storage is bit-symmetric
        self.G = np.tril(gram) + np.tril(gram, -1).T
        self.r = cols @ self.d_window
        self._since_refresh = 0
        self.last_refresh_mults = m * m * ell + m * ell
        self.last_update_mults = 0


def residual_correlation(cache: GramCache, h: np.ndarray, j: int) -> float:
    """<residual, x_j> for filter h against the cached window: r[j] - sum_k h_k G[k][j]."""
    return float(cache.r[j] - np.dot(cache.G[:, j], h))


def _argmax_normalized(corr: np.ndarray, diag: np.ndarray, sigma_min: float):
    """Index maximizing |corr_j| / sqrt(diag_j) over columns with diag > sigma_min.

    Returns (index or None, number of valid columns); ties break to the
    lowest index.
    """
    valid = diag > sigma_min
    n_valid = int(np.count_nonzero(valid))
    if n_valid == 0:
        return None, 0
    scores = np.full(corr.shape, -np.inf)
    np.divide(np.abs(corr), np.sqrt(np.where(valid, diag, 1.0)), out=scores, where=valid)
    return int(np.argmax(scores)), n_valid


def select_fap(cache: GramCache, h: np.ndarray, sigma_min: float = SIGMA_MIN) -> SelectionResult:
    """Stateless greedy selection straight from the cache contents.

    Computes every residual correlation from r, G and h (O(M^2)); the
    streaming filter reaches the same answer through its carried
    residual-correlation vector.
    """
    corr = cache.r - cache.G @ h
    j, _ = _argmax_normalized(corr, cache.G.diagonal(), sigma_min)
    if j is None:
        return SelectionResult(0, 0.0, 0.0)
    return SelectionResult(j, float(corr[j]), float(cache.G[j, j]))


class FedsFapFilter(AdaptiveFilter):
    """Streaming FEDS/FAP filter with cached inner products.

    mode "feds" selects coefficients cyclically (the counter advances once
    per P-iteration, modulo M, across samples); mode "fap" selects the column
    with maximum |<e, x_j>| / ||x_j||. Both apply
    h_j += mu * <e, x_j> / ||x_j||^2 and keep the residual correlations
    consistent after every coefficient change.
    """

    def __init__(
        self,
        num_taps: int,
        window_len: int = 25,
        mu: float = 0.002,
        iterations: int = 8,
        mode: str = "fap",
        sigma_min: float = SIGMA_MIN,
        refresh_interval: int = 1000,
    ):
        if mode not in ("feds", "fap"):
            raise ValueError(f"mode must be 'feds' or 'fap', got {mode!r}")
        if iterations < 1:
            raise ValueError(f"iterations per sample must be at least 1 (P >= 1), got {iterations}")
        if mu <= 0.0:
            raise ValueError(f"mu must be positive, got {mu}")
        super().__init__(num_taps)
        self.mode = mode
        self.mu = mu
        self.iterations = iterations
        self.sigma_min = sigma_min
        self.cache = GramCache(num_taps, window_len, refresh_interval)
        self.c = np.zeros(num_taps)  # <residual, x_j> for the live h and window
        self.seq_counter = 0
        self.last_selections: list[SelectionResult] = []
        self.last_count = MultiplyCount()

    @property
    def name(self) -> str:  # type: ignore[override]
        return self.mode

    @property
    def multiply_count(self) -> MultiplyCount:
        """Exact multiplication tally of the most recent step."""
        return self.last_count

    def step(self, x_new, d_new):
        m = self.num_taps
        cache = self.cache
        d_new = float(d_new)
        count = MultiplyCount()
        self.last_count = count

        refreshed = cache.update(float(x_new), d_new)
        if refreshed:
            self.c = cache.r - cache.G @ self.h
            count.refresh = cache.last_refresh_mults + m * m
        else:
            # Carry the residual correlations across the window slide: only the
            # entering and leaving error samples change any <e, x_j>.
            xw = cache.x_window
            xo = cache.x_leaving
            e_in = d_new - float(np.dot(self.h, xw))
            e_out = float(cache.d_hist[cache.window_len]) - float(np.dot(self.h, xo))
            self.c += e_in * xw - e_out * xo
            count.cache_update = cache.last_update_mults + 4 * m

        self.last_selections = self.p_iterate()

        y = float(np.dot(self.h, cache.x_window))
        count.prediction = m
        return self._advance(y, d_new - y)

    def select_feds(self) -> SelectionResult:
        """Cyclic selection; advances the shared counter by one iteration."""
        j = self.seq_counter
        self.seq_counter = (j + 1) % self.num_taps
        return SelectionResult(j, float(self.c[j]), float(self.cache.G[j, j]))

    def select_fap(self) -> SelectionResult:
        """Greedy normalized-projection selection from the live residual correlations."""
        sel, n_valid = self._select_fap_counted()
        return sel

    def _select_fap_counted(self):
        j, n_valid = _argmax_normalized(self.c, self.cache.G.diagonal(), self.sigma_min)
        if j is None:
            return SelectionResult(0, 0.0, 0.0), 0
        return SelectionResult(j, float(self.c[j]), float(self.cache.G[j, j])), n_valid

    def p_iterate(self) -> list[SelectionResult]:
        """Apply P single-coefficient updates against the current window.

        Each applied update changes one h_j and subtracts delta * G[j] from
        the residual-correlation vector, so later iterations see the updated
        filter. Guarded selections (norm_sq <= sigma_min) are no-ops.
        """
        count = self.last_count
        selections = []
        for _ in range(self.iterations):
            if self.mode == "feds":
                sel = self.select_feds()
            else:
                sel, n_valid = self._select_fap_counted()
                count.p_iterations += n_valid
            selections.append(sel)
            if sel.norm_sq > self.sigma_min:
                delta = self.mu * sel.residual_corr / sel.norm_sq
                self.h[sel.index] += delta
                self.c -= delta * self.cache.G[sel.index]  # row == column: G symmetric
                count.p_iterations += self.num_taps + 2
        return selections
