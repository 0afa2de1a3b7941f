"""Coarse-graining baselines and the unsupervised re-identification probe.

fft_resample and ssa_decompose/ssa_reconstruct are the classical methods a
transformation is compared against; dtw_distance and knn_rank measure how
easily a user's transformed windows can be matched back to raw recordings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


class ParameterError(ValueError):
    """Argument outside the admissible range for the operation."""


class DegenerateOutputError(ValueError):
    """The requested output would have fewer than two samples."""


# ---------------------------------------------------------------------------
# FFT resampling

def fft_resample(series, from_hz: float, to_hz: float) -> np.ndarray:
    """Rate conversion in the frequency domain.

    The real spectrum is truncated (downsampling) or zero-padded (upsampling)
    and the inverse transform is rescaled by T'/T, which preserves the mean
    exactly and band-limited content up to the lower Nyquist frequency.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.size < 2:
        raise ParameterError("series must be 1-d with at least 2 samples")
    if from_hz <= 0 or to_hz <= 0:
        raise ParameterError("rates must be positive")
    T = series.size
    T_out = int(round(T * to_hz / from_hz))
    if T_out < 2:
        raise DegenerateOutputError(f"output length {T_out} is degenerate")
    spec = np.fft.rfft(series)
    out_spec = np.zeros(T_out // 2 + 1, dtype=complex)
    n_copy = min(spec.size, out_spec.size)
    out_spec[:n_copy] = spec[:n_copy]
    return np.fft.irfft(out_spec, n=T_out) * (T_out / T)


# ---------------------------------------------------------------------------
# singular spectrum analysis

@dataclass
class SsaDecomposition:
    components: np.ndarray     # [D, T], ordered by descending singular value
    singular_values: np.ndarray
    embedding_dim: int

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def ssa_decompose(series, embedding_dim: int) -> SsaDecomposition:
    """Additive decomposition via SVD of the Hankel trajectory matrix.

    Each singular triple (u, s, v) yields one elementary series by
    anti-diagonal averaging of the rank-1 matrix s * u v^T; the anti-diagonal
    sums of a rank-1 matrix are exactly the full convolution of u and v. The
    component sum reconstructs the input to floating-point accuracy.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ParameterError("series must be 1-d")
    T = series.size
    L = int(embedding_dim)
    if not 2 <= L <= T // 2:
        raise ParameterError(f"embedding dim {L} outside [2, {T // 2}] for length {T}")
    K = T - L + 1
    idx = np.arange(L)[:, None] + np.arange(K)[None, :]
    trajectory = series[idx]                       # [L, K] Hankel
    u, s, vt = np.linalg.svd(trajectory, full_matrices=False)
    counts = np.minimum.reduce([np.arange(1, T + 1), np.full(T, L),
                                np.full(T, K), np.arange(T, 0, -1)])
    components = np.empty((s.size, T))
    for i in range(s.size):
        components[i] = s[i] * np.convolve(u[:, i], vt[i]) / counts
    return SsaDecomposition(components, s, L)


def ssa_reconstruct(dec: SsaDecomposition, k: int) -> np.ndarray:
    """Sum of the k leading components (k = D gives the original series)."""
    if not 1 <= k <= dec.n_components:
        raise ParameterError(f"k={k} outside [1, {dec.n_components}]")
    return dec.components[:k].sum(axis=0)


# ---------------------------------------------------------------------------
# dynamic time warping

@njit(cache=False)
def _dtw_kernel(a, b):
    n, m = a.size, b.size
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    prev[0] = 0.0
    for j in range(1, m + 1):
        prev[j] = np.inf
    for i in range(1, n + 1):
        cur[0] = np.inf
        ai = a[i - 1]
        for j in range(1, m + 1):
            d = ai - b[j - 1]
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d * d + best
        prev, cur = cur, prev
    return prev[m]


def dtw_distance(a, b) -> float:
    """Classic full-window DTW with squared-difference local cost."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
        raise ParameterError("inputs must be non-empty 1-d vectors")
    return float(_dtw_kernel(a, b))


def window_dtw(a_values, b_values) -> float:
    """Multi-channel distance: sum of per-channel DTW distances."""
    if a_values.shape[0] != b_values.shape[0]:
        raise ParameterError("windows must share the channel count")
    return sum(dtw_distance(a_values[c], b_values[c]) for c in range(a_values.shape[0]))


def knn_rank(target_user: str, transformed_windows, raw_windows,
             votes: int | None = None) -> int:
    """Rank of the true user in the DTW similarity ordering (0 = closest).

    Per-user similarity is the mean DTW distance from the target's
    transformed windows to that user's raw windows; `votes` caps how many
    transformed windows are compared (all by default). The target's own raw
    windows stay in the reference set.
    """
    by_user: dict[str, list] = {}
    for w in raw_windows:
        by_user.setdefault(w.user_id, []).append(w)
    if target_user not in by_user:
        raise ParameterError(f"user {target_user!r} absent from the raw reference set")
    if not transformed_windows:
        raise ParameterError("no transformed windows for the target user")
    probes = transformed_windows if votes is None else transformed_windows[:max(1, votes)]

    users = sorted(by_user)
    means = np.empty(len(users))
    for ui, user in enumerate(users):
        refs = by_user[user]
        total = 0.0
        for p in probes:
            for r in refs:
                total += window_dtw(p.values, r.values)
        means[ui] = total / (len(probes) * len(refs))
    order = np.argsort(means, kind="stable")
    return int(np.nonzero(order == users.index(target_user))[0][0])
