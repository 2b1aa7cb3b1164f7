"""Statistics helpers for correlated time series: KS tests, block bootstrap,
autocorrelation times. Kept separate so both the field checks and the
experiment harness can import them without a cycle.
"""

import math

import numpy as np
from scipy.stats import kstest, ks_2samp

__all__ = [
    "ks_statistic",
    "two_sample_ks",
    "bootstrap_ci",
    "integrated_autocorrelation_time",
    "effective_sample_size",
]


def ks_statistic(samples, cdf):
    """One-sample KS statistic and p-value of samples against a callable CDF."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("KS test needs at least one sample")
    result = kstest(samples, cdf)
    return float(result.statistic), float(result.pvalue)


def two_sample_ks(a, b):
    """Two-sample KS statistic and p-value."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("KS test needs nonempty samples on both sides")
    result = ks_2samp(a, b)
    return float(result.statistic), float(result.pvalue)


def bootstrap_ci(rows, statistic, block_length=None, n_resamples=1000, seed=0):
    """Moving-block bootstrap 95 percent interval for a statistic of a series.

    rows is an (N,) or (N, K) array ordered in time; statistic maps such an
    array to a float. Blocks of the given length (default: ceil(N^{1/3}))
    are resampled with replacement and concatenated to length N, which
    preserves short-range correlation. Returns (low, high) percentiles at
    2.5 and 97.5. Fewer than 200 resamples is refused as too noisy for a
    95 percent interval.
    """
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    if n < 2:
        raise ValueError("bootstrap needs at least two rows")
    if n_resamples < 200:
        raise ValueError(f"need at least 200 resamples, got {n_resamples}")
    if block_length is None:
        block_length = max(1, math.ceil(n ** (1.0 / 3.0)))
    block_length = min(int(block_length), n)

    rng = np.random.default_rng(seed)
    n_blocks = math.ceil(n / block_length)
    starts_max = n - block_length + 1
    estimates = np.empty(n_resamples)
    for i in range(n_resamples):
        starts = rng.integers(0, starts_max, size=n_blocks)
        idx = (starts[:, None] + np.arange(block_length)[None, :]).ravel()[:n]
        estimates[i] = statistic(rows[idx])
    return float(np.percentile(estimates, 2.5)), float(np.percentile(estimates, 97.5))


def integrated_autocorrelation_time(series, c=6.0):
    """Integrated autocorrelation time with automatic windowing.

    Normalized autocovariances come from one FFT; the window W is the first
    lag with W >= c * tau_int(W), the usual self-consistent truncation. The
    result is at least 0.5 (the value for white noise) and is capped by the
    series length.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 4:
        raise ValueError("autocorrelation time needs at least 4 points")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return 0.5

    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acf = np.fft.irfft(f * np.conjugate(f), size)[:n].real
    acf /= acf[0]

    tau = 0.5
    for w in range(1, n):
        tau += acf[w]
        if w >= c * tau:
            break
    return float(max(tau, 0.5))


def effective_sample_size(series):
    """N / (2 tau_int), the number of effectively independent samples."""
    x = np.asarray(series, dtype=float).ravel()
    tau = integrated_autocorrelation_time(x)
    return float(x.size / (2.0 * tau))
