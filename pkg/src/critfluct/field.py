"""Trigonometric test functions on the torus grid and the Gaussian covariance
check for the fast density modes.

The library is deliberately small: normalized cosine/sine modes with wavenumber
k <= 8 plus the constant. On those the inverse Laplacian is diagonal with
eigenvalue (2 pi k)^-2, so the predicted stationary covariance

    (1/4) <H, G> + (a/2) <H, (-Delta)^{-1} G>

is exact and needs no discretization. Empirical counterparts read the mode
columns of a SampleSeries and attach moving-block bootstrap intervals sized by
the integrated autocorrelation time.
"""

from dataclasses import dataclass
import math

import numpy as np

from critfluct.stats import (
    bootstrap_ci,
    effective_sample_size,
    integrated_autocorrelation_time,
)

__all__ = [
    "TestFunction",
    "test_function",
    "predicted_covariance",
    "empirical_field_statistics",
    "projection_check",
    "FieldStatistics",
]

MAX_WAVENUMBER = 8


@dataclass(frozen=True)
class TestFunction:
    """A test function tabulated on the n-site torus grid x/n.

    samples[x] = H(x/n); mean and l2_norm are grid averages, which coincide
    with the continuum integrals for these trigonometric modes.
    """

    kind: str
    k: int
    samples: np.ndarray
    l2_norm: float
    mean: float

    @property
    def n(self):
        return self.samples.size


def test_function(kind, k, n):
    """Build a normalized mode: sqrt2 cos(2 pi k x/n), sqrt2 sin(...), or 1.

    Wavenumbers are restricted to 1 <= k <= 8 with 2k < n so that the grid
    mode is exactly orthonormal (no aliasing).
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    x = np.arange(n, dtype=float) / n
    if kind == "constant":
        if k != 0:
            raise ValueError("constant mode must have k = 0")
        samples = np.ones(n)
    elif kind in ("cosine", "sine"):
        if not 1 <= k <= MAX_WAVENUMBER:
            raise ValueError(f"wavenumber must lie in [1, {MAX_WAVENUMBER}], got {k}")
        if 2 * k >= n:
            raise ValueError(f"mode k = {k} is aliased on {n} sites; need n > 2k")
        phase = 2.0 * math.pi * k * x
        samples = math.sqrt(2.0) * (np.cos(phase) if kind == "cosine" else np.sin(phase))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    mean = float(samples.mean())
    l2_norm = float(math.sqrt(np.mean(samples * samples)))
    return TestFunction(kind=kind, k=int(k), samples=samples, l2_norm=l2_norm, mean=mean)


def _fourier_inner_products(h, g):
    """Grid inner products <H,G> and <H, (-Delta)^{-1} G> via the real FFT.

    The grid average (1/n) sum H G equals sum over frequencies of weighted
    coefficient products; the inverse Laplacian divides frequency j by
    (2 pi j)^2 and kills j = 0.
    """
    n = h.size
    hh = np.fft.rfft(h) / n
    gg = np.fft.rfft(g) / n
    prod = (hh * np.conjugate(gg)).real
    weights = np.full(prod.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    inner = float(np.dot(weights, prod))
    j = np.arange(prod.size, dtype=float)
    with np.errstate(divide="ignore"):
        inv_lap = np.where(j > 0, 1.0 / (2.0 * math.pi * j) ** 2, 0.0)
    inner_lap = float(np.dot(weights * inv_lap, prod))
    return inner, inner_lap


def predicted_covariance(H, G, a):
    """Stationary covariance (1/4)<H,G> + (a/2)<H,(-Delta)^{-1}G>.

    Both functions must have zero mean; matching normalized modes of
    wavenumber k give 1/4 + a/(2 (2 pi k)^2), distinct modes give 0.
    """
    if H.n != G.n:
        raise ValueError(f"grid sizes differ: {H.n} vs {G.n}")
    if abs(H.mean) > 1e-12 or abs(G.mean) > 1e-12:
        raise ValueError("predicted covariance requires zero-mean test functions")
    if a < 0.0:
        raise ValueError(f"need a >= 0, got {a}")
    inner, inner_lap = _fourier_inner_products(H.samples, G.samples)
    return 0.25 * inner + 0.5 * a * inner_lap


@dataclass(frozen=True)
class FieldStatistics:
    """Empirical mode statistics: means and covariances with bootstrap CIs.

    mean_ci, cov_ci hold (low, high) pairs in the trailing axis. ess is the
    per-mode effective sample size; block_length is the bootstrap block.
    """

    mode_indices: tuple
    mean: np.ndarray
    mean_ci: np.ndarray
    cov: np.ndarray
    cov_ci: np.ndarray
    ess: np.ndarray
    block_length: int


def _mode_matrix(series, mode_indices):
    rows = np.asarray(series.rows, dtype=float)
    n_modes = rows.shape[1] - 2
    cols = []
    for k in mode_indices:
        if not 1 <= k <= n_modes:
            raise ValueError(
                f"mode index {k} out of range; series holds {n_modes} mode columns"
            )
        cols.append(rows[:, 1 + k])
    return np.column_stack(cols)


def empirical_field_statistics(series, mode_indices, n_resamples=400, seed=0):
    """Sample covariance of the requested mode columns with bootstrap CIs.

    mode_indices are 1-based positions into the series' mode columns. The
    bootstrap block length is four integrated autocorrelation times of the
    slowest requested mode. Fewer than 100 effective samples in any mode is
    an error, not a wide interval.
    """
    x = _mode_matrix(series, mode_indices)
    n_rows, n_modes = x.shape

    ess = np.array([effective_sample_size(x[:, j]) for j in range(n_modes)])
    if np.min(ess) < 100.0:
        raise ValueError(
            f"effective sample size too small: min {np.min(ess):.1f} < 100"
        )
    tau = max(integrated_autocorrelation_time(x[:, j]) for j in range(n_modes))
    block = max(1, min(int(math.ceil(4.0 * tau)), n_rows // 4))

    mean = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1).reshape(n_modes, n_modes)

    mean_ci = np.empty((n_modes, 2))
    for j in range(n_modes):
        mean_ci[j] = bootstrap_ci(
            x[:, j], lambda rows: float(np.mean(rows)),
            block_length=block, n_resamples=n_resamples, seed=seed,
        )
    cov_ci = np.empty((n_modes, n_modes, 2))
    for i in range(n_modes):
        for j in range(n_modes):
            def cov_stat(rows, i=i, j=j):
                return float(np.mean(rows[:, i] * rows[:, j])
                             - np.mean(rows[:, i]) * np.mean(rows[:, j]))
            cov_ci[i, j] = bootstrap_ci(
                x, cov_stat, block_length=block,
                n_resamples=n_resamples, seed=seed + 1,
            )
    return FieldStatistics(
        mode_indices=tuple(mode_indices), mean=mean, mean_ci=mean_ci,
        cov=cov, cov_ci=cov_ci, ess=ess, block_length=block,
    )


def projection_check(series, H, mode_index=None, n_resamples=400, seed=0):
    """Estimate E|Y^n(H)| = n^{-1/4} E|y^n(H)| for a zero-mean test function.

    The series must carry H as a registered mode column; pass mode_index to
    disambiguate, otherwise the column is located by (kind, k) among the
    series' registered modes. Returns (estimate, (ci_low, ci_high)).
    """
    if abs(H.mean) > 1e-12:
        raise ValueError("projection check requires a zero-mean test function")
    if mode_index is None:
        labels = getattr(series, "modes", None)
        if labels is None:
            raise ValueError("series carries no mode labels; pass mode_index")
        matches = [i + 1 for i, (kind, k) in enumerate(labels)
                   if kind == H.kind and k == H.k]
        if not matches:
            raise ValueError(f"series has no mode ({H.kind}, {H.k})")
        mode_index = matches[0]
    x = _mode_matrix(series, [mode_index])[:, 0]
    scale = float(series.params.n) ** -0.25
    tau = integrated_autocorrelation_time(x)
    block = max(1, min(int(math.ceil(4.0 * tau)), x.size // 4))
    estimate = scale * float(np.mean(np.abs(x)))
    lo, hi = bootstrap_ci(
        x, lambda rows: scale * float(np.mean(np.abs(rows))),
        block_length=block, n_resamples=n_resamples, seed=seed,
    )
    return estimate, (lo, hi)
