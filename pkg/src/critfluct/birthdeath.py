"""Auxiliary birth-death chain on {0..n} that mirrors the magnetization dynamics.

The chain has reversible law pi(m) proportional to binom(n,m) 2^-n e^{n U0(m/n)}
and rates b(m) = (n-m) e^{n(U0((m+1)/n)-U0(m/n))/2}, d(m) = m e^{-...}, so
detailed balance pi(m) b(m) = pi(m+1) d(m+1) is an algebraic identity. Everything
is held in log space, which keeps n up to about 10^6 in comfortable reach: tail
masses, the weighted tail sums entering the two-sided log-Sobolev estimate, and
the symmetrized tridiagonal form whose second eigenvalue is the spectral gap.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.linalg import eigh_tridiagonal

from critfluct.potentials import eval_U, eval_E, gamma_of

__all__ = [
    "BirthDeathChain",
    "build_chain",
    "miclo_constants",
    "lsi_bounds",
    "spectral_gap",
    "variance_of_test_function",
    "stirling_envelope",
    "znorm_scaling",
    "MICLO_UPPER_CONSTANT",
]

# Upper constant of the two-sided log-Sobolev sandwich, (4/3)(1 - sqrt5/(2 sqrt2))^-2.
# Evaluates to 30.3989..., quoted as 30.399 elsewhere.
MICLO_UPPER_CONSTANT = (4.0 / 3.0) / (1.0 - math.sqrt(5.0) / (2.0 * math.sqrt(2.0))) ** 2


@dataclass(frozen=True)
class BirthDeathChain:
    """Log-space representation of the chain: log stationary weights and log rates.

    log_pi is normalized (logsumexp == 0). The boundary conventions b(n) = 0
    and d(0) = 0 are stored as -inf.
    """

    n: int
    theta: float
    log_pi: np.ndarray
    log_b: np.ndarray
    log_d: np.ndarray

    @property
    def m_half(self):
        """Central pivot floor(n/2) used by the log-Sobolev estimates."""
        return self.n // 2


def _log_binomial(n, m):
    return gammaln(n + 1.0) - gammaln(m + 1.0) - gammaln(n - m + 1.0)


def build_chain(n, theta):
    """Construct the chain for given size n and criticality theta.

    The same half-exponent array enters log_b with a plus sign and log_d with
    a minus sign, so the detailed-balance residual reduces to the exact
    binomial identity plus log-gamma rounding.
    """
    n = int(n)
    g = gamma_of(n, theta)
    m = np.arange(n + 1, dtype=float)
    u0 = eval_U(m / n - 0.5, g)

    log_w = n * u0 + _log_binomial(float(n), m) - n * math.log(2.0)
    log_pi = log_w - logsumexp(log_w)

    half = 0.5 * n * (u0[1:] - u0[:-1])
    log_b = np.full(n + 1, -np.inf)
    log_d = np.full(n + 1, -np.inf)
    with np.errstate(divide="ignore"):
        log_b[:-1] = np.log(n - m[:-1]) + half
        log_d[1:] = np.log(m[1:]) - half
    return BirthDeathChain(n=n, theta=float(theta), log_pi=log_pi, log_b=log_b, log_d=log_d)


def _sup_weighted_tail(log_inc, log_tail):
    """max over ell of [LSE prefix of log_inc up to ell] + log_tail[ell] + log|log tail|.

    log_inc[i] and log_tail[i] are aligned on the same ell index. Entries with
    tail log >= 0 (numerically full mass) contribute zero, matching the
    convention |log 1| = 0.
    """
    prefix = np.logaddexp.accumulate(log_inc)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.where(log_tail < 0.0, np.log(-np.minimum(log_tail, 0.0)), -np.inf)
    values = prefix + log_tail + psi
    if values.size == 0:
        return -np.inf
    return float(np.max(values))


def miclo_constants(chain, m=None):
    """Two-sided weighted-tail constants (C_minus, C_plus) at pivot m.

    C_plus(m) = sup_{ell > m} [sum_{k=m+1..ell} 1/(pi(k) d(k))] * pi([ell,n]) |log pi([ell,n])|
    C_minus(m) mirrors it with b and lower tails. The default pivot is floor(n/2).
    Both suprema are exhaustive O(n) scans using prefix log-sum-exp accumulation.
    """
    n = chain.n
    if m is None:
        m = chain.m_half
    if not 0 <= m <= n:
        raise ValueError(f"pivot must lie in [0, {n}], got {m}")

    log_pi, log_b, log_d = chain.log_pi, chain.log_b, chain.log_d

    # upper side: ell runs over m+1..n
    if m == n:
        c_plus = 0.0
    else:
        log_inc = -(log_pi[m + 1:] + log_d[m + 1:])
        # log upper-tail mass at each ell in m+1..n
        rev = np.logaddexp.accumulate(log_pi[::-1])[::-1]
        log_tail = rev[m + 1:]
        c_plus = math.exp(_sup_weighted_tail(log_inc, log_tail))

    # lower side: ell runs over m-1..0; accumulate sums from k = m-1 downward
    if m == 0:
        c_minus = 0.0
    else:
        log_inc = -(log_pi[:m] + log_b[:m])[::-1]
        fwd = np.logaddexp.accumulate(log_pi)
        log_tail = fwd[:m][::-1]
        c_minus = math.exp(_sup_weighted_tail(log_inc, log_tail))

    return c_minus, c_plus


def pivot_constant(chain, m=None):
    """max(C_minus(m), C_plus(m)) at the given pivot (default floor(n/2))."""
    c_minus, c_plus = miclo_constants(chain, m)
    return max(c_minus, c_plus)


def min_pivot_constant(chain):
    """min over pivots m of max(C_minus(m), C_plus(m)), found by bisection.

    C_minus is nondecreasing and C_plus nonincreasing in the pivot, so the
    minimum of their maximum sits at the crossing. Bisection locates it in
    O(n log n); a small window around the crossing guards against ties.
    """
    n = chain.n
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        c_minus, c_plus = miclo_constants(chain, mid)
        if c_minus < c_plus:
            lo = mid
        else:
            hi = mid
    window = range(max(0, lo - 2), min(n, hi + 2) + 1)
    best = math.inf
    best_m = lo
    for m in window:
        value = pivot_constant(chain, m)
        if value < best:
            best, best_m = value, m
    return best, best_m


def lsi_bounds(chain, pivot="half"):
    """Sandwich (lower, upper) for the log-Sobolev constant of the chain.

    Returns (1/(80 C), MICLO_UPPER_CONSTANT / C) where C is the weighted-tail
    constant at the chosen pivot: "half" evaluates at floor(n/2), "scan"
    minimizes over pivots. The ratio upper/lower is the fixed number
    80 * 30.399 regardless of the chain.
    """
    if pivot == "half":
        c = pivot_constant(chain)
    elif pivot == "scan":
        c, _ = min_pivot_constant(chain)
    else:
        raise ValueError(f"pivot must be 'half' or 'scan', got {pivot!r}")
    return 1.0 / (80.0 * c), MICLO_UPPER_CONSTANT / c


def spectral_gap(chain):
    """Second-smallest eigenvalue of the symmetrized chain generator.

    The similarity transform by sqrt(pi) turns -L into the symmetric
    tridiagonal A with A[m,m] = b(m) + d(m) and A[m,m+1] = -sqrt(b(m) d(m+1)).
    Eigenvalues come from LAPACK bisection with Sturm sequences. The smallest
    one must vanish (stationarity); a RuntimeError reports if it does not.
    """
    log_b, log_d = chain.log_b, chain.log_d
    b = np.exp(log_b)
    d = np.exp(log_d)
    diag = b + d
    # the half-exponents cancel exactly inside the geometric mean
    off = -np.exp(0.5 * (log_b[:-1] + log_d[1:]))
    eigs = eigh_tridiagonal(
        diag, off, select="i", select_range=(0, 1), check_finite=False
    )[0]
    norm = float(np.max(diag) + 2.0 * np.max(np.abs(off)))
    if abs(eigs[0]) > 1e-9 * norm:
        raise RuntimeError(
            f"stationary eigenvalue off zero: {eigs[0]:.3e} vs scale {norm:.3e}"
        )
    return float(eigs[1])


def variance_of_test_function(chain, f=None):
    """Dirichlet form and variance under pi of f, default f(m) = m n^{-3/4}.

    Returns (dirichlet, variance) with
    dirichlet = (1/2) sum_m b(m) (f(m+1) - f(m))^2 pi(m).
    """
    n = chain.n
    m = np.arange(n + 1, dtype=float)
    if f is None:
        f = m * n ** -0.75
    else:
        f = np.asarray(f, dtype=float)
        if f.shape != (n + 1,):
            raise ValueError(f"f must have shape ({n + 1},), got {f.shape}")

    pi = np.exp(chain.log_pi)
    mean = float(np.dot(pi, f))
    variance = float(np.dot(pi, (f - mean) ** 2))

    df = np.diff(f)
    weights = np.exp(chain.log_b[:-1] + chain.log_pi[:-1])
    dirichlet = 0.5 * float(np.dot(weights, df * df))
    return dirichlet, variance


def stirling_envelope(n, theta=0.0):
    """(min, max) over k in [n/4, 3n/4] of binom(n,k) 2^-n / (a_n(k) e^{-n E(k/n)}).

    Here a_n(k) = sqrt(n/(k(n-k))). The ratio tends to 1/sqrt(2 pi) in the
    interior and is independent of theta; the parameter is accepted so grid
    drivers can treat all chain analyses uniformly.
    """
    n = int(n)
    if n < 8:
        raise ValueError(f"n must be at least 8, got {n}")
    del theta
    k = np.arange(math.ceil(n / 4), math.floor(3 * n / 4) + 1, dtype=float)
    log_ratio = (
        _log_binomial(float(n), k)
        - n * math.log(2.0)
        - 0.5 * (math.log(n) - np.log(k) - np.log(n - k))
        + n * eval_E(k / n)
    )
    return float(np.exp(np.min(log_ratio))), float(np.exp(np.max(log_ratio)))


def znorm_scaling(n, theta):
    """Normalization mass sum(binom(n,m) 2^-n e^{n U0(m/n)}) divided by n^{1/4}.

    This is the scaling in which the normalizer of pi settles to a finite
    limit as n grows; the stabilized value is what grid checks track.
    """
    n = int(n)
    g = gamma_of(n, theta)
    m = np.arange(n + 1, dtype=float)
    u0 = eval_U(m / n - 0.5, g)
    log_w = n * u0 + _log_binomial(float(n), m) - n * math.log(2.0)
    return float(math.exp(logsumexp(log_w) - 0.25 * math.log(n)))
