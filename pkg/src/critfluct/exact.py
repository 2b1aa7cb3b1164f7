"""Brute-force solver for small tori: the full 2^n-state generator, its exact
stationary law, and exact entropy/Dirichlet functionals.

States are integers s in [0, 2^n) with occupancy eta(x) = (s >> x) & 1. The
generator combines bond swaps at rate n^2 with spin flips at rate a c_x(eta).
Everything here is an oracle for the stochastic modules, so clarity and
exactness win over scale: the hard cap is n = 14 (16384 states).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.special import xlogy

from critfluct.potentials import ModelParams, eval_U
from critfluct.birthdeath import build_chain

__all__ = [
    "ExactSolution",
    "STATE_CAP",
    "build_generator",
    "stationary_distribution",
    "exact_solution",
    "law_of_magnetization",
    "functionals",
    "entropy_decomposition_check",
    "dirichlet_comparison_check",
    "lsi_probe",
]

STATE_CAP = 14
LSI_PROBE_CAP = 12


def _check_cap(n):
    if n > STATE_CAP:
        raise ValueError(f"exact solver capped at n = {STATE_CAP}, got {n}")


def _occupancy_bits(n):
    """(2^n, n) matrix of occupancies, eta(x) = (s >> x) & 1."""
    states = np.arange(1 << n, dtype=np.int64)
    return ((states[:, None] >> np.arange(n)) & 1).astype(np.int8)


def build_generator(params):
    """Sparse rate matrix Q with Q[s, t] the jump rate s -> t, rows summing to 0.

    Swaps across each of the n periodic bonds carry rate n^2; a flip at x
    carries a c_x(eta). The diagonal is the negative row sum.
    """
    n = params.n
    _check_cap(n)
    a, gamma = params.a, params.gamma
    size = 1 << n
    states = np.arange(size, dtype=np.int64)
    bits = _occupancy_bits(n)
    sigma = 2.0 * bits - 1.0

    rows, cols, data = [], [], []
    for x in range(n):
        x1 = (x + 1) % n
        differ = bits[:, x] != bits[:, x1]
        src = states[differ]
        rows.append(src)
        cols.append(src ^ ((1 << x) | (1 << x1)))
        data.append(np.full(src.size, float(n) ** 2))
    for x in range(n):
        c = (1.0 - gamma * sigma[:, x] * sigma[:, (x - 1) % n]) \
            * (1.0 - gamma * sigma[:, x] * sigma[:, (x + 1) % n])
        rows.append(states)
        cols.append(states ^ (1 << x))
        data.append(a * c)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    q = sparse.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()
    q.setdiag(-np.asarray(q.sum(axis=1)).ravel())
    return q.tocsr()


def _uniformized_squaring(q):
    """Stationary law by repeated squaring of the uniformized kernel (dense)."""
    size = q.shape[0]
    if size > 1 << 10:
        raise ValueError("dense squaring cross-check limited to n <= 10")
    lam = 1.001 * float(np.max(-q.diagonal()))
    p = np.eye(size) + q.toarray() / lam
    # squaring doubles the horizon per pass; 60 passes = 2^60 uniformized steps
    for _ in range(60):
        p = p @ p
        p /= p.sum(axis=1, keepdims=True)
    return p[0]


def stationary_distribution(q, cross_check=False):
    """Unique probability vector mu with mu^T Q = 0.

    Solved as Q^T mu = 0 with the last equation replaced by normalization;
    dense below 2^11 states, sparse LU above. The residual max |mu^T Q| must
    come out below 1e-10 or a RuntimeError reports it. cross_check also runs
    uniformized-kernel squaring (n <= 10) and verifies 1e-9 agreement.
    """
    size = q.shape[0]
    a = q.transpose().tolil()
    a[size - 1, :] = 1.0
    rhs = np.zeros(size)
    rhs[size - 1] = 1.0
    if size <= 1 << 11:
        mu = np.linalg.solve(a.toarray(), rhs)
    else:
        mu = splu(a.tocsc()).solve(rhs)

    residual = float(np.max(np.abs(mu @ q)))
    if residual > 1e-10:
        raise RuntimeError(f"stationary solve residual {residual:.3e} > 1e-10")
    mu = np.maximum(mu, 0.0)
    mu /= mu.sum()

    if cross_check:
        other = _uniformized_squaring(q)
        gap = float(np.max(np.abs(mu - other)))
        if gap > 1e-9:
            raise RuntimeError(f"power-iteration cross-check off by {gap:.3e}")
    return mu


@dataclass(frozen=True)
class ExactSolution:
    """Exact stationary data for one parameter point.

    mu_ss is the stationary law over all 2^n states; nu_U the tilted-binomial
    reference measure; level_weights its magnetization marginal pi_n(m).
    """

    params: ModelParams
    mu_ss: np.ndarray
    nu_U: np.ndarray
    level_weights: np.ndarray

    @property
    def n(self):
        return self.params.n

    def popcounts(self):
        return _occupancy_bits(self.n).sum(axis=1).astype(np.int64)

    def f_ss(self):
        """Stationary density relative to nu_U."""
        return self.mu_ss / self.nu_U


def exact_solution(params, cross_check=False):
    """Solve for mu_ss and assemble the reference measure and its level weights."""
    n = params.n
    _check_cap(n)
    q = build_generator(params)
    mu = stationary_distribution(q, cross_check=cross_check)

    m = _occupancy_bits(n).sum(axis=1).astype(np.int64)
    mbar = m - 0.5 * n
    log_w = n * eval_U(mbar / n, params.gamma) - n * math.log(2.0)
    w = np.exp(log_w - log_w.max())
    nu = w / w.sum()
    levels = np.bincount(m, weights=nu, minlength=n + 1)
    return ExactSolution(params=params, mu_ss=mu, nu_U=nu, level_weights=levels)


def law_of_magnetization(solution):
    """(pmf over m = 0..n, support of Y^n = (m - n/2)/n^{3/4}) under mu_ss."""
    n = solution.n
    pmf = np.bincount(solution.popcounts(), weights=solution.mu_ss, minlength=n + 1)
    support = (np.arange(n + 1) - 0.5 * n) / n ** 0.75
    return pmf, support


def _check_density(f, solution):
    f = np.asarray(f, dtype=float)
    if f.shape != solution.nu_U.shape:
        raise ValueError("density vector has wrong length")
    if np.min(f) < 0.0:
        raise ValueError(f"density has negative entries (min {np.min(f):.3e})")
    total = float(np.dot(f, solution.nu_U))
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"density integrates to {total!r}, not 1")
    return f


def functionals(f, solution):
    """(H_n, D_ex, D_G, D_n) of a density f with respect to nu_U.

    H_n = int f log f; D_ex sums squared sqrt-gradients over bond swaps at
    unit rate; D_G weighs flip gradients by c_x(eta); D_n = n^2 D_ex + D_G.
    The flip strength a enters the dynamics but not D_G.
    """
    f = _check_density(f, solution)
    params = solution.params
    n, gamma = params.n, params.gamma
    nu = solution.nu_U
    h_n = float(np.dot(nu, xlogy(f, f)))

    states = np.arange(1 << n, dtype=np.int64)
    bits = _occupancy_bits(n)
    sigma = 2.0 * bits - 1.0
    root = np.sqrt(f)

    d_ex = 0.0
    for x in range(n):
        x1 = (x + 1) % n
        swapped = states ^ ((1 << x) | (1 << x1))
        differ = bits[:, x] != bits[:, x1]
        diff = root[swapped[differ]] - root[differ]
        d_ex += 0.5 * float(np.dot(nu[differ], diff * diff))

    d_g = 0.0
    for x in range(n):
        c = (1.0 - gamma * sigma[:, x] * sigma[:, (x - 1) % n]) \
            * (1.0 - gamma * sigma[:, x] * sigma[:, (x + 1) % n])
        diff = root[states ^ (1 << x)] - root
        d_g += 0.5 * float(np.dot(nu * c, diff * diff))

    return h_n, d_ex, d_g, float(n) ** 2 * d_ex + d_g


def _level_means(f, solution):
    """Mean of f over each magnetization level under the uniform level measure."""
    m = solution.popcounts()
    counts = np.bincount(m, minlength=solution.n + 1).astype(float)
    sums = np.bincount(m, weights=f, minlength=solution.n + 1)
    return sums / counts


def entropy_decomposition_check(f, solution):
    """Residual of splitting H_n into within-level and across-level parts.

    The identity: H_n(f|nu_U) = sum_m pi(m) <f>_m H(f/<f>_m | uniform on the
    level) + sum_m pi(m) <f>_m log <f>_m, with <f>_m the uniform level mean.
    Exact up to rounding; the caller asserts the residual is < 1e-10.
    """
    f = _check_density(f, solution)
    n = solution.n
    m = solution.popcounts()
    pi = solution.level_weights
    means = _level_means(f, solution)

    counts = np.bincount(m, minlength=n + 1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(means[m] > 0.0, f / means[m], 0.0)
    inner_terms = xlogy(ratio, ratio) / counts[m]
    inner = np.bincount(m, weights=inner_terms, minlength=n + 1)

    h_within = float(np.dot(pi, means * inner))
    h_across = float(np.dot(pi, xlogy(means, means)))
    h_n = functionals(f, solution)[0]
    return abs(h_n - (h_within + h_across))


def dirichlet_comparison_check(f, solution):
    """Ratio of the birth-death sqrt-gradient form of the level means to D_G.

    numerator = sum_m b(m) (sqrt<f>_{m+1} - sqrt<f>_m)^2 pi(m). A flat density
    gives 0/0, reported as 0; a flip-invariant non-flat density would give a
    zero denominator, reported as inf.
    """
    f = _check_density(f, solution)
    chain = build_chain(solution.n, solution.params.theta)
    means = _level_means(f, solution)
    root = np.sqrt(means)
    b = np.exp(chain.log_b[:-1])
    pi = solution.level_weights
    num = float(np.sum(b * np.diff(root) ** 2 * pi[:-1]))
    d_g = functionals(f, solution)[2]
    if d_g == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / d_g


def lsi_probe(samples, solution, seed=0):
    """Max of H_n / (sqrt(n) D_n) over a family of random densities.

    The family mixes symmetric Dirichlet draws at concentrations 0.1, 1, 10
    (smooth to rough), level-set indicators, and single-configuration spikes.
    """
    n = solution.n
    if n > LSI_PROBE_CAP:
        raise ValueError(f"lsi_probe capped at n = {LSI_PROBE_CAP}, got {n}")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    nu = solution.nu_U
    size = nu.size
    root_n = math.sqrt(n)

    best = 0.0
    concentrations = (0.1, 1.0, 10.0)
    for i in range(samples):
        kind = i % 5
        if kind < 3:
            weights = rng.dirichlet(np.full(size, concentrations[kind]))
            f = weights / nu
            f /= float(np.dot(f, nu))
        elif kind == 3:
            m = int(rng.integers(0, n + 1))
            mask = (solution.popcounts() == m).astype(float)
            f = mask / float(np.dot(mask, nu))
        else:
            s = int(rng.integers(0, size))
            f = np.zeros(size)
            f[s] = 1.0 / nu[s]
        h_n, _, _, d_n = functionals(f, solution)
        if d_n > 0.0:
            best = max(best, h_n / (root_n * d_n))
    return best
