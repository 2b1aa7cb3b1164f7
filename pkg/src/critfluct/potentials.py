"""Scalar potentials and jump rates of the tilted lattice gas, with derivatives.

Everything here is a pure closed form. The centered potential U lives on
centered densities rho in [-1/2, 1/2], the entropy E on densities in [0, 1],
and W = E - U0 combines them at the critical tilt gamma = (1 - theta/sqrt(n))/2.
All evaluators accept scalars or numpy arrays and broadcast.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import xlogy

__all__ = [
    "ModelParams",
    "gamma_of",
    "eval_U",
    "eval_E",
    "eval_W",
    "macro_rates",
    "eval_V",
    "eval_V_prime",
]

# Below this threshold on |2*gamma*rho| the direct form of U loses digits to
# cancellation, so U switches to its even Taylor expansion (through order 6).
_U_TAYLOR_CUTOFF = 1e-4


def gamma_of(n, theta):
    """Interaction strength gamma = (1 - theta/sqrt(n))/2 of the flip dynamics.

    Raises ValueError when |theta| > sqrt(n), which would leave [0, 1].
    """
    if n <= 0:
        raise ValueError(f"lattice size must be positive, got {n}")
    root = math.sqrt(n)
    if abs(theta) > root:
        raise ValueError(f"|theta| = {abs(theta)} exceeds sqrt(n) = {root}")
    return (1.0 - theta / root) / 2.0


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the chain: size n, criticality theta, flip strength a.

    The tilt gamma is derived, never passed. Invariants enforced here:
    n >= 2, |theta| <= sqrt(n) (so gamma lands in [0, 1]) and a > 0
    (flips make the full chain irreducible). Simulation entry points
    additionally require n even; the small-n exact solver does not.
    """

    n: int
    theta: float
    a: float
    gamma: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        object.__setattr__(self, "gamma", gamma_of(self.n, self.theta))


def _check_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    return g


def eval_U(rho, gamma, order=0):
    """Centered potential U(rho) = (1/g)[(1+u)log(1+u) + (1-u)log(1-u)], u = 2*g*rho.

    Parameters
    ----------
    rho : array_like in [-1/2, 1/2]
    gamma : array_like in [0, 1]
    order : int
        Derivative order 0..4 with respect to rho.

    The gamma = 0 limit is 0 for every order. Order 0 switches to the even
    Taylor expansion 4g*rho^2 + (8/3)g^3*rho^4 + (64/15)g^5*rho^6 when
    |u| < 1e-4 to avoid cancellation in the bracketed difference of logs.
    """
    r = np.asarray(rho, dtype=float)
    g = _check_gamma(gamma)
    if np.any(np.abs(r) > 0.5):
        raise ValueError("rho must lie in [-1/2, 1/2]")
    if order not in (0, 1, 2, 3, 4):
        raise ValueError(f"derivative order must be 0..4, got {order}")

    r, g = np.broadcast_arrays(r, g)
    u = 2.0 * g * r
    with np.errstate(divide="ignore", invalid="ignore"):
        if order == 0:
            bracket = xlogy(1.0 + u, 1.0 + u) + xlogy(1.0 - u, 1.0 - u)
            direct = np.where(g > 0.0, bracket / np.where(g > 0.0, g, 1.0), 0.0)
            g2 = g * g
            taylor = 4.0 * g * r * r * (
                1.0 + g2 * r * r * (2.0 / 3.0 + (16.0 / 15.0) * g2 * r * r)
            )
            out = np.where(np.abs(u) < _U_TAYLOR_CUTOFF, taylor, direct)
        elif order == 1:
            out = 4.0 * np.arctanh(u)
        elif order == 2:
            out = 8.0 * g / (1.0 - u * u)
        elif order == 3:
            q = 1.0 - u * u
            out = 32.0 * g * g * u / (q * q)
        else:
            q = 1.0 - u * u
            out = 64.0 * g ** 3 * (1.0 + 3.0 * u * u) / (q * q * q)
    out = np.where(g == 0.0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def eval_E(rho, order=0):
    """Binary entropy E(rho) = rho*log(rho) + (1-rho)*log(1-rho) + log 2.

    Derivatives up to order 4; boundary values follow the 0*log(0) = 0
    convention at order 0, and derivatives diverge there as they must.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0.0) or np.any(r > 1.0):
        raise ValueError("rho must lie in [0, 1]")
    if order not in (0, 1, 2, 3, 4):
        raise ValueError(f"derivative order must be 0..4, got {order}")

    with np.errstate(divide="ignore", invalid="ignore"):
        if order == 0:
            out = xlogy(r, r) + xlogy(1.0 - r, 1.0 - r) + math.log(2.0)
        elif order == 1:
            out = np.log(r) - np.log1p(-r)
        elif order == 2:
            out = 1.0 / (r * (1.0 - r))
        elif order == 3:
            out = -1.0 / (r * r) + 1.0 / ((1.0 - r) * (1.0 - r))
        else:
            out = 2.0 / (r * r * r) + 2.0 / ((1.0 - r) * (1.0 - r) * (1.0 - r))
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def eval_W(rho, n, theta, order=0):
    """W(rho) = E(rho) - U0(rho) at the tilt gamma(n, theta), U0(rho) = U(rho - 1/2).

    At rho = 1/2 the value, first and third derivatives vanish, the second
    derivative equals 4*theta/sqrt(n), and the fourth derivative stays
    bounded away from zero: that degeneracy pattern is the criticality.
    """
    g = gamma_of(n, theta)
    r = np.asarray(rho, dtype=float)
    return eval_E(r, order=order) - eval_U(r - 0.5, g, order=order)


def macro_rates(rho, gamma):
    """Macroscopic birth and death rates (B, D) at density rho.

    B(rho) = (1-rho) * (1 + gamma*(2*rho-1))^2
    D(rho) = rho * (1 - gamma*(2*rho-1))^2
    """
    r = np.asarray(rho, dtype=float)
    g = _check_gamma(gamma)
    if np.any(r < 0.0) or np.any(r > 1.0):
        raise ValueError("rho must lie in [0, 1]")
    s = 2.0 * r - 1.0
    b = (1.0 - r) * (1.0 + g * s) ** 2
    d = r * (1.0 - g * s) ** 2
    b = np.asarray(b)
    d = np.asarray(d)
    if b.ndim == 0:
        return b[()], d[()]
    return b, d


def eval_V(y, theta):
    """Limit potential V(y) = theta*y^2 + y^4/2."""
    y = np.asarray(y, dtype=float)
    out = theta * y * y + 0.5 * y ** 4
    return out[()] if out.ndim == 0 else out


def eval_V_prime(y, theta):
    """Derivative V'(y) = 2*theta*y + 2*y^3."""
    y = np.asarray(y, dtype=float)
    out = 2.0 * theta * y + 2.0 * y ** 3
    return out[()] if out.ndim == 0 else out
