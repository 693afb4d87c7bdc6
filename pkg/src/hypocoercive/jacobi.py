"""Non-local Jacobi models: Bernstein data, moments and multiplier bounds.

A one-dimensional factor is described by ``mu`` and a jump density ``h`` on
``(1, inf)``. Its Bernstein function is

    phi(u) = (mu - 1) + u - int_1^inf y^(-u) h(y) dy,

and the invariant law on ``[0, 1]`` has moments
``prod_{k<=n} phi(k) / (k + gamma_1 - 1)``. With ``h = 0`` this is the
Beta(mu, gamma_1 - mu) law of the classical Jacobi diffusion, whose spectrum
is ``gamma_n = n(n-1) + gamma_1 n``.

The decay estimate is controlled by the multiplier

    F_m(n) = (1)_n (gamma_1 - m)_n / ((m)_n (gamma_1 - 1)_n),

read as a function of the spectral index ``n``, and the constant
``m (gamma_1 - 1) / (gamma_1 - m)`` valid past an explicit time threshold.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np
from scipy import integrate

from .errors import HypothesisError, InvalidInputError

MAX_POLY_DEGREE = 50
QUAD_RTOL = 1e-10


# -- jump densities ---------------------------------------------------------

@dataclass(frozen=True)
class PowerLawH:
    """``h(y) = c y^(-1-theta)``, so that ``e^y h(e^y) = c e^(-theta y)``."""

    c: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and np.isfinite(self.theta)):
            raise InvalidInputError("h parameters must be finite")
        if self.c < 0:
            raise HypothesisError(f"-(e^y h(e^y))' must be a non-negative measure; needs c >= 0, got c={self.c}")
        if self.theta <= 0:
            raise HypothesisError(f"-(e^y h(e^y))' must be a finite measure; needs theta > 0, got theta={self.theta}")

    def mellin(self, u):
        """``int_1^inf y^(-u) h(y) dy = c / (u + theta)``."""
        return self.c / (np.asarray(u, dtype=float) + self.theta)

    def total(self):
        return self.c / self.theta

    def __call__(self, y):
        return self.c * np.asarray(y, dtype=float) ** (-1.0 - self.theta)


@dataclass(frozen=True)
class AtomicH:
    """``-(e^y h(e^y))'`` is a finite sum of point masses ``w_k`` at ``s_k > 0``.

    Then ``e^s h(e^s) = sum_k w_k 1{s < s_k}``.
    """

    weights: tuple
    atoms: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        s = np.asarray(self.atoms, dtype=float).reshape(-1)
        if w.shape != s.shape or w.size == 0:
            raise InvalidInputError("weights and atoms must be non-empty and of equal length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(s))):
            raise InvalidInputError("h parameters must be finite")
        if np.any(w < 0):
            raise HypothesisError("-(e^y h(e^y))' must be a non-negative measure; found a negative weight")
        if np.any(s <= 0):
            raise InvalidInputError("atoms must be positive")
        object.__setattr__(self, "weights", tuple(w))
        object.__setattr__(self, "atoms", tuple(s))

    def mellin(self, u):
        u = np.asarray(u, dtype=float)
        w, s = np.asarray(self.weights), np.asarray(self.atoms)
        # (1 - e^{-u s}) / u, continuous at u = 0 where it equals s
        us = np.multiply.outer(u, s)
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(us == 0, s, -np.expm1(-us) / np.where(u[..., None] == 0, 1.0, u[..., None]))
        return frac @ w

    def total(self):
        return float(np.dot(self.weights, self.atoms))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        ly = np.log(y)
        g = sum(w * (ly < s) for w, s in zip(self.weights, self.atoms))
        return g / y


class QuadratureH:
    """Arbitrary non-negative ``h``; integrals by adaptive quadrature.

    The measure condition is checked on a log grid: ``y h(y)`` must be
    non-increasing in ``y``.
    """

    def __init__(self, func, check_points=200, y_max=1e6):
        self.func = func
        y = np.geomspace(1.0, y_max, check_points)
        g = np.array([y_ * func(y_) for y_ in y])
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise HypothesisError("h must be finite and non-negative")
        if np.any(np.diff(g) > 1e-12 * max(1.0, g.max())):
            raise HypothesisError("-(e^y h(e^y))' must be a non-negative measure; y h(y) increases somewhere")

    def mellin(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        for k, uk in enumerate(u):
            out[k] = integrate.quad(lambda y: y ** (-uk) * self.func(y), 1.0, np.inf,
                                    epsrel=QUAD_RTOL, epsabs=0.0, limit=200)[0]
        return out if out.size > 1 else float(out[0])

    def total(self):
        return float(self.mellin(0.0))

    def __call__(self, y):
        return self.func(y)


@dataclass(frozen=True)
class BernsteinPhi:
    mu: float
    h: object

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return (self.mu - 1.0) + u - self.h.mellin(u)


@dataclass(frozen=True)
class NonLocalJacobiModel:
    gamma1: float
    mu: np.ndarray
    hspecs: tuple

    @property
    def dim(self):
        return self.mu.size

    def phi(self, i):
        return BernsteinPhi(float(self.mu[i]), self.hspecs[i])


def hspec_from_dict(spec):
    """Decode ``{"family": "power", "c":..., "theta":...}`` or ``{"family": "atomic", ...}``."""
    spec = dict(spec)
    family = spec.pop("family", "power")
    if family == "power":
        return PowerLawH(float(spec.pop("c", 0.0)), float(spec.pop("theta", 1.0)))
    if family == "atomic":
        return AtomicH(tuple(spec.pop("weights")), tuple(spec.pop("atoms")))
    raise InvalidInputError(f"unknown h family {family!r}")


def build_jacobi_model(gamma1, mu, hspecs=None):
    """Validate ``gamma_1 > mu_i > 1 + int_1^inf h_i``.

    ``hspecs`` defaults to ``h = 0`` in every coordinate.
    """
    gamma1 = float(gamma1)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if not np.isfinite(gamma1) or not np.all(np.isfinite(mu)):
        raise InvalidInputError("gamma1 and mu must be finite")
    if hspecs is None:
        hspecs = [PowerLawH(0.0, 1.0)] * mu.size
    hspecs = tuple(hspec_from_dict(h) if isinstance(h, dict) else h for h in hspecs)
    if len(hspecs) != mu.size:
        raise InvalidInputError(f"need one h per coordinate: {len(hspecs)} vs {mu.size}")
    for i, (m, h) in enumerate(zip(mu, hspecs)):
        if not gamma1 > m:
            raise HypothesisError(f"coordinate {i}: need gamma_1 > mu_i, got gamma_1={gamma1}, mu_i={m}")
        tot = h.total()
        if not m > 1.0 + tot:
            raise HypothesisError(
                f"coordinate {i}: need mu_i > 1 + int_1^inf h_i, got mu_i - 1 = {m - 1:.6g} <= int h = {tot:.6g}")
    model = NonLocalJacobiModel(gamma1, mu, hspecs)
    grid = np.linspace(0.0, 2.0 * gamma1, 20)
    for i in range(mu.size):
        vals = model.phi(i)(grid)
        if vals[0] < 0 or np.any(np.diff(vals) < -1e-12):
            raise HypothesisError(f"coordinate {i}: phi is not a Bernstein function on the sample grid")
    return model


def beta_moment(model, i, n):
    """``int_0^1 x^n beta_i(x) dx = prod_{k=1}^n phi_i(k) / (k + gamma_1 - 1)``."""
    return beta_moments(model, i, n)[-1]


def beta_moments(model, i, n):
    """Moments of orders ``0..n`` as an array."""
    n = int(n)
    if n < 0:
        raise InvalidInputError("moment order must be non-negative")
    k = np.arange(1, n + 1, dtype=float)
    factors = model.phi(i)(k) / (k + model.gamma1 - 1.0)
    return np.concatenate([[1.0], np.cumprod(factors)])


def hankel_min_eigs(moments, size=3):
    """Smallest eigenvalues of the Hausdorff Hankel matrices of order ``size``.

    Returns those of ``[m_{j+k}]`` and ``[m_{j+k} - m_{j+k+1}]``; both must be
    PSD for a law on ``[0, 1]``.
    """
    m = np.asarray(moments, dtype=float)
    if m.size < 2 * size:
        raise InvalidInputError(f"need at least {2 * size} moments")
    H = np.array([[m[j + k] for k in range(size)] for j in range(size)])
    H1 = np.array([[m[j + k] - m[j + k + 1] for k in range(size)] for j in range(size)])
    return float(np.linalg.eigvalsh(H)[0]), float(np.linalg.eigvalsh(H1)[0])


def jacobi_eigenvalue(gamma1, n):
    """``gamma_n = n(n-1) + gamma_1 n``; accepts arrays."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise InvalidInputError("n must be non-negative")
    return n * (n - 1) + gamma1 * n


def _check_m(gamma1, m, mu=None):
    gamma1, m = float(gamma1), float(m)
    lo = 1.0 if mu is None else float(np.max(mu))
    if mu is not None and not m > lo:
        raise HypothesisError(f"need max mu_i < m, got m={m}, max mu={lo}")
    if not (1.0 <= m < gamma1):
        raise HypothesisError(f"need 1 <= m < gamma_1, got m={m}, gamma_1={gamma1}")
    return gamma1, m


def log_F_m(gamma1, m, nmax, mu=None):
    """``log F_m(n)`` for ``n = 0..nmax``."""
    gamma1, m = _check_m(gamma1, m, mu)
    k = np.arange(int(nmax), dtype=float)
    terms = (np.log1p(k) - np.log(m + k)) + (np.log(gamma1 - m + k) - np.log(gamma1 - 1.0 + k))
    return np.concatenate([[0.0], np.cumsum(terms)])


def F_m_eval(gamma1, m, n, mu=None):
    """``(1)_n (gamma_1 - m)_n / ((m)_n (gamma_1 - 1)_n)`` at the index ``n``.

    ``m = 1`` is accepted as the limiting case where every factor cancels.
    Pass ``mu`` to enforce ``m > max mu_i``.
    """
    n = int(n)
    if n < 0:
        raise InvalidInputError("n must be non-negative")
    return float(np.exp(log_F_m(gamma1, m, n, mu)[-1]))


def hypo_constant(gamma1, m):
    gamma1, m = _check_m(gamma1, m)
    return m * (gamma1 - 1.0) / (gamma1 - m)


def time_threshold(gamma1, m):
    """``t_0 = max(0, log(gamma_1 (m+1) / (2 (gamma_1 - m + 1))) / gamma_1)``."""
    gamma1, m = _check_m(gamma1, m)
    return max(0.0, math.log(gamma1 * (m + 1.0) / (2.0 * (gamma1 - m + 1.0))) / gamma1)


@dataclass(frozen=True)
class JacobiBoundReport:
    gamma1: float
    m: float
    N: int
    C: float
    t0: float
    ts: np.ndarray
    sup_values: np.ndarray
    envelope: np.ndarray
    argmax: np.ndarray
    tol: float

    @property
    def margin(self):
        return self.envelope - self.sup_values

    @property
    def worst_excess(self):
        return float(np.max(self.sup_values - self.envelope))

    @property
    def passed(self):
        return self.worst_excess <= self.tol

    def rows(self):
        return np.column_stack([self.ts, self.sup_values, self.envelope, self.margin])


def sup_ratio(gamma1, m, t, N):
    """``max_{1<=n<=N} exp(-gamma_n t) / F_m(n)`` and its argmax."""
    n = np.arange(1, N + 1)
    logs = -jacobi_eigenvalue(gamma1, n.astype(float)) * t - log_F_m(gamma1, m, N)[1:]
    k = int(np.argmax(logs))
    return float(np.exp(logs[k])), int(n[k])


def hypo_bound_check(gamma1, m, t_grid=None, N=10_000, tol=1e-10):
    """Compare ``sup_n exp(-gamma_n t)/F_m(n)`` with ``C exp(-gamma_1 t)`` past ``t_0``.

    The default grid is 101 points on ``[t_0, t_0 + 5]``.
    """
    if int(N) < 100:
        raise InvalidInputError("N must be at least 100")
    C, t0 = hypo_constant(gamma1, m), time_threshold(gamma1, m)
    ts = np.linspace(t0, t0 + 5.0, 101) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(ts < t0 - 1e-15):
        raise InvalidInputError(f"t grid must lie above the threshold t0={t0:.6g}")
    sups, args = zip(*(sup_ratio(gamma1, m, t, int(N)) for t in ts))
    env = C * np.exp(-float(gamma1) * ts)
    return JacobiBoundReport(float(gamma1), float(m), int(N), C, t0, ts, np.array(sups), env,
                             np.array(args), tol)


# -- classical Jacobi diffusion on polynomials ------------------------------

def _eigenpolys(gamma1, mu, deg):
    """Monic eigenpolynomials of ``-x(1-x) d^2 + (gamma_1 x - mu) d`` up to ``deg``.

    Exact rational arithmetic on the float inputs. Row ``n`` holds the power
    coefficients of ``p_n``.
    """
    g, u = Fraction(gamma1), Fraction(mu)
    lam = [k * (k - 1) + g * k for k in range(deg + 1)]
    P = []
    for n in range(deg + 1):
        a = [Fraction(0)] * (deg + 1)
        a[n] = Fraction(1)
        for k in range(n - 1, -1, -1):
            a[k] = (k + 1) * (k + u) * a[k + 1] / (lam[k] - lam[n])
        P.append(a)
    return P


def _as_coeffs(p):
    if isinstance(p, np.polynomial.Polynomial):
        c = p.coef
    else:
        c = np.atleast_1d(np.asarray(p, dtype=float))
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if c.size == 0:
        c = np.zeros(1)
    if c.size - 1 > MAX_POLY_DEGREE:
        raise InvalidInputError(f"polynomial degree {c.size - 1} exceeds {MAX_POLY_DEGREE}")
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("polynomial coefficients must be finite")
    return c


def classical_jacobi_apply(gamma1, mu, t, p):
    """Classical Jacobi semigroup at time ``t`` applied to a polynomial.

    ``p`` is a :class:`numpy.polynomial.Polynomial` or power coefficients in
    increasing order. The polynomial is expanded on the eigenpolynomials, the
    degree-``n`` component is damped by ``exp(-gamma_n t)``, and the result is
    returned as a Polynomial.
    """
    if not (gamma1 > mu > 0):
        raise InvalidInputError("need gamma_1 > mu > 0 for the Beta(mu, gamma_1 - mu) weight")
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError("t must be non-negative")
    c = _as_coeffs(p)
    if t == 0.0:
        return np.polynomial.Polynomial(c)
    deg = c.size - 1
    P = _eigenpolys(gamma1, mu, deg)
    # back substitution: the eigenbasis is unit upper triangular in powers
    rem = [Fraction(float(x)) for x in c]
    w = [Fraction(0)] * (deg + 1)
    for n in range(deg, -1, -1):
        w[n] = rem[n]
        for k in range(n + 1):
            rem[k] -= w[n] * P[n][k]
    out = [Fraction(0)] * (deg + 1)
    for n in range(deg + 1):
        damp = Fraction(math.exp(-float(n * (n - 1) + gamma1 * n) * t))
        s = w[n] * damp
        for k in range(n + 1):
            out[k] += s * P[n][k]
    return np.polynomial.Polynomial([float(x) for x in out])


def beta_inner(p, q, gamma1, mu):
    """``int_0^1 p q dBeta(mu, gamma_1 - mu)`` from exact Beta moments."""
    r = np.polynomial.Polynomial(_as_coeffs(p)) * np.polynomial.Polynomial(_as_coeffs(q))
    k = np.arange(r.coef.size - 1, dtype=float)
    mom = np.concatenate([[1.0], np.cumprod((mu + k) / (gamma1 + k))])
    return float(r.coef @ mom[: r.coef.size])
