"""Finite-dimensional sandbox for non-self-adjoint spectral resolutions.

A normal reference generator ``At = U diag(gamma) U^*`` has orthogonal
spectral projections ``E_Omega``. An intertwiner ``Lambda`` transports them to
the oblique family ``F_Omega = Lambda E_Omega Lambda^+`` which resolves the
target semigroup ``P_t = Lambda exp(-t At) Lambda^-1``.

In finite dimension a quasi-affinity is automatically a bijection, so what
can be tested here is (a) bijective ``Lambda`` with controlled
ill-conditioning and (b) truncation families whose envelope stays uniform in
the dimension while the condition number grows.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import linalg as sla

from . import specmat
from .errors import DomainError, HypothesisError, InvalidInputError, PropernessError

ZERO_TOL = 1e-12
PROPER_TOL = 1e-10
DOMAIN_TOL = 1e-10
FINITE_DIM_NOTE = ("finite dimension: every quasi-affinity is a bijection, so the checks use "
                   "bijective intertwiners with controlled conditioning and truncation families")


def random_unitary(rng, n):
    """Haar unitary from the QR factorisation of a complex Gaussian matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Qm * (d / np.abs(d))


@dataclass(frozen=True)
class NormalModel:
    """Normal matrix ``U diag(spectrum) U^*`` with index-set projections."""

    spectrum: np.ndarray
    frame: np.ndarray

    @property
    def dim(self):
        return self.spectrum.size

    @property
    def generator(self):
        return (self.frame * self.spectrum) @ self.frame.conj().T

    @property
    def gap(self):
        re = self.spectrum.real
        return float(re[re > ZERO_TOL].min())

    @property
    def zero_indices(self):
        return tuple(np.flatnonzero(np.abs(self.spectrum) <= ZERO_TOL))

    def indices(self, omega):
        """Normalise an index set; ``None`` means the whole spectrum."""
        if omega is None:
            return np.arange(self.dim)
        idx = np.unique(np.asarray(list(omega), dtype=int))
        if idx.size and (idx.min() < 0 or idx.max() >= self.dim):
            raise InvalidInputError(f"spectral indices must lie in [0, {self.dim})")
        return idx

    def projector(self, omega):
        idx = self.indices(omega)
        Uo = self.frame[:, idx]
        return Uo @ Uo.conj().T

    def function(self, values):
        """``m(At)`` for values of ``m`` on the spectrum."""
        values = np.asarray(values, dtype=complex).reshape(-1)
        if values.size != self.dim:
            raise InvalidInputError("need one value per spectral point")
        return (self.frame * values) @ self.frame.conj().T

    def semigroup(self, t):
        return self.function(np.exp(-self.spectrum * t))

    def normality_residual(self):
        A = self.generator
        scale = max(np.linalg.norm(A, 2) ** 2, 1e-300)
        return float(np.linalg.norm(A @ A.conj().T - A.conj().T @ A, 2) / scale)

    def adjoint(self):
        return NormalModel(self.spectrum.conj(), self.frame)


def build_sandbox(spectrum, seed=None):
    """Normal model with the given spectrum.

    ``seed=None`` uses the identity frame; otherwise a Haar unitary drawn from
    ``numpy.random.default_rng(seed)``.

    Raises
    ------
    InvalidInputError
        On a negative real part, a missing zero, or no point with positive real part.
    HypothesisError
        On a non-zero point of the imaginary axis (no convergence to equilibrium).
    """
    spec = np.asarray(spectrum, dtype=complex).reshape(-1)
    if spec.size < 2 or not np.all(np.isfinite(spec)):
        raise InvalidInputError("spectrum needs at least two finite points")
    if np.any(spec.real < -ZERO_TOL):
        raise InvalidInputError("spectrum must lie in the closed right half-plane")
    if not np.any(np.abs(spec) <= ZERO_TOL):
        raise InvalidInputError("spectrum must contain 0")
    if not np.any(spec.real > ZERO_TOL):
        raise InvalidInputError("spectrum needs a point with positive real part")
    if np.any((np.abs(spec.real) <= ZERO_TOL) & (np.abs(spec) > ZERO_TOL)):
        raise HypothesisError("non-zero spectrum on the imaginary axis rules out convergence to equilibrium")
    spec = np.where(np.abs(spec) <= ZERO_TOL, 0.0, spec)
    U = np.eye(spec.size, dtype=complex) if seed is None else random_unitary(np.random.default_rng(seed), spec.size)
    return NormalModel(spec, U)


def pseudo_inverse(L):
    """Moore-Penrose inverse by SVD; singular values below 1e-10 sigma_max are dropped."""
    L = np.asarray(L)
    if L.ndim != 2 or not np.all(np.isfinite(L)):
        raise InvalidInputError("pseudo_inverse needs a finite 2-d array")
    return np.linalg.pinv(L, rcond=specmat.RANK_RTOL)


def moore_penrose_residuals(L, X):
    """Residuals of the four Moore-Penrose identities, relative to ``|L| |X|``."""
    L, X = np.asarray(L), np.asarray(X)
    s = max(np.linalg.norm(L, 2) * np.linalg.norm(X, 2), 1e-300)
    LX, XL = L @ X, X @ L
    return (float(np.linalg.norm(LX @ L - L, 2) / (s * max(np.linalg.norm(L, 2), 1e-300))),
            float(np.linalg.norm(XL @ X - X, 2) / (s * max(np.linalg.norm(X, 2), 1e-300))),
            float(np.linalg.norm(LX - LX.conj().T, 2) / s),
            float(np.linalg.norm(XL - XL.conj().T, 2) / s))


class NsaFamily:
    """``Omega -> Lambda E_Omega Lambda^+`` for a fixed normal model and ``Lambda``."""

    def __init__(self, model, Lambda):
        Lambda = np.asarray(Lambda, dtype=complex)
        if Lambda.ndim != 2 or Lambda.shape[1] != model.dim:
            raise InvalidInputError(f"Lambda must have {model.dim} columns")
        self.model = model
        self.Lambda = Lambda
        self.Lambda_pinv = pseudo_inverse(Lambda)
        self._cache = {}
        self._proj = None

    def _svd_projectors(self):
        if self._proj is None:
            Uu, sv, Vh = np.linalg.svd(self.Lambda)
            r = int(np.sum(sv > specmat.RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0
            Ur, Vr = Uu[:, :r], Vh[:r].conj().T
            self._proj = (Ur @ Ur.conj().T, Vr @ Vr.conj().T)
        return self._proj

    @property
    def range_projector(self):
        """Orthogonal projection onto the range of ``Lambda``.

        Taken from the singular vectors rather than ``Lambda Lambda^+`` so it
        stays exact when ``Lambda`` is ill-conditioned.
        """
        return self._svd_projectors()[0]

    @property
    def coimage_projector(self):
        """Orthogonal projection onto the closed range of ``Lambda^*``."""
        return self._svd_projectors()[1]

    @property
    def scale(self):
        """``|Lambda| |Lambda^+|``, the size of a typical ``F_Omega``."""
        return float(np.linalg.norm(self.Lambda, 2) * np.linalg.norm(self.Lambda_pinv, 2))

    def properness_residual(self, omega):
        """``|(I - R) E_Omega R|`` with ``R`` the projection onto the closed range of ``Lambda^*``."""
        R = self.coimage_projector
        E = self.model.projector(omega)
        return float(np.linalg.norm((np.eye(R.shape[0]) - R) @ E @ R, 2))

    def __call__(self, omega):
        return nsa_projection(self, omega)


def nsa_projection(family, omega):
    """``F_Omega = Lambda E_Omega Lambda^+``.

    Raises
    ------
    PropernessError
        If ``E_Omega`` does not leave the range of ``Lambda^*`` invariant.
    """
    key = tuple(family.model.indices(omega))
    if key in family._cache:
        return family._cache[key]
    res = family.properness_residual(key)
    if res > PROPER_TOL:
        raise PropernessError(f"E_Omega does not preserve the closed range of Lambda^* (residual {res:.2e})")
    F = family.Lambda @ family.model.projector(key) @ family.Lambda_pinv
    family._cache[key] = F
    return F


def non_self_adjointness(F):
    return float(np.linalg.norm(F - F.conj().T, 2))


def functional_integral(family, m_values):
    """``sum_k m(gamma_k) F_{gamma_k}`` and its residual against ``Lambda m(At) Lambda^+``.

    Returns
    -------
    matrix : ndarray
    residual : float
        Relative to ``max(1, |Lambda| |Lambda^+| max|m|)``.
    """
    m = np.asarray(m_values, dtype=complex).reshape(-1)
    if m.size != family.model.dim or not np.all(np.isfinite(m)):
        raise InvalidInputError("m must be finite with one value per spectral point")
    S = sum(m[k] * nsa_projection(family, [k]) for k in range(m.size))
    direct = family.Lambda @ family.model.function(m) @ family.Lambda_pinv
    scale = max(1.0, family.scale * float(np.max(np.abs(m))))
    return S, float(np.linalg.norm(S - direct, 2) / scale)


def nsa_axiom_residuals(family, rng, trials=10):
    """Worst residuals of the resolution-of-identity axioms on random index sets.

    Each ``F_Omega`` is formed with relative rounding error of order
    ``eps kappa(Lambda)``, so residuals are divided by ``kappa(Lambda)`` times
    the natural size of the compared terms (``|F_a| |F_b|`` for products,
    the largest summand for sums). For unitary ``Lambda`` these are plain
    relative residuals.
    """
    n = family.model.dim
    kappa = max(1.0, family.scale)
    out = {"empty": float(np.linalg.norm(nsa_projection(family, []), 2)),
           "full": float(np.linalg.norm(nsa_projection(family, None) - family.range_projector, 2) / kappa),
           "multiplicative": 0.0, "commuting": 0.0, "additive": 0.0, "idempotent": 0.0}

    def rel(X, *parts):
        size = max([1.0] + [float(np.prod([np.linalg.norm(P, 2) for P in p])) for p in parts])
        return float(np.linalg.norm(X, 2) / (size * kappa))

    for _ in range(trials):
        a = np.flatnonzero(rng.random(n) < 0.5)
        b = np.flatnonzero(rng.random(n) < 0.5)
        Fa, Fb = nsa_projection(family, a), nsa_projection(family, b)
        Fab = nsa_projection(family, np.intersect1d(a, b))
        out["multiplicative"] = max(out["multiplicative"], rel(Fa @ Fb - Fab, (Fa, Fb)))
        out["commuting"] = max(out["commuting"], rel(Fb @ Fa - Fab, (Fa, Fb)))
        out["idempotent"] = max(out["idempotent"], rel(Fa @ Fa - Fa, (Fa, Fa)))
        # disjoint split of a
        a1 = a[rng.random(a.size) < 0.5]
        a2 = np.setdiff1d(a, a1)
        F1, F2 = nsa_projection(family, a1), nsa_projection(family, a2)
        out["additive"] = max(out["additive"], rel(F1 + F2 - Fa, (F1,), (F2,)))
    return out


@dataclass(frozen=True)
class VariationReport:
    weighted_variation: float
    weighted_bound: float
    total_variation: float
    total_bound: float
    normaliser: float
    tol: float

    @property
    def weighted_passed(self):
        return self.weighted_variation <= self.weighted_bound + self.tol * max(1.0, self.weighted_bound)

    @property
    def total_passed(self):
        return self.total_variation <= self.total_bound + self.tol * max(1.0, self.total_bound)

    @property
    def passed(self):
        return self.weighted_passed and self.total_passed


def variation_bound_check(family, m_values, f, g, Lambda_tilde=None, tol=1e-10):
    """Total-variation bounds for the complex measure ``<F_gamma f, g>``.

    Checks ``sum_k |m_k| |<F_k f, g>| / (|Lambda| |Lambda~|) <= |f| |g|`` and
    ``sum_k |<F_k f, g>| <= |Lambda^+ f| |Lambda| |g|``. ``Lambda_tilde``
    defaults to ``m(At) Lambda^+``.

    Raises
    ------
    DomainError
        If ``f`` is not in the range of ``Lambda``.
    """
    f = np.asarray(f, dtype=complex).reshape(-1)
    g = np.asarray(g, dtype=complex).reshape(-1)
    m = np.asarray(m_values, dtype=complex).reshape(-1)
    if m.size != family.model.dim:
        raise InvalidInputError("need one m value per spectral point")
    nf = np.linalg.norm(f)
    if np.linalg.norm(f - family.range_projector @ f) > DOMAIN_TOL * max(1.0, nf):
        raise DomainError("f lies outside the range of Lambda")
    if Lambda_tilde is None:
        Lambda_tilde = family.model.function(m) @ family.Lambda_pinv
    coeffs = np.array([np.vdot(g, nsa_projection(family, [k]) @ f) for k in range(m.size)])
    nL = np.linalg.norm(family.Lambda, 2)
    norm_ = nL * np.linalg.norm(Lambda_tilde, 2)
    return VariationReport(
        weighted_variation=float(np.sum(np.abs(m) * np.abs(coeffs)) / norm_),
        weighted_bound=float(nf * np.linalg.norm(g)),
        total_variation=float(np.sum(np.abs(coeffs))),
        total_bound=float(np.linalg.norm(family.Lambda_pinv @ f) * nL * np.linalg.norm(g)),
        normaliser=float(norm_), tol=tol)


# -- two-sided intertwiners ------------------------------------------------

@dataclass(frozen=True)
class IntertwinerPair:
    """``P Lambda = Lambda Pt`` and ``Lambda~ P = Pt Lambda~`` with ``Lambda~ Lambda = m(At)``.

    ``Lambda_inv`` is kept from the construction so that the target semigroup
    does not depend on a numerical inverse.
    """

    model: NormalModel
    Lambda: np.ndarray
    LambdaTilde: np.ndarray
    Lambda_inv: np.ndarray
    m_values: np.ndarray

    @property
    def generator(self):
        """Target generator ``Lambda At Lambda^-1``."""
        return self.Lambda @ self.model.generator @ self.Lambda_inv

    def semigroup(self, t):
        return self.Lambda @ self.model.semigroup(t) @ self.Lambda_inv

    def equilibrium(self):
        """``F_{0} = Lambda E_0 Lambda^-1``, the invariant projection of ``P``."""
        return self.Lambda @ self.model.projector(self.model.zero_indices) @ self.Lambda_inv

    @property
    def kappa(self):
        return specmat.condition_number(self.Lambda)

    @property
    def norm_product(self):
        return float(np.linalg.norm(self.Lambda, 2) * np.linalg.norm(self.LambdaTilde, 2))

    def adjoint(self):
        """Pair for the adjoint semigroup: ``Lambda~^*`` intertwines ``P^*`` with ``Pt^*``."""
        return IntertwinerPair(self.model.adjoint(), self.LambdaTilde.conj().T, self.Lambda.conj().T,
                               self.LambdaTilde_inv().conj().T, self.m_values.conj())

    def LambdaTilde_inv(self):
        # Lambda~ = m(At) Lambda^-1, so its inverse is Lambda m(At)^-1
        return self.Lambda @ self.model.function(1.0 / self.m_values)

    def residuals(self, ts=(0.1, 1.0)):
        """Intertwining residuals (relative to ``|Lambda|``) and ``|Lambda~ Lambda - m(At)|``."""
        nL = np.linalg.norm(self.Lambda, 2)
        A = self.generator
        inter = 0.0
        for t in ts:
            lhs = sla.expm(-t * A) @ self.Lambda
            rhs = self.Lambda @ self.model.semigroup(t)
            inter = max(inter, float(np.linalg.norm(lhs - rhs, 2) / nL))
        M = self.model.function(self.m_values)
        prod = float(np.linalg.norm(self.LambdaTilde @ self.Lambda - M, 2))
        return {"intertwining": inter, "product": prod}

    def recovered_m(self):
        """Diagonal of ``Lambda~ Lambda`` in the eigenframe, and the off-diagonal size."""
        U = self.model.frame
        D = U.conj().T @ (self.LambdaTilde @ self.Lambda) @ U
        return np.diag(D).copy(), float(np.linalg.norm(D - np.diag(np.diag(D)), 2))


def two_sided_construct(model, m_values, eps=1.0, mixing=0.5, seed=0):
    """Invertible ``Lambda`` with ``|Lambda| <= 1``, ``|Lambda~| <= 1`` and ``Lambda~ Lambda = m(At)``.

    With ``M = diag(m)`` and ``S^2 = |M|^(2 eps)`` take
    ``G = S^2 + (I - S^2)^(1/2) K (I - S^2)^(1/2)`` for a random PSD ``K`` of
    norm ``mixing`` that avoids the zero eigenvalue and the smallest ``|m|``.
    Then ``|M|^2 <= G <= I`` and ``Lambda = W G^(1/2) U^*``,
    ``Lambda~ = U M G^(-1/2) W^*`` satisfy both norm bounds, while
    ``kappa(Lambda) = |m|_min^(-eps)``. ``W`` is a random unitary (``seed``)
    or ``U`` when ``seed`` is None.

    Parameters
    ----------
    eps : float in (0, 1]
        Conditioning exponent.
    mixing : float in [0, 1)
        Off-diagonal coupling; 0 gives a normal target semigroup.
    """
    m = np.asarray(m_values, dtype=complex).reshape(-1)
    n = model.dim
    if m.size != n or not np.all(np.isfinite(m)):
        raise InvalidInputError("need one finite m value per spectral point")
    a = np.abs(m)
    if np.any(a == 0):
        raise InvalidInputError("m must not vanish on the spectrum")
    if np.any(a > 1 + 1e-15):
        raise InvalidInputError("need |m| <= 1 on the spectrum")
    if not 0 < eps <= 1:
        raise InvalidInputError("eps must lie in (0, 1]")
    if not 0 <= mixing < 1:
        raise InvalidInputError("mixing must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    s2 = np.minimum(a, 1.0) ** (2 * eps)
    free = np.setdiff1d(np.arange(n), list(model.zero_indices) + [int(np.argmin(a))])
    free = free[s2[free] < 1.0]
    K = np.zeros((n, n), dtype=complex)
    if free.size >= 2 and mixing > 0:
        Z = rng.standard_normal((free.size, free.size)) + 1j * rng.standard_normal((free.size, free.size))
        Kf = Z @ Z.conj().T
        K[np.ix_(free, free)] = mixing * Kf / np.linalg.norm(Kf, 2)
    r = np.sqrt(1.0 - s2)
    G = np.diag(s2).astype(complex) + (r[:, None] * K) * r[None, :]
    G = 0.5 * (G + G.conj().T)
    w, Y = np.linalg.eigh(G)
    Gh = (Y * np.sqrt(w)) @ Y.conj().T
    Gih = (Y / np.sqrt(w)) @ Y.conj().T
    U = model.frame
    W = U if seed is None else random_unitary(rng, n)
    Lambda = W @ Gh @ U.conj().T
    Lambda_inv = U @ Gih @ W.conj().T
    LambdaTilde = U @ (m[:, None] * Gih) @ W.conj().T
    return IntertwinerPair(model, Lambda, LambdaTilde, Lambda_inv, m)


def random_intertwiner(model, rng, cond=1e6, mixing=0.5, complex_m=True):
    """Pair with ``kappa(Lambda) = cond``: ``|m|`` log-uniform in ``[1/cond, 1]``, ``m = 1`` at zero."""
    n = model.dim
    logs = rng.uniform(-np.log(cond), 0.0, size=n)
    nz = np.setdiff1d(np.arange(n), model.zero_indices)
    logs[nz[rng.integers(nz.size)]] = -np.log(cond)
    logs[list(model.zero_indices)] = 0.0
    m = np.exp(logs).astype(complex)
    if complex_m:
        m *= np.exp(1j * rng.uniform(-np.pi, np.pi, size=n))
        m[list(model.zero_indices)] = 1.0
    return two_sided_construct(model, m, eps=1.0, mixing=mixing, seed=int(rng.integers(2**31)))


# -- convergence checks ------------------------------------------------------

def multiplier_envelope(pair, t):
    """``|Lambda| |Lambda~| max_{Re gamma >= gap} |exp(-gamma t) / m(gamma)|``."""
    spec = pair.model.spectrum
    mask = spec.real >= pair.model.gap - ZERO_TOL
    vals = np.exp(-spec[mask].real * t) / np.abs(pair.m_values[mask])
    return pair.norm_product * float(vals.max())


def gap_attainment_time(pair):
    """Smallest ``t >= 0`` after which ``|exp(-gamma t)/m(gamma)|`` peaks on ``Re gamma = gap``."""
    spec, a = pair.model.spectrum, np.abs(pair.m_values)
    g = pair.model.gap
    on_gap = np.abs(spec.real - g) <= ZERO_TOL
    mg = a[on_gap].min()
    above = spec.real > g + ZERO_TOL
    if not np.any(above):
        return 0.0
    T = np.log(mg / a[above]) / (spec.real[above] - g)
    return float(max(0.0, T.max()))


@dataclass(frozen=True)
class ConvergenceReport:
    ts: np.ndarray
    max_ratios: np.ndarray
    multiplier_env: np.ndarray
    similarity_env: np.ndarray
    gap_time: float
    kappa: float
    skipped: int
    tol: float
    note: str = FINITE_DIM_NOTE

    @property
    def multiplier_passed(self):
        return bool(np.all(self.max_ratios <= self.multiplier_env + self.tol))

    @property
    def similarity_passed(self):
        return bool(np.all(self.max_ratios <= self.similarity_env + self.tol))

    @property
    def passed(self):
        return self.multiplier_passed and self.similarity_passed

    @property
    def tighter(self):
        """Which envelope is smaller at the last grid time."""
        return "multiplier" if self.multiplier_env[-1] <= self.similarity_env[-1] else "similarity"

    def rows(self):
        return np.column_stack([self.ts, self.max_ratios, self.multiplier_env, self.similarity_env])


def random_unit_vectors(rng, n, count, complex_=True):
    X = rng.standard_normal((count, n))
    if complex_:
        X = X + 1j * rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def general_convergence_check(pair, t_grid, samples=100, seed=0, tol=1e-10):
    """Worst decay ratio over random ``f`` against both envelopes.

    ``P_inf`` is ``Lambda E_0 Lambda^-1``. ``f`` with ``|f - P_inf f| <= 1e-14``
    are skipped and counted.
    """
    ts = np.asarray(t_grid, dtype=float).reshape(-1)
    if ts.size == 0 or np.any(ts < 0) or not np.all(np.isfinite(ts)):
        raise InvalidInputError("t grid must be finite and non-negative")
    rng = np.random.default_rng(seed)
    F = random_unit_vectors(rng, pair.Lambda.shape[0], samples)
    Pinf = pair.equilibrium()
    fluct = F - F @ Pinf.T
    base = np.linalg.norm(fluct, axis=1)
    keep = base > 1e-14
    nz = np.setdiff1d(np.arange(pair.model.dim), pair.model.zero_indices)
    worst = []
    for t in ts:
        d = np.zeros(pair.model.dim, dtype=complex)
        d[nz] = np.exp(-pair.model.spectrum[nz] * t)
        Pt_minus = pair.Lambda @ pair.model.function(d) @ pair.Lambda_inv
        num = np.linalg.norm(fluct[keep] @ Pt_minus.T, axis=1)
        worst.append(float(np.max(num / base[keep])) if keep.any() else 0.0)
    kappa = pair.kappa
    return ConvergenceReport(
        ts=ts, max_ratios=np.array(worst),
        multiplier_env=np.array([multiplier_envelope(pair, t) for t in ts]),
        similarity_env=kappa * np.exp(-pair.model.gap * ts),
        gap_time=gap_attainment_time(pair), kappa=kappa, skipped=int((~keep).sum()), tol=tol)


# -- Laguerre multipliers --------------------------------------------------

def laguerre_log_multipliers(mparam, N):
    """``log m_n`` for ``n = 0..N-1``, with ``m_n^2 = n! Gamma(m+1) / Gamma(n+m+1)``."""
    mparam = float(mparam)
    if not np.isfinite(mparam) or mparam < 0:
        raise InvalidInputError("the Laguerre parameter must be non-negative")
    k = np.arange(1, int(N), dtype=float)
    return np.concatenate([[0.0], 0.5 * np.cumsum(np.log(k) - np.log(k + mparam))])


def laguerre_multipliers(mparam, N):
    return np.exp(laguerre_log_multipliers(mparam, N))


def laguerre_tight_at_one(mparam):
    """Exact check that ``(m_1 e^t)^-1 = sqrt(m+1) e^-t``, i.e. ``m_1^-2 = m + 1``."""
    q = Fraction(mparam)
    m1_sq = Fraction(1) / (1 + q)
    return 1 / m1_sq == q + 1


@dataclass(frozen=True)
class LaguerreReport:
    mparam: float
    N: int
    T: float
    ts: np.ndarray
    sup_values: np.ndarray
    envelope: np.ndarray
    tight_at_one: bool
    tol: float

    @property
    def margin(self):
        return self.envelope - self.sup_values

    @property
    def passed(self):
        return bool(np.all(self.margin[self.ts >= self.T] >= -self.tol)) and self.tight_at_one

    def rows(self):
        return np.column_stack([self.ts, self.sup_values, self.envelope, self.margin])


def _laguerre_excess(logm, mparam, t, nmin=1):
    """``max_{n>=nmin} log((m_n e^{nt})^-1) - log(sqrt(m+1) e^-t)``."""
    n = np.arange(logm.size, dtype=float)
    vals = -n[nmin:] * t - logm[nmin:]
    return float(vals.max() - (0.5 * np.log1p(mparam) - t))


def laguerre_threshold(mparam, N=1000, xtol=1e-12):
    """Smallest ``T`` with the multiplier bound valid for all ``t >= T``.

    The ``n = 1`` term meets the bound with equality for every ``t``, so the
    search runs over ``n >= 2``, where each excess is strictly decreasing in
    ``t``; bisection on ``[0, 1]`` widened as needed.
    """
    logm = laguerre_log_multipliers(mparam, N + 1)
    if logm.size < 3:
        return 0.0

    def excess(t):
        return _laguerre_excess(logm, mparam, t, nmin=2)

    if excess(0.0) <= 0:
        return 0.0
    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    lo = 0.0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def laguerre_multiplier_bound(mparam, t_grid=None, N=1000, tol=1e-12):
    """``sup_{1<=n<=N} (m_n e^{nt})^-1`` against ``sqrt(m+1) e^-t``."""
    if int(N) < 1000:
        raise InvalidInputError("N must be at least 1000")
    N = int(N)
    T = laguerre_threshold(mparam, N)
    ts = np.linspace(T, T + 5.0, 101) if t_grid is None else np.asarray(t_grid, dtype=float)
    logm = laguerre_log_multipliers(mparam, N + 1)
    n = np.arange(1, N + 1, dtype=float)
    sups = np.array([np.exp(np.max(-n * t - logm[1:])) for t in ts])
    env = np.sqrt(1.0 + mparam) * np.exp(-ts)
    return LaguerreReport(float(mparam), N, T, ts, sups, env, laguerre_tight_at_one(mparam), tol)


def laguerre_sandbox(mparam, N, mixing=0.5, seed=0):
    """Truncated Laguerre reference ``diag(0..N-1)`` with the two-sided pair for ``m_n``."""
    model = build_sandbox(np.arange(N, dtype=float))
    return two_sided_construct(model, laguerre_multipliers(mparam, N), eps=1.0, mixing=mixing, seed=seed)
