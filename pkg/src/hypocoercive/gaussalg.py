"""Exact plane-wave algebra under Gaussian weights.

A :class:`TrigPoly` is a finite sum ``sum_j c_j exp(i <xi_j, x>)`` with real
frequencies. This family is closed under every operator used for the OU
analysis: the OU semigroup itself, Gaussian Fourier multipliers, and the
adjoint of a multiplier between two diagonal Gaussian spaces. Inner products
against a centred Gaussian weight reduce to its characteristic function, so
everything here is closed form. A Gauss-Hermite path is kept for arbitrary
callables as an independent cross-check.
"""

from dataclasses import dataclass

import numpy as np

from . import specmat
from .errors import InvalidInputError, OrderingError

#: frequencies closer than this in every coordinate are merged
MERGE_TOL = 1e-12


def _canonical(coeffs, freqs, tol=MERGE_TOL):
    n, d = freqs.shape
    if n == 0:
        return np.zeros(0, dtype=complex), np.zeros((0, d))
    order = np.lexsort(freqs.T[::-1])
    coeffs, freqs = coeffs[order], freqs[order]
    out_c, out_f = [], []
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        if used[i]:
            continue
        c = coeffs[i]
        used[i] = True
        # lexsort keeps near-equal rows adjacent in the leading coordinate only,
        # so scan forward while the first coordinate is still within tolerance
        j = i + 1
        while j < n and freqs[j, 0] - freqs[i, 0] <= tol:
            if not used[j] and np.all(np.abs(freqs[j] - freqs[i]) <= tol):
                c = c + coeffs[j]
                used[j] = True
            j += 1
        if c != 0:
            out_c.append(c)
            out_f.append(freqs[i])
    if not out_c:
        return np.zeros(0, dtype=complex), np.zeros((0, d))
    return np.asarray(out_c, dtype=complex), np.asarray(out_f, dtype=float)


class TrigPoly:
    """Finite complex combination of plane waves on R^d.

    Instances are immutable; all operations return new objects. Terms with
    equal frequencies (within ``MERGE_TOL`` per coordinate) are merged and
    zero coefficients are dropped, so two polynomials that represent the same
    function compare via :func:`trig_residual`.
    """

    __slots__ = ("_coeffs", "_freqs")

    def __init__(self, coeffs, freqs):
        freqs = np.asarray(freqs)
        if np.iscomplexobj(freqs):
            raise InvalidInputError("frequencies must be real")
        freqs = np.asarray(freqs, dtype=float)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if freqs.ndim == 1 and coeffs.size:
            freqs = freqs.reshape(coeffs.size, -1)
        if freqs.ndim != 2 or freqs.shape[0] != coeffs.size or freqs.shape[1] < 1:
            raise InvalidInputError(
                f"need one frequency row per coefficient, got {coeffs.size} coeffs and freqs of shape {freqs.shape}")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(coeffs))):
            raise InvalidInputError("TrigPoly entries must be finite")
        c, f = _canonical(coeffs, freqs)
        c.flags.writeable = False
        f.flags.writeable = False
        self._coeffs = c
        self._freqs = f

    @classmethod
    def constant(cls, value, dim):
        return cls([value], np.zeros((1, dim)))

    @classmethod
    def plane_wave(cls, xi, coeff=1.0):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return cls([coeff], xi.reshape(1, -1))

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros(0), np.zeros((0, dim)))

    @classmethod
    def from_rows(cls, rows, dim=None):
        """Build from ``(re, im, xi_1, ..., xi_d)`` rows."""
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        if rows.ndim != 2 or rows.shape[1] < 3:
            raise InvalidInputError("TrigPoly rows must be (re, im, xi_1, ..., xi_d)")
        if dim is not None and rows.shape[1] - 2 != dim:
            raise InvalidInputError(f"TrigPoly rows have dimension {rows.shape[1] - 2}, expected {dim}")
        return cls(rows[:, 0] + 1j * rows[:, 1], rows[:, 2:])

    def to_rows(self):
        return np.column_stack([self._coeffs.real, self._coeffs.imag, self._freqs])

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def freqs(self):
        return self._freqs

    @property
    def dim(self):
        return self._freqs.shape[1]

    def __len__(self):
        return self._coeffs.size

    def __repr__(self):
        return f"TrigPoly(dim={self.dim}, terms={len(self)})"

    def _check_dim(self, other):
        if other.dim != self.dim:
            raise InvalidInputError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other, self.dim)
        self._check_dim(other)
        return TrigPoly(np.concatenate([self._coeffs, other._coeffs]),
                        np.vstack([self._freqs, other._freqs]))

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(-self._coeffs, self._freqs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, TrigPoly):
            # product of plane waves adds frequencies
            self._check_dim(scalar)
            c = np.outer(self._coeffs, scalar._coeffs).reshape(-1)
            f = (self._freqs[:, None, :] + scalar._freqs[None, :, :]).reshape(-1, self.dim)
            return TrigPoly(c, f)
        return TrigPoly(self._coeffs * complex(scalar), self._freqs)

    __rmul__ = __mul__

    def __call__(self, x):
        """Evaluate at points ``x`` of shape (m, d) or (d,)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        vals = np.exp(1j * x @ self._freqs.T) @ self._coeffs
        return vals[0] if single else vals

    def with_terms(self, coeffs, freqs):
        return TrigPoly(coeffs, freqs)

    def map_frequencies(self, M):
        """Replace each frequency ``xi`` by ``M @ xi``."""
        M = np.asarray(M, dtype=float)
        return TrigPoly(self._coeffs, self._freqs @ M.T)

    def compose_linear(self, A):
        """Return ``x -> f(A x)``; frequencies map to ``A^T xi``."""
        return self.map_frequencies(np.asarray(A, dtype=float).T)

    def constant_term(self):
        mask = np.all(self._freqs == 0, axis=1)
        return complex(self._coeffs[mask].sum())


def trig_residual(f, g, match_tol=1e-6):
    """Distance between two TrigPolys term by term.

    Terms are paired greedily by nearest frequency (sup norm, within
    ``match_tol``); a pair contributes ``|dc| + |dxi|_inf``, an unpaired term
    contributes ``|c|``. Returns the maximum contribution.
    """
    if f.dim != g.dim:
        raise InvalidInputError("dimension mismatch")
    fc, ff = f.coeffs, f.freqs
    gc, gf = g.coeffs, g.freqs
    worst = 0.0
    taken = np.zeros(len(gc), dtype=bool)
    for c, xi in zip(fc, ff):
        best, best_d = -1, np.inf
        if len(gc):
            dist = np.max(np.abs(gf - xi), axis=1)
            dist[taken] = np.inf
            best = int(np.argmin(dist))
            best_d = dist[best]
        if best >= 0 and best_d <= match_tol:
            taken[best] = True
            worst = max(worst, abs(c - gc[best]) + best_d)
        else:
            worst = max(worst, abs(c))
    for c in gc[~taken]:
        worst = max(worst, abs(c))
    return float(worst)


@dataclass(frozen=True)
class GaussianWeight:
    """Centred Gaussian density with the given covariance."""

    covariance: np.ndarray

    def __post_init__(self):
        C = specmat.as_square(self.covariance, "covariance", allow_complex=False)
        if not specmat.is_symmetric(C):
            raise InvalidInputError("covariance must be symmetric")
        C = 0.5 * (C + C.T)
        if not specmat.loewner_greater(C, np.zeros_like(C)):
            raise InvalidInputError("covariance must be positive definite")
        object.__setattr__(self, "covariance", C)

    @property
    def dim(self):
        return self.covariance.shape[0]

    def char(self, xi):
        """Characteristic function ``E exp(i <xi, X>)`` for rows of ``xi``."""
        xi = np.atleast_2d(xi)
        return np.exp(-0.5 * np.einsum("ij,jk,ik->i", xi, self.covariance, xi))


def _as_weight(weight):
    return weight if isinstance(weight, GaussianWeight) else GaussianWeight(weight)


def _quad_form(M, X):
    return np.einsum("ij,jk,ik->i", X, M, X)


def ou_apply(B, Qinf, t, f):
    """Apply the OU semigroup of ``(Q, B)`` at time ``t`` to ``f``.

    Each term ``(c, xi)`` becomes ``(c exp(-<Q_t xi, xi>/2), exp(-t B^*) xi)``
    with ``Q_t = Qinf - exp(-tB) Qinf exp(-tB^*)``.
    """
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError(f"t must be non-negative, got {t}")
    B = specmat.as_square(B, "B", allow_complex=False)
    if f.dim != B.shape[0]:
        raise InvalidInputError(f"f has dimension {f.dim}, B has {B.shape[0]}")
    if t == 0.0:
        return f
    Qt = specmat.gramian_at(B, None, t, Qinf=Qinf)
    E = specmat.matrix_exponential(B, -t)
    damp = np.exp(-0.5 * _quad_form(Qt, f.freqs))
    return TrigPoly(f.coeffs * damp, f.freqs @ E)  # rows: (E^T xi)^T = xi^T E


def multiplier_apply(Qinf_source, Qinf_target, f):
    """Gaussian Fourier multiplier intertwining two OU semigroups with equal drift.

    Maps ``L^2`` of the source invariant law to ``L^2`` of the target one by
    ``(c, xi) -> (c exp(-<(S - T) xi, xi>/2), xi)`` where ``S`` and ``T`` are
    the source and target covariances.

    Raises
    ------
    OrderingError
        Unless ``S - T`` is positive semi-definite (tolerance 1e-12).
    """
    S = specmat.as_square(Qinf_source, "Qinf_source", allow_complex=False)
    T = specmat.as_square(Qinf_target, "Qinf_target", allow_complex=False)
    if S.shape != T.shape or f.dim != S.shape[0]:
        raise InvalidInputError("dimension mismatch")
    gap = S - T
    if not specmat.loewner_geq(S, T):
        raise OrderingError(
            f"source covariance must dominate target (min eigenvalue of difference "
            f"{specmat.min_eig_sym(gap):.3e})")
    return TrigPoly(f.coeffs * np.exp(-0.5 * _quad_form(gap, f.freqs)), f.freqs)


def adjoint_scaled_apply(alpha, delta, f):
    """Adjoint of the multiplier from ``N(0, D_delta)`` to ``N(0, D_alpha)``.

    On plane waves this is ``(c, xi) -> (c exp(-<D_{delta(alpha-delta)/alpha} xi, xi>/2),
    D_{delta/alpha} xi)``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if alpha.shape != delta.shape or alpha.ndim != 1 or f.dim != alpha.size:
        raise InvalidInputError("alpha, delta and f must share a dimension")
    if np.any(delta <= 0) or np.any(delta > alpha):
        raise InvalidInputError("need alpha_i >= delta_i > 0 componentwise")
    var = delta * (alpha - delta) / alpha
    damp = np.exp(-0.5 * (f.freqs**2) @ var)
    return TrigPoly(f.coeffs * damp, f.freqs * (delta / alpha))


def inner_product(f, g, weight):
    """``<f, g>`` in ``L^2`` of a centred Gaussian, conjugate-linear in ``g``."""
    weight = _as_weight(weight)
    if f.dim != weight.dim or g.dim != weight.dim:
        raise InvalidInputError("dimension mismatch")
    if len(f) == 0 or len(g) == 0:
        return 0j
    diff = (f.freqs[:, None, :] - g.freqs[None, :, :]).reshape(-1, f.dim)
    K = weight.char(diff).reshape(len(f), len(g))
    return complex(f.coeffs @ K @ g.coeffs.conj())


def norm(f, weight):
    return float(np.sqrt(max(inner_product(f, f, weight).real, 0.0)))


def equilibrium_project(f, weight):
    """Constant TrigPoly equal to the Gaussian mean of ``f``."""
    weight = _as_weight(weight)
    if f.dim != weight.dim:
        raise InvalidInputError("dimension mismatch")
    return TrigPoly.constant(complex(weight.char(f.freqs) @ f.coeffs), f.dim)


def fluctuation_norm(f, weight):
    """``|f - P_inf f|`` computed without subtracting two O(1) numbers.

    With ``a_j = <C xi_j, xi_j>``, the centred kernel is
    ``exp(-(a_j + a_k)/2) * expm1(<C xi_j, xi_k>)``; this keeps relative
    accuracy when all frequencies are small (late times).
    """
    weight = _as_weight(weight)
    if f.dim != weight.dim:
        raise InvalidInputError("dimension mismatch")
    if len(f) == 0:
        return 0.0
    C = weight.covariance
    X = f.freqs
    a = _quad_form(C, X)
    cross = X @ C @ X.T
    K = np.exp(-0.5 * (a[:, None] + a[None, :])) * np.expm1(cross)
    val = (f.coeffs.conj() @ K @ f.coeffs).real
    return float(np.sqrt(max(val, 0.0)))


# -- quadrature fallback ----------------------------------------------------

def gauss_hermite_expectation(func, weight, nodes=40):
    """``E func(X)`` for ``X ~ N(0, C)`` by a tensor Gauss-Hermite rule.

    ``func`` maps an (m, d) array of points to m values. Only intended for
    d <= 3; the grid has ``nodes**d`` points.
    """
    weight = _as_weight(weight)
    d = weight.dim
    if d > 3:
        raise InvalidInputError("quadrature fallback supports d <= 3")
    z, w = np.polynomial.hermite.hermgauss(nodes)
    grids = np.meshgrid(*([z] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack(np.meshgrid(*([w] * d), indexing="ij"), axis=0).reshape(d, -1), axis=0)
    L = specmat.sqrt_psd(weight.covariance)
    x = np.sqrt(2.0) * pts @ L.T
    return np.sum(wts * np.asarray(func(x))) / np.pi ** (d / 2)


def inner_product_quadrature(f, g, weight, nodes=40):
    """Quadrature version of :func:`inner_product` for arbitrary callables."""
    return complex(gauss_hermite_expectation(lambda x: f(x) * np.conj(g(x)), weight, nodes))
