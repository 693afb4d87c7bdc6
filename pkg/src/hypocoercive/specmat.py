"""Dense linear-algebra core.

Matrix exponentials, Lyapunov solves, finite-time Gramians, the Kalman rank
test for hypoellipticity, condition numbers and Loewner comparisons. Every
function is pure and works on small dense arrays (d <= 10 or so).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInputError, SingularityError, StabilityError

#: singular values below RANK_RTOL * sigma_max count as zero
RANK_RTOL = 1e-10
#: Loewner decisions use the min eigenvalue of the difference against this
LOEWNER_TOL = 1e-12
#: eigenvalues of a PSD input above -PSD_CLIP_TOL are clipped to zero
PSD_CLIP_TOL = 1e-12
SYMMETRY_RTOL = 1e-12


def as_square(A, name="matrix", allow_complex=True):
    """Validate and return ``A`` as a finite square 2-d array."""
    A = np.asarray(A)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.issubdtype(A.dtype, np.number):
        raise InvalidInputError(f"{name} must be numeric")
    if np.iscomplexobj(A):
        if not allow_complex:
            if np.any(A.imag != 0):
                raise InvalidInputError(f"{name} must be real")
            A = A.real
    else:
        A = A.astype(float)
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def is_symmetric(Q, rtol=SYMMETRY_RTOL):
    Q = np.asarray(Q)
    scale = max(1.0, np.max(np.abs(Q)))
    return bool(np.max(np.abs(Q - Q.conj().T)) <= rtol * scale)


def _require_symmetric(Q, name):
    if not is_symmetric(Q):
        raise InvalidInputError(f"{name} must be symmetric")
    return 0.5 * (Q + Q.conj().T)


def matrix_exponential(A, t=1.0):
    """Return ``exp(t A)``.

    Thin wrapper over scipy's scaling-and-squaring Pade routine; ``t`` may be
    negative.
    """
    A = as_square(A, "A")
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError("t must be finite")
    if t == 0.0:
        return np.eye(A.shape[0], dtype=A.dtype)
    return sla.expm(t * A)


def solve_lyapunov(B, Q):
    """Invariant covariance of the OU pair (Q, B).

    Solves ``B X + X B^* = Q``, which is the algebraic form of
    ``X = int_0^inf exp(-sB) Q exp(-sB^*) ds``.

    Parameters
    ----------
    B : (d, d) array_like
        Drift matrix; all eigenvalues must have positive real part.
    Q : (d, d) array_like
        Symmetric positive semi-definite diffusion matrix.

    Returns
    -------
    ndarray
        Symmetric PSD solution.

    Raises
    ------
    StabilityError
        If an eigenvalue of ``B`` has non-positive real part.
    InvalidInputError
        If ``Q`` is not symmetric or the shapes disagree.
    """
    B = as_square(B, "B")
    Q = _require_symmetric(as_square(Q, "Q", allow_complex=False), "Q")
    if B.shape != Q.shape:
        raise InvalidInputError(f"B and Q shapes differ: {B.shape} vs {Q.shape}")
    ev = np.linalg.eigvals(B)
    if np.any(ev.real <= 0):
        bad = ev[np.argmin(ev.real)]
        raise StabilityError(f"B has eigenvalue {bad} with non-positive real part")
    # Bartels-Stewart (Schur based)
    X = sla.solve_continuous_lyapunov(B, Q)
    X = 0.5 * (X + X.conj().T)
    if not np.iscomplexobj(B):
        X = X.real
    return X


def lyapunov_residual(B, Q, X):
    """Relative residual ``|B X + X B^* - Q| / |Q|`` in Frobenius norm."""
    B, Q, X = np.asarray(B), np.asarray(Q), np.asarray(X)
    r = B @ X + X @ B.conj().T - Q
    return float(np.linalg.norm(r) / max(np.linalg.norm(Q), np.finfo(float).tiny))


def gramian_at(B, Q, t, Qinf=None):
    """Finite-time Gramian ``Q_t = int_0^t exp(-sB) Q exp(-sB^*) ds``.

    Evaluated as ``Qinf - exp(-tB) Qinf exp(-tB^*)``; pass ``Qinf`` to skip
    the Lyapunov solve.
    """
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError(f"t must be a finite non-negative number, got {t}")
    if Qinf is None:
        Qinf = solve_lyapunov(B, Q)
    B = as_square(B, "B")
    Qinf = as_square(Qinf, "Qinf")
    if t == 0.0:
        return np.zeros_like(Qinf)
    E = matrix_exponential(B, -t)
    Qt = Qinf - E @ Qinf @ E.conj().T
    return 0.5 * (Qt + Qt.conj().T)


def sqrt_psd(Q):
    """Symmetric square root of a PSD matrix.

    Eigenvalues in ``[-PSD_CLIP_TOL * scale, 0)`` are clipped; anything more
    negative is rejected.
    """
    Q = _require_symmetric(as_square(Q, "Q"), "Q")
    w, U = np.linalg.eigh(Q)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.any(w < -PSD_CLIP_TOL * scale):
        raise InvalidInputError(f"matrix is not positive semi-definite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def numerical_rank(M, rtol=RANK_RTOL):
    s = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def kalman_hypoelliptic(B, Q):
    """Kalman rank test: ``rank [S, BS, ..., B^{d-1} S] == d`` with ``S = Q^{1/2}``.

    Equivalent to ``det Q_t > 0`` for every ``t > 0``, i.e. to ``ker Q``
    containing no invariant subspace of ``B^*``.
    """
    B = as_square(B, "B")
    S = sqrt_psd(Q)
    d = B.shape[0]
    if S.shape != B.shape:
        raise InvalidInputError("B and Q shapes differ")
    blocks = [S]
    for _ in range(d - 1):
        blocks.append(B @ blocks[-1])
    return numerical_rank(np.hstack(blocks)) == d


def condition_number(V):
    """Spectral condition number ``sigma_max / sigma_min``.

    Raises
    ------
    SingularityError
        If ``sigma_min <= RANK_RTOL * sigma_max``.
    """
    V = np.asarray(V)
    if V.ndim != 2 or not np.all(np.isfinite(V)):
        raise InvalidInputError("V must be a finite 2-d array")
    s = np.linalg.svd(V, compute_uv=False)
    if s[0] == 0 or s[-1] <= RANK_RTOL * s[0]:
        raise SingularityError("matrix is numerically singular")
    return float(s[0] / s[-1])


def min_eig_sym(X):
    X = np.asarray(X)
    return float(np.linalg.eigvalsh(0.5 * (X + X.conj().T))[0])


def loewner_greater(X, Y, tol=LOEWNER_TOL):
    """``X > Y`` in the Loewner order: ``min eig(X - Y) > tol``."""
    return min_eig_sym(np.asarray(X) - np.asarray(Y)) > tol


def loewner_geq(X, Y, tol=LOEWNER_TOL):
    """``X >= Y`` in the Loewner order: ``min eig(X - Y) >= -tol``."""
    return min_eig_sym(np.asarray(X) - np.asarray(Y)) >= -tol


@dataclass(frozen=True)
class EigenStructure:
    """``A = similarity @ diag(eigenvalues) @ inverse_similarity``.

    Columns of ``similarity`` are unit-norm eigenvectors.
    """

    eigenvalues: np.ndarray
    similarity: np.ndarray
    inverse_similarity: np.ndarray

    def reconstruct(self):
        return (self.similarity * self.eigenvalues) @ self.inverse_similarity

    def residuals(self, A):
        """(reconstruction relative residual, |V V^-1 - I|)."""
        A = np.asarray(A)
        rec = np.linalg.norm(self.reconstruct() - A) / max(np.linalg.norm(A), 1e-300)
        ident = np.linalg.norm(self.similarity @ self.inverse_similarity - np.eye(A.shape[0]))
        return float(rec), float(ident)


def eigenstructure(A):
    """Diagonalise ``A``; symmetric input goes through ``eigh`` so V is orthogonal."""
    A = as_square(A, "A")
    if is_symmetric(A):
        w, R = np.linalg.eigh(0.5 * (A + A.conj().T))
        return EigenStructure(w, R, R.conj().T)
    w, R = np.linalg.eig(A)
    R = R / np.linalg.norm(R, axis=0)
    s = np.linalg.svd(R, compute_uv=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise SingularityError("eigenvector matrix is numerically singular (defective matrix)")
    return EigenStructure(w, R, np.linalg.inv(R))
