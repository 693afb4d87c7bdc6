"""Hypoelliptic Ornstein-Uhlenbeck models and their explicit intertwiners.

For a drift ``B`` with real positive diagonalisable spectrum we work in the
frame ``V`` with ``V B V^-1 = D_b``. There the invariant covariance
``Qinf' = V Qinf V^T`` is squeezed between two diagonal covariances
``D_delta <= Qinf' <= D_alpha`` that belong to self-adjoint OU semigroups with
the same drift. Gaussian multipliers between the three spaces intertwine the
semigroups, and chaining them reproduces the alpha semigroup at time
``tstar = log(kappa) / gamma_1``. That yields the decay estimate
``ratio(t) <= kappa * exp(-gamma_1 t)``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gaussalg, specmat
from .errors import (DegenerateInputError, HypothesisError, InvalidInputError,
                     SingularityError, StabilityError)
from .gaussalg import TrigPoly

EIG_IMAG_TOL = 1e-10
#: relative residual of B = V^-1 D_b V above which B counts as defective
DIAG_RESIDUAL_TOL = 1e-8
DEGENERATE_FLUCT = 1e-14


@dataclass(frozen=True)
class OuModel:
    """Validated pair ``(Q, B)`` with its diagonalising frame.

    ``frame`` is the matrix ``V`` with ``V B V^-1 = diag(b)``; its inverse has
    unit-norm columns (eigenvectors of ``B``).
    """

    Q: np.ndarray
    B: np.ndarray
    b: np.ndarray
    frame: np.ndarray
    frame_inv: np.ndarray
    Qinf: np.ndarray
    gap: float
    hypoelliptic: bool = True
    repeated_eigenvalues: bool = False

    @property
    def dim(self):
        return self.B.shape[0]

    @property
    def Qinf_frame(self):
        """``V Qinf V^T``, the invariant covariance in the diagonal frame."""
        X = self.frame @ self.Qinf @ self.frame.T
        return 0.5 * (X + X.T)

    @property
    def Q_frame(self):
        X = self.frame @ self.Q @ self.frame.T
        return 0.5 * (X + X.T)

    @property
    def weight(self):
        return gaussalg.GaussianWeight(self.Qinf)

    def to_frame(self, f):
        """``f -> f(V^-1 x)``: frequencies map by ``V^-T``."""
        return f.map_frequencies(self.frame_inv.T)

    def frame_model(self):
        """The equivalent model ``(V Q V^T, D_b)``."""
        return build_model(self.Q_frame, np.diag(self.b))


def build_model(Q, B):
    """Validate ``(Q, B)`` and derive ``Qinf``, the frame and the gap.

    Raises
    ------
    HypothesisError
        If ``B`` has a non-real or non-positive eigenvalue, is not
        diagonalisable, or the pair fails the Kalman rank test.
    InvalidInputError
        If ``Q`` is not symmetric PSD or shapes differ.
    """
    B = specmat.as_square(B, "B", allow_complex=False)
    Q = specmat.as_square(Q, "Q", allow_complex=False)
    if Q.shape != B.shape:
        raise InvalidInputError(f"Q and B shapes differ: {Q.shape} vs {B.shape}")
    if not specmat.is_symmetric(Q):
        raise InvalidInputError("Q must be symmetric")
    Q = 0.5 * (Q + Q.T)
    specmat.sqrt_psd(Q)  # PSD check

    ev = np.linalg.eigvals(B)
    if np.any(np.abs(ev.imag) > EIG_IMAG_TOL * max(1.0, np.max(np.abs(ev)))):
        raise HypothesisError(f"spectrum of B must lie in (0, inf); found complex eigenvalue {ev[np.argmax(np.abs(ev.imag))]}")
    if np.any(ev.real <= 0):
        raise HypothesisError(f"spectrum of B must lie in (0, inf); found eigenvalue {ev.real.min():.6g}")
    try:
        es = specmat.eigenstructure(B)
    except SingularityError as exc:
        raise HypothesisError(f"B must be diagonalisable: {exc}") from None
    rec, _ = es.residuals(B)
    if rec > DIAG_RESIDUAL_TOL:
        raise HypothesisError(f"B must be diagonalisable (similarity residual {rec:.2e})")
    b = np.real(es.eigenvalues)
    order = np.argsort(b)
    b = b[order]
    R = np.real(es.similarity)[:, order]
    V = np.linalg.inv(R)
    try:
        Qinf = specmat.solve_lyapunov(B, Q)
    except StabilityError as exc:
        raise HypothesisError(str(exc)) from None
    if not specmat.kalman_hypoelliptic(B, Q):
        raise HypothesisError("hypoellipticity fails: ker Q contains an invariant subspace of B^T")
    repeated = bool(np.any(np.diff(b) <= 1e-8 * max(1.0, b[-1])))
    return OuModel(Q=Q, B=B, b=b, frame=V, frame_inv=R, Qinf=Qinf,
                   gap=float(b[0]), hypoelliptic=True, repeated_eigenvalues=repeated)


@dataclass(frozen=True)
class SandwichData:
    """Diagonal covariances squeezing ``V Qinf V^T`` and the matching OU data."""

    alpha: np.ndarray
    delta: np.ndarray
    Qalpha: np.ndarray
    Qdelta: np.ndarray
    tstar: float
    kappa: float
    b: np.ndarray


def sandwich_construct(model):
    """Build the alpha/delta sandwich in the diagonal frame.

    ``alpha_i = q_min (q_max/q_min)^(b_i/b_min)``, ``delta_i = q_min`` with
    ``q_min, q_max`` the extreme eigenvalues of ``V Qinf V^T``. The diffusion
    matrices ``2 D_alpha D_b`` and ``2 q_min D_b`` have invariant covariances
    ``D_alpha`` and ``D_delta`` under the drift ``D_b``.
    """
    Qf = model.Qinf_frame
    q = np.linalg.eigvalsh(Qf)
    qmin, qmax = float(q[0]), float(q[-1])
    if qmin <= 0:
        raise HypothesisError("invariant covariance is not positive definite")
    b = model.b
    ratio = qmax / qmin
    alpha = qmin * ratio ** (b / b[0])
    delta = np.full_like(b, qmin)
    # V Qinf V^T is SPD, so its condition number is the eigenvalue ratio
    kappa = qmax / qmin
    tstar = float(np.log(kappa) / model.gap)
    return SandwichData(alpha=alpha, delta=delta, Qalpha=np.diag(2.0 * alpha * b),
                        Qdelta=np.diag(2.0 * qmin * b), tstar=max(tstar, 0.0),
                        kappa=kappa, b=b.copy())


def sandwich_report(model, sw):
    """Ordering margins and Lyapunov residuals of the sandwich."""
    Db = np.diag(sw.b)
    Qf = model.Qinf_frame
    return {
        "alpha_margin": specmat.min_eig_sym(np.diag(sw.alpha) - Qf),
        "delta_margin": specmat.min_eig_sym(Qf - np.diag(sw.delta)),
        "alpha_lyapunov": specmat.lyapunov_residual(Db, sw.Qalpha, np.diag(sw.alpha)),
        "delta_lyapunov": specmat.lyapunov_residual(Db, sw.Qdelta, np.diag(sw.delta)),
        "ordering_holds": bool(specmat.loewner_geq(np.diag(sw.alpha), Qf)
                               and specmat.loewner_geq(Qf, np.diag(sw.delta))),
    }


def _plane(xi):
    return TrigPoly.plane_wave(xi)


def _chains(model, sw, t, xi):
    """Both sides of the three intertwining relations for one plane wave."""
    Db = np.diag(sw.b)
    Qf = model.Qinf_frame
    Da, Dd = np.diag(sw.alpha), np.diag(sw.delta)
    e = _plane(xi)

    def P(f):
        return gaussalg.ou_apply(Db, Qf, t, f)

    def Pa(f):
        return gaussalg.ou_apply(Db, Da, t, f)

    def Pd(f):
        return gaussalg.ou_apply(Db, Dd, t, f)

    def La(f):
        return gaussalg.multiplier_apply(Da, Qf, f)

    def Ld(f):
        return gaussalg.multiplier_apply(Qf, Dd, f)

    def Lstar(f):
        return gaussalg.adjoint_scaled_apply(sw.alpha, sw.delta, f)

    return [
        (P(La(e)), La(Pa(e))),                      # P Lambda_a = Lambda_a P^a
        (Pd(Ld(e)), Ld(P(e))),                      # P^d Lambda_d = Lambda_d P
        (Pa(Lstar(Ld(e))), Lstar(Ld(P(e)))),        # P^a L* Lambda_d = L* Lambda_d P
    ]


def verify_intertwinings(model, sw, t, xis):
    """Largest TrigPoly residual over the intertwining relations."""
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError("t must be non-negative")
    worst = 0.0
    for xi in np.atleast_2d(np.asarray(xis, dtype=float)):
        if xi.size != model.dim:
            raise InvalidInputError("frequency dimension mismatch")
        for lhs, rhs in _chains(model, sw, t, xi):
            worst = max(worst, gaussalg.trig_residual(lhs, rhs))
    return worst


def verify_composition(model, sw, xis):
    """Residual of ``L*_{delta,alpha} Lambda_delta Lambda_alpha = P^alpha_tstar`` on plane waves.

    Also compares the Gramian of the alpha semigroup at ``tstar`` with
    ``D_{(alpha^2 - delta^2)/alpha}``; the larger residual is returned.
    """
    Db = np.diag(sw.b)
    Qf = model.Qinf_frame
    Da, Dd = np.diag(sw.alpha), np.diag(sw.delta)
    Qt = specmat.gramian_at(Db, sw.Qalpha, sw.tstar, Qinf=Da)
    expected = np.diag((sw.alpha**2 - sw.delta**2) / sw.alpha)
    worst = float(np.max(np.abs(Qt - expected)) / max(1.0, np.max(sw.alpha)))
    for xi in np.atleast_2d(np.asarray(xis, dtype=float)):
        e = _plane(xi)
        lhs = gaussalg.adjoint_scaled_apply(
            sw.alpha, sw.delta,
            gaussalg.multiplier_apply(Qf, Dd, gaussalg.multiplier_apply(Da, Qf, e)))
        rhs = gaussalg.ou_apply(Db, Da, sw.tstar, e)
        worst = max(worst, gaussalg.trig_residual(lhs, rhs))
    return worst


@dataclass(frozen=True)
class DecayCurve:
    ts: np.ndarray
    ratios: np.ndarray
    envelope_C: float
    envelope_rate: float
    tstar: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def envelope(self):
        return self.envelope_C * np.exp(-self.envelope_rate * self.ts)

    @property
    def margin(self):
        return self.envelope - self.ratios

    def holds(self, tol=1e-10):
        return bool(np.all(self.ratios <= self.envelope + tol))

    def contraction_holds(self, tol=1e-10):
        return bool(np.all(self.ratios <= 1.0 + tol))


def _check_ts(ts):
    ts = np.asarray(ts, dtype=float).reshape(-1)
    if ts.size == 0 or not np.all(np.isfinite(ts)) or np.any(ts < 0):
        raise InvalidInputError("ts must be finite and non-negative")
    if np.any(np.diff(ts) <= 0):
        raise InvalidInputError("ts must be strictly increasing")
    return ts


def decay_ratios(B, Qinf, f, ts):
    """``|P_t f - P_inf f| / |f - P_inf f|`` in ``L^2`` of ``N(0, Qinf)``."""
    w = gaussalg.GaussianWeight(Qinf)
    base = gaussalg.fluctuation_norm(f, w)
    if base <= DEGENERATE_FLUCT:
        raise DegenerateInputError("f coincides with its equilibrium projection; decay ratio undefined")
    return np.array([gaussalg.fluctuation_norm(gaussalg.ou_apply(B, Qinf, t, f), w) / base
                     for t in ts])


def decay_curve(model, f, ts, sw=None):
    """Sampled decay ratios of ``f`` with the envelope ``kappa exp(-gamma_1 t)``."""
    ts = _check_ts(ts)
    if f.dim != model.dim:
        raise InvalidInputError("f has the wrong dimension")
    sw = sw or sandwich_construct(model)
    ratios = decay_ratios(model.B, model.Qinf, f, ts)
    return DecayCurve(ts=ts, ratios=ratios, envelope_C=sw.kappa, envelope_rate=model.gap,
                      tstar=sw.tstar, meta={"repeated_eigenvalues": model.repeated_eigenvalues})


# -- random test objects ----------------------------------------------------

def random_model(rng, d, degenerate=True, max_kappa=1e6, max_tries=200):
    """Random valid model of dimension ``d``.

    ``B = R diag(b) R^-1`` with ``b`` in [0.5, 3] and a moderately conditioned
    ``R``; ``Q`` has rank one when ``degenerate`` (and d > 1), else full rank.
    Draws with ``kappa(V Qinf V^T) > max_kappa`` are rejected.
    """
    for _ in range(max_tries):
        b = np.sort(rng.uniform(0.5, 3.0, size=d))
        R = np.eye(d) + 0.5 * rng.standard_normal((d, d))
        if np.linalg.cond(R) > 50:
            continue
        B = R @ np.diag(b) @ np.linalg.inv(R)
        if degenerate and d > 1:
            v = rng.standard_normal((d, 1))
            Q = v @ v.T
        else:
            G = rng.standard_normal((d, d))
            Q = G @ G.T + 0.1 * np.eye(d)
        try:
            model = build_model(Q, B)
        except HypothesisError:
            continue
        if np.linalg.cond(model.Qinf_frame) <= max_kappa:
            return model
    raise RuntimeError("could not draw a valid random model")


def random_trigpoly(rng, d, terms=3, radius=2.0):
    """Sum of ``terms`` plane waves with ``|xi|_2 <= radius`` and complex coefficients."""
    xi = rng.standard_normal((terms, d))
    xi *= (radius * rng.uniform(0.2, 1.0, size=(terms, 1))) / np.linalg.norm(xi, axis=1, keepdims=True)
    c = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    return TrigPoly(c, xi)
