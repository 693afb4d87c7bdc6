"""Acceptance criteria, shared by the test-suite and ``hypoco selftest``.

Each ``criterion_*`` function returns a :class:`CriterionResult`. Oracles
used here are independent of the main code paths: adaptive quadrature for
Lyapunov integrals, scipy's Beta function for moments, and closed-form
constants.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, special

from . import gaussalg, jacobi, nsa, ou, specmat
from .gaussalg import TrigPoly


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


def _random_stable(rng, d):
    A = rng.standard_normal((d, d))
    shift = max(0.0, -np.linalg.eigvals(A).real.min()) + rng.uniform(0.3, 1.5)
    B = A + shift * np.eye(d)
    G = rng.standard_normal((d, rng.integers(1, d + 1)))
    return B, G @ G.T


def lyapunov_quadrature(B, Q):
    """``int_0^inf exp(-sB) Q exp(-sB^T) ds`` by adaptive vector quadrature."""
    def integrand(s):
        E = specmat.matrix_exponential(B, -s)
        return E @ Q @ E.T
    val, _ = integrate.quad_vec(integrand, 0.0, np.inf, epsrel=1e-13, epsabs=1e-15)
    return val


def criterion_lyapunov(seed=1, count=50, tol_res=1e-10, tol_oracle=1e-8):
    rng = np.random.default_rng(seed)
    worst_res = worst_orc = 0.0
    for _ in range(count):
        d = int(rng.integers(1, 6))
        B, Q = _random_stable(rng, d)
        X = specmat.solve_lyapunov(B, Q)
        worst_res = max(worst_res, specmat.lyapunov_residual(B, Q, X))
        ref = lyapunov_quadrature(B, Q)
        worst_orc = max(worst_orc, float(np.max(np.abs(X - ref)) / max(1.0, np.max(np.abs(ref)))))
    ok = worst_res <= tol_res and worst_orc <= tol_oracle
    return CriterionResult(1, "Lyapunov solve", ok,
                           f"max residual {worst_res:.2e}, max deviation from quadrature {worst_orc:.2e}")


def criterion_intertwining(seed=2, models=20, pairs=20, tol=1e-10):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(models):
        d = int(rng.integers(1, 5))
        model = ou.random_model(rng, d)
        sw = ou.sandwich_construct(model)
        for _ in range(pairs):
            t = rng.uniform(0.0, 5.0)
            xi = rng.uniform(-2.0, 2.0, size=d)
            worst = max(worst, ou.verify_intertwinings(model, sw, t, xi))
    return CriterionResult(2, "OU intertwining identities", worst <= tol,
                           f"max residual {worst:.2e} over {models} models x {pairs} (t, xi)")


def criterion_composition(seed=3, models=20, tol=1e-10):
    rng = np.random.default_rng(seed)
    cases = [ou.build_model(np.diag([2.0, 16.0]), np.diag([1.0, 2.0]))]   # Qinf = diag(1, 4)
    cases += [ou.random_model(rng, int(rng.integers(1, 5))) for _ in range(models)]
    worst = 0.0
    for model in cases:
        sw = ou.sandwich_construct(model)
        xis = np.vstack([np.eye(model.dim), np.ones(model.dim), rng.uniform(-2, 2, (5, model.dim))])
        worst = max(worst, ou.verify_composition(model, sw, xis))
    sw0 = ou.sandwich_construct(cases[0])
    fixed = np.allclose(sw0.alpha, [4, 16], rtol=1e-14) and abs(sw0.kappa - 4) < 1e-14
    return CriterionResult(3, "composition equals the alpha semigroup at tstar", worst <= tol and fixed,
                           f"max residual {worst:.2e} (incl. Gramian at tstar); diag example alpha={sw0.alpha}, kappa={sw0.kappa:.15g}")


def criterion_ou_envelope(seed=4, functions=25, tol=1e-10):
    rng = np.random.default_rng(seed)
    model = ou.build_model(np.diag([0.0, 1.0]), [[1.0, 1.0], [0.0, 2.0]])
    sw = ou.sandwich_construct(model)
    ts = np.linspace(0.0, 10.0, 40)
    worst_env, worst_con = -np.inf, -np.inf
    for _ in range(functions):
        f = ou.random_trigpoly(rng, 2)
        c = ou.decay_curve(model, f, ts, sw)
        worst_env = max(worst_env, float(np.max(-c.margin)))
        early = ts <= sw.tstar
        worst_con = max(worst_con, float(np.max(c.ratios[early] - 1.0)))
    ok = worst_env <= tol and worst_con <= tol
    return CriterionResult(4, "degenerate OU decay within kappa exp(-gamma_1 t)", ok,
                           f"kappa={sw.kappa:.6g}, tstar={sw.tstar:.6g}, max(ratio-envelope)={worst_env:.2e}, "
                           f"max(ratio-1) for t<=tstar={worst_con:.2e}")


def criterion_coercive(seed=5, models=10, functions=5, tol=1e-10):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    ts = np.linspace(0.0, 10.0, 40)
    for _ in range(models):
        d = int(rng.integers(1, 5))
        b = rng.uniform(0.5, 3.0, d)
        model = ou.build_model(rng.uniform(0.5, 2.0) * np.diag(b), np.diag(b))
        for _ in range(functions):
            f = ou.random_trigpoly(rng, d)
            r = ou.decay_ratios(model.B, model.Qinf, f, ts)
            worst = max(worst, float(np.max(r - np.exp(-model.gap * ts))))
    return CriterionResult(5, "self-adjoint OU decays at exp(-gamma_1 t)", worst <= tol,
                           f"max(ratio - exp(-gamma_1 t)) = {worst:.2e}")


def criterion_jacobi(N=10_000, tol=1e-10):
    g, m = 3.0, 2.0
    C = jacobi.hypo_constant(g, m)
    t0 = jacobi.time_threshold(g, m)
    rep = jacobi.hypo_bound_check(g, m, np.linspace(t0, t0 + 5.0, 201), N=N, tol=tol)
    eq = max(abs(math.exp(-g * t) / jacobi.F_m_eval(g, m, 1) - C * math.exp(-g * t)) for t in rep.ts)
    ok = C == 4.0 and abs(t0 - math.log(9 / 4) / 3) <= 1e-12 and rep.passed and eq <= 1e-12
    return CriterionResult(6, "Jacobi multiplier bound", ok,
                           f"C={C!r}, t0={t0:.15g}, max(sup-envelope)={rep.worst_excess:.2e}, "
                           f"n=1 gap to envelope {eq:.1e}")


def criterion_beta_moments(tol=1e-12):
    pairs = [(3.0, 2.0), (2.5, 1.5), (5.0, 1.2), (10.0, 7.5), (4.0, 3.9)]
    worst = 0.0
    for g, mu in pairs:
        model = jacobi.build_jacobi_model(g, [mu])
        got = jacobi.beta_moments(model, 0, 10)
        n = np.arange(11)
        ref = np.exp(special.betaln(mu + n, g - mu) - special.betaln(mu, g - mu))
        worst = max(worst, float(np.max(np.abs(got - ref))))
    return CriterionResult(7, "moments with h = 0 match Beta(mu, gamma_1 - mu)", worst <= tol,
                           f"max deviation {worst:.2e} over {len(pairs)} parameter pairs")


def criterion_nsa_axioms(seed=8, count=50, ill=12, pairs=20, tol=1e-10):
    rng = np.random.default_rng(seed)
    worst = {}
    n_ill = 0
    var_ok = True
    for k in range(count):
        n = int(rng.integers(2, 13))
        spec = np.concatenate([[0.0], rng.uniform(0.1, 5.0, n - 1) + 1j * rng.uniform(-2, 2, n - 1)])
        model = nsa.build_sandbox(spec, seed=int(rng.integers(2**31)))
        # target 2e6 so the computed kappa clears 1e6 despite rounding in sigma_min
        cond = 2e6 if k < ill else float(np.exp(rng.uniform(0.0, np.log(1e3))))
        pair = nsa.random_intertwiner(model, rng, cond=cond)
        if pair.kappa >= 1e6:
            n_ill += 1
        fam = nsa.NsaFamily(model, pair.Lambda)
        res = nsa.nsa_axiom_residuals(fam, rng)
        res["functional"] = nsa.functional_integral(fam, pair.m_values)[1]
        for key, v in res.items():
            worst[key] = max(worst.get(key, 0.0), v)
        for _ in range(pairs):
            f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            var_ok &= nsa.variation_bound_check(fam, pair.m_values, f, g, pair.LambdaTilde, tol=tol).passed
    ok = max(worst.values()) <= tol and var_ok and n_ill >= 10
    return CriterionResult(8, "nsa resolution axioms and variation bounds", ok,
                           f"{n_ill} sandboxes with kappa >= 1e6; worst residuals "
                           + ", ".join(f"{k}={v:.1e}" for k, v in sorted(worst.items()))
                           + f"; variation bounds {'hold' if var_ok else 'FAIL'}")


LAGUERRE_NS = (5, 10, 20, 40)


def _laguerre_envelope_check(adjoint, tol):
    T = 0.5 * math.log(1.5)
    ts = np.linspace(T, T + 10.0, 60)
    worst = -np.inf
    kappas = []
    for N in LAGUERRE_NS:
        pair = nsa.laguerre_sandbox(1.0, N)
        if adjoint:
            pair = pair.adjoint()
        rep = nsa.general_convergence_check(pair, ts, samples=100, seed=N, tol=tol)
        worst = max(worst, float(np.max(rep.max_ratios - math.sqrt(2.0) * np.exp(-ts))))
        kappas.append(pair.kappa)
    return worst, kappas


def criterion_laguerre_sandbox(tol=1e-10):
    worst, kappas = _laguerre_envelope_check(False, tol)
    T = nsa.laguerre_threshold(1.0)
    diverges = all(b > a for a, b in zip(kappas, kappas[1:])) and abs(kappas[-1] - math.sqrt(40)) < 1e-8
    ok = worst <= tol and diverges and abs(T - 0.5 * math.log(1.5)) <= 1e-6
    return CriterionResult(9, "N-uniform multiplier envelope on Laguerre truncations", ok,
                           f"max(ratio - sqrt2 e^-t)={worst:.2e}; kappa(Lambda_N)="
                           + "/".join(f"{k:.4g}" for k in kappas) + f"; T={T:.12g}")


def criterion_laguerre_bound(tol=1e-12):
    rows = []
    ok = True
    for mp in (0.0, 0.5, 1.0, 2.0, 5.0):
        rep = nsa.laguerre_multiplier_bound(mp, N=1000, tol=tol)
        ok &= rep.passed
        rows.append(f"m={mp:g}: T={rep.T:.6g}, min margin {rep.margin.min():.1e}, exact n=1 {rep.tight_at_one}")
    return CriterionResult(10, "Laguerre multiplier bound", ok, "; ".join(rows))


def criterion_adjoint(tol=1e-10):
    worst, kappas = _laguerre_envelope_check(True, tol)
    return CriterionResult(11, "adjoint semigroup obeys the same envelope", worst <= tol,
                           f"max(ratio - sqrt2 e^-t)={worst:.2e} for N in {LAGUERRE_NS}")


CRITERIA = (criterion_lyapunov, criterion_intertwining, criterion_composition, criterion_ou_envelope,
            criterion_coercive, criterion_jacobi, criterion_beta_moments, criterion_nsa_axioms,
            criterion_laguerre_sandbox, criterion_laguerre_bound, criterion_adjoint)


def run_all(scale=1.0):
    """Run every criterion; ``scale`` multiplies the pass tolerances."""
    out = []
    for fn in CRITERIA:
        defaults = fn.__defaults__ or ()
        names = fn.__code__.co_varnames[:fn.__code__.co_argcount]
        kw = {n: v * scale for n, v in zip(names[-len(defaults):], defaults) if n.startswith("tol")}
        out.append(fn(**kw))
    return out
