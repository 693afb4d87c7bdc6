import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from hypocoercive import gaussalg as ga
from hypocoercive import specmat
from hypocoercive.errors import InvalidInputError, OrderingError
from hypocoercive.gaussalg import TrigPoly


def wave(xi, c=1.0):
    return TrigPoly.plane_wave(np.atleast_1d(np.asarray(xi, dtype=float)), c)


def random_poly(rng, d, terms=3):
    c = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    return TrigPoly(c, rng.uniform(-2, 2, (terms, d)))


def stable_pair(seed, d=2):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    B = A + (max(0.0, -np.linalg.eigvals(A).real.min()) + 0.5) * np.eye(d)
    G = rng.standard_normal((d, d))
    Q = G @ G.T
    return B, Q, specmat.solve_lyapunov(B, Q)


# -- container --------------------------------------------------------------

def test_merge_and_prune():
    f = TrigPoly([1.0, 2.0, -3.0], [[0.5], [0.5 + 1e-14], [0.5]])
    assert len(f) == 0
    g = TrigPoly([1.0, 2.0], [[1.0], [1.0]])
    assert len(g) == 1 and g.coeffs[0] == 3


def test_arrays_are_read_only_and_input_untouched():
    freqs = np.array([[1.0], [2.0]])
    f = TrigPoly([1.0, 1.0], freqs)
    assert freqs.flags.writeable
    with pytest.raises(ValueError):
        f.coeffs[0] = 5


def test_rows_roundtrip():
    f = random_poly(np.random.default_rng(0), 2)
    g = TrigPoly.from_rows(f.to_rows(), 2)
    assert ga.trig_residual(f, g) == 0.0


def test_evaluation_and_product():
    rng = np.random.default_rng(1)
    f, g = random_poly(rng, 2), random_poly(rng, 2)
    x = rng.standard_normal((5, 2))
    assert np.allclose((f * g)(x), f(x) * g(x), rtol=1e-12)
    assert np.allclose((f - g)(x), f(x) - g(x), rtol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        wave([1.0]) + wave([1.0, 2.0])


def test_compose_linear():
    rng = np.random.default_rng(2)
    f, A = random_poly(rng, 2), rng.standard_normal((2, 2))
    x = rng.standard_normal((4, 2))
    assert np.allclose(f.compose_linear(A)(x), f(x @ A.T), rtol=1e-12)


# -- OU semigroup -----------------------------------------------------------

def test_ou_zero_time_is_identity():
    B, _, Qinf = stable_pair(0)
    f = random_poly(np.random.default_rng(0), 2)
    assert ga.trig_residual(ga.ou_apply(B, Qinf, 0.0, f), f) == 0.0


def test_ou_fixes_constants():
    B, _, Qinf = stable_pair(1)
    c = TrigPoly.constant(2.5, 2)
    assert ga.trig_residual(ga.ou_apply(B, Qinf, 3.0, c), c) == 0.0


def test_ou_scalar_closed_form():
    # B = Q = 1: Qinf = 1/2, Q_t = (1 - e^{-2t})/2
    t = 0.8
    out = ga.ou_apply([[1.0]], [[0.5]], t, wave([1.0]))
    assert out.freqs[0, 0] == pytest.approx(np.exp(-t), rel=1e-15)
    assert out.coeffs[0] == pytest.approx(np.exp(-0.25 * (1 - np.exp(-2 * t))), rel=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_ou_matches_mehler_quadrature(seed):
    # oracle: P_t f(x) = E f(e^{-tB} x + Q_t^{1/2} Z), Z standard normal
    B, Q, Qinf = stable_pair(seed)
    t = 0.5
    f = random_poly(np.random.default_rng(seed), 2)
    E = specmat.matrix_exponential(B, -t)
    L = specmat.sqrt_psd(specmat.gramian_at(B, Q, t, Qinf))
    z, w = special.roots_hermite(30)
    Z = np.sqrt(2) * np.stack(np.meshgrid(z, z, indexing="ij"), -1).reshape(-1, 2)
    W = np.outer(w, w).ravel() / np.pi
    Pf = ga.ou_apply(B, Qinf, t, f)
    for x in np.random.default_rng(seed + 10).standard_normal((4, 2)):
        ref = np.sum(W * f(E @ x + Z @ L.T))
        assert abs(Pf(x) - ref) <= 1e-10


def test_ou_negative_time():
    with pytest.raises(InvalidInputError):
        ga.ou_apply([[1.0]], [[0.5]], -0.1, wave([1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 3), st.floats(0, 3))
def test_ou_semigroup_law(seed, s, t):
    B, _, Qinf = stable_pair(seed)
    f = random_poly(np.random.default_rng(seed), 2)
    lhs = ga.ou_apply(B, Qinf, s + t, f)
    rhs = ga.ou_apply(B, Qinf, s, ga.ou_apply(B, Qinf, t, f))
    assert ga.trig_residual(lhs, rhs) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 5))
def test_ou_contraction_and_invariance(seed, t):
    B, _, Qinf = stable_pair(seed)
    f = random_poly(np.random.default_rng(seed), 2)
    Pf = ga.ou_apply(B, Qinf, t, f)
    assert ga.norm(Pf, Qinf) <= ga.norm(f, Qinf) * (1 + 1e-12) + 1e-14
    # invariance: E[P_t f] = E[f] under the stationary law
    assert abs(ga.equilibrium_project(Pf, Qinf).constant_term()
               - ga.equilibrium_project(f, Qinf).constant_term()) <= 1e-12


# -- multipliers ------------------------------------------------------------

def test_multiplier_scalar_example():
    out = ga.multiplier_apply([[2.0]], [[1.0]], wave([1.0]))
    assert out.coeffs[0] == pytest.approx(np.exp(-0.5), rel=1e-15)
    assert out.freqs[0, 0] == 1.0


def test_multiplier_identity_when_equal():
    f = random_poly(np.random.default_rng(3), 2)
    assert ga.trig_residual(ga.multiplier_apply(np.eye(2), np.eye(2), f), f) == 0.0


def test_multiplier_ordering_error():
    with pytest.raises(OrderingError):
        ga.multiplier_apply([[1.0]], [[2.0]], wave([1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_multiplier_is_contraction(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2, 2))
    T = G @ G.T + 0.1 * np.eye(2)
    H = rng.standard_normal((2, 2))
    S = T + H @ H.T
    f = random_poly(rng, 2)
    assert ga.norm(ga.multiplier_apply(S, T, f), T) <= ga.norm(f, S) * (1 + 1e-12) + 1e-14


def test_adjoint_scaled_example():
    out = ga.adjoint_scaled_apply([2.0], [1.0], wave([1.0]))
    assert out.freqs[0, 0] == 0.5
    assert out.coeffs[0] == pytest.approx(np.exp(-0.25), rel=1e-15)


@pytest.mark.parametrize("y", [-1.3, 0.0, 0.7, 2.0])
def test_adjoint_matches_convolution_oracle(y):
    # adjoint of g -> E g(. + W), W ~ N(0, a - d), from L^2(N(0,a)) to L^2(N(0,d)):
    # (f rho_d) * phi_{a-d} / rho_a
    a, d, xi = 3.0, 1.2, 0.9
    f = wave([xi])
    integrand = lambda x, part: getattr(
        np.exp(1j * xi * x) * stats.norm.pdf(x, scale=np.sqrt(d)) * stats.norm.pdf(y - x, scale=np.sqrt(a - d)), part)
    re = integrate.quad(integrand, -np.inf, np.inf, args=("real",), epsabs=1e-14, epsrel=1e-12)[0]
    im = integrate.quad(integrand, -np.inf, np.inf, args=("imag",), epsabs=1e-14, epsrel=1e-12)[0]
    ref = (re + 1j * im) / stats.norm.pdf(y, scale=np.sqrt(a))
    assert abs(ga.adjoint_scaled_apply([a], [d], f)([y]) - ref) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_adjointness_identity(seed):
    rng = np.random.default_rng(seed)
    delta = rng.uniform(0.2, 1.0, 2)
    alpha = delta + rng.uniform(0.0, 2.0, 2)
    f, g = random_poly(rng, 2), random_poly(rng, 2)
    lhs = ga.inner_product(ga.adjoint_scaled_apply(alpha, delta, f), g, np.diag(alpha))
    rhs = ga.inner_product(f, ga.multiplier_apply(np.diag(alpha), np.diag(delta), g), np.diag(delta))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_adjoint_requires_ordering():
    with pytest.raises(InvalidInputError):
        ga.adjoint_scaled_apply([1.0], [2.0], wave([1.0]))


# -- inner products ---------------------------------------------------------

def test_inner_product_example_against_gauss_hermite_64():
    val = ga.inner_product(wave([1.0]), TrigPoly.constant(1.0, 1), [[1.0]])
    assert val == pytest.approx(np.exp(-0.5), rel=1e-15)
    z, w = special.roots_hermite(64)
    ref = np.sum(w * np.exp(1j * np.sqrt(2) * z)) / np.sqrt(np.pi)
    assert abs(val - ref) <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_inner_product_closed_form_vs_quadrature(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2, 2))
    C = G @ G.T + 0.3 * np.eye(2)
    f, g = random_poly(rng, 2), random_poly(rng, 2)
    closed = ga.inner_product(f, g, C)
    quad = ga.inner_product_quadrature(f, g, C, nodes=60)
    assert abs(closed - quad) <= 1e-10


def test_equilibrium_project_idempotent_and_mean():
    rng = np.random.default_rng(4)
    f = random_poly(rng, 2)
    C = np.diag([0.5, 2.0])
    P = ga.equilibrium_project(f, C)
    assert ga.trig_residual(ga.equilibrium_project(P, C), P) <= 1e-15
    assert abs(ga.inner_product(f - P, TrigPoly.constant(1.0, 2), C)) <= 1e-14


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-4, 2.0))
def test_fluctuation_norm_matches_naive_when_well_scaled(seed, scale):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, 2) * 1.0
    f = TrigPoly(f.coeffs, f.freqs * scale)
    C = np.diag([1.0, 0.5])
    naive = ga.norm(f - ga.equilibrium_project(f, C), C)
    fl = ga.fluctuation_norm(f, C)
    assert abs(fl - naive) <= 1e-7 * max(ga.norm(f, C), 1e-300)


def test_fluctuation_norm_small_frequency_relative_accuracy():
    # |e_xi - E e_xi|^2 = 1 - e^{-xi^2} for N(0, 1): ~ xi^2 at small xi
    xi = 1e-6
    fl = ga.fluctuation_norm(wave([xi]), [[1.0]])
    assert fl == pytest.approx(np.sqrt(-np.expm1(-xi**2)), rel=1e-9)


def test_weight_validation():
    with pytest.raises(InvalidInputError):
        ga.GaussianWeight(np.diag([1.0, 0.0]))
    with pytest.raises(InvalidInputError):
        ga.gauss_hermite_expectation(lambda x: x[:, 0], np.eye(4))
