import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hypocoercive import specmat
from hypocoercive.errors import InvalidInputError, SingularityError, StabilityError


def stable_pair(seed, d=3):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    B = A + (max(0.0, -np.linalg.eigvals(A).real.min()) + 0.5) * np.eye(d)
    G = rng.standard_normal((d, d))
    return B, G @ G.T


# -- matrix exponential -----------------------------------------------------

def test_expm_zero_time_is_identity():
    A = np.random.default_rng(0).standard_normal((4, 4))
    assert np.array_equal(specmat.matrix_exponential(A, 0.0), np.eye(4))


def test_expm_diagonal():
    E = specmat.matrix_exponential(np.diag([1.0, 2.0]), 1.0)
    assert np.allclose(E, np.diag([np.e, np.e**2]), rtol=1e-14)


def test_expm_nilpotent_series_truncates():
    E = specmat.matrix_exponential([[0.0, 1.0], [0.0, 0.0]], 1.0)
    assert np.allclose(E, [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_expm_matches_eigendecomposition_route():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 4))
    w, R = np.linalg.eig(A)
    ref = (R * np.exp(0.7 * w)) @ np.linalg.inv(R)
    assert np.allclose(specmat.matrix_exponential(A, 0.7), ref.real, rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-2, 2), st.floats(-2, 2))
def test_expm_semigroup_property(seed, s, t):
    A = np.random.default_rng(seed).standard_normal((3, 3))
    lhs = specmat.matrix_exponential(A, s + t)
    rhs = specmat.matrix_exponential(A, s) @ specmat.matrix_exponential(A, t)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(1.0, np.linalg.norm(lhs))


def test_expm_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        specmat.matrix_exponential([[np.nan]], 1.0)
    with pytest.raises(InvalidInputError):
        specmat.matrix_exponential([[1.0]], np.inf)


# -- Lyapunov ---------------------------------------------------------------

def test_lyapunov_identity_drift():
    assert np.allclose(specmat.solve_lyapunov(np.eye(3), 2 * np.eye(3)), np.eye(3), atol=1e-15)


def test_lyapunov_decoupled_scalars():
    b, q = np.array([0.5, 1.0, 3.0]), np.array([1.0, 0.0, 2.0])
    assert np.allclose(specmat.solve_lyapunov(np.diag(b), np.diag(q)), np.diag(q / (2 * b)), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_lyapunov_matches_quadrature(seed):
    B, Q = stable_pair(seed)

    def integrand(s):
        E = specmat.matrix_exponential(B, -s)
        return E @ Q @ E.T

    ref, _ = integrate.quad_vec(integrand, 0.0, np.inf, epsrel=1e-12, epsabs=1e-14)
    X = specmat.solve_lyapunov(B, Q)
    assert np.max(np.abs(X - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))
    assert specmat.lyapunov_residual(B, Q, X) <= 1e-10
    assert np.allclose(X, X.T) and np.linalg.eigvalsh(X).min() >= -1e-12


def test_lyapunov_errors():
    with pytest.raises(StabilityError):
        specmat.solve_lyapunov([[0.0, 1.0], [0.0, 0.0]], np.eye(2))
    with pytest.raises(StabilityError):
        specmat.solve_lyapunov([[-1.0]], [[1.0]])
    with pytest.raises(InvalidInputError):
        specmat.solve_lyapunov(np.eye(2), [[1.0, 1.0], [0.0, 1.0]])


# -- Gramian ----------------------------------------------------------------

def test_gramian_zero_time():
    B, Q = stable_pair(2)
    assert np.array_equal(specmat.gramian_at(B, Q, 0.0), np.zeros((3, 3)))


@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_gramian_scalar(t):
    assert specmat.gramian_at([[1.0]], [[2.0]], t)[0, 0] == pytest.approx(1 - np.exp(-2 * t), rel=1e-14)


def test_gramian_large_time_limit():
    B, Q = stable_pair(3)
    Qinf = specmat.solve_lyapunov(B, Q)
    assert np.max(np.abs(specmat.gramian_at(B, Q, 200.0) - Qinf)) <= 1e-10


def test_gramian_negative_time():
    with pytest.raises(InvalidInputError):
        specmat.gramian_at(np.eye(2), np.eye(2), -1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 5), st.floats(0, 5))
def test_gramian_flow_property(seed, t, s):
    B, Q = stable_pair(seed)
    Qinf = specmat.solve_lyapunov(B, Q)
    E = specmat.matrix_exponential(B, -t)
    lhs = specmat.gramian_at(B, Q, t + s, Qinf)
    rhs = specmat.gramian_at(B, Q, t, Qinf) + E @ specmat.gramian_at(B, Q, s, Qinf) @ E.T
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(Qinf)))


def test_gramian_monotone_in_loewner_order():
    B, Q = stable_pair(4)
    Qinf = specmat.solve_lyapunov(B, Q)
    ts = np.linspace(0, 5, 11)
    for a, b in zip(ts, ts[1:]):
        assert specmat.loewner_geq(specmat.gramian_at(B, Q, b, Qinf), specmat.gramian_at(B, Q, a, Qinf))


# -- Kalman test ------------------------------------------------------------

def test_kalman_full_rank_diffusion():
    B, _ = stable_pair(5)
    assert specmat.kalman_hypoelliptic(B, np.eye(3))


def test_kalman_kernel_is_invariant_subspace():
    assert not specmat.kalman_hypoelliptic(np.diag([1.0, 2.0]), np.diag([1.0, 0.0]))


def test_kalman_degenerate_example_matches_svd_oracle():
    B, Q = np.array([[1.0, 1.0], [0.0, 2.0]]), np.diag([0.0, 1.0])
    K = np.hstack([Q, B @ Q])  # Q is a projection so Q^{1/2} = Q
    s = np.linalg.svd(K, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) == 2
    assert specmat.kalman_hypoelliptic(B, Q)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_kalman_implies_positive_gramian(seed):
    rng = np.random.default_rng(seed)
    B, _ = stable_pair(seed)
    v = rng.standard_normal((3, 1))
    Q = v @ v.T
    if specmat.kalman_hypoelliptic(B, Q):
        Qinf = specmat.solve_lyapunov(B, Q)
        for t in (0.1, 1.0):
            assert np.linalg.eigvalsh(specmat.gramian_at(B, Q, t, Qinf)).min() > 0


def test_kalman_rejects_asymmetric():
    with pytest.raises(InvalidInputError):
        specmat.kalman_hypoelliptic(np.eye(2), [[1.0, 1.0], [0.0, 1.0]])


def test_sqrt_psd_clipping():
    R = specmat.sqrt_psd(np.diag([4.0, -1e-14]))
    assert np.allclose(R, np.diag([2.0, 0.0]))
    with pytest.raises(InvalidInputError):
        specmat.sqrt_psd(np.diag([1.0, -1e-6]))


# -- condition numbers and eigenstructure -----------------------------------

def test_condition_number_examples():
    assert specmat.condition_number(np.eye(3)) == 1.0
    assert specmat.condition_number(np.diag([4.0, 1.0])) == pytest.approx(4.0, rel=1e-15)


def test_condition_number_svd_oracle():
    V = np.random.default_rng(6).standard_normal((4, 4))
    s = np.linalg.svd(V, compute_uv=False)
    assert specmat.condition_number(V) == pytest.approx(s[0] / s[-1], rel=1e-12)


def test_condition_number_spd_is_eigen_ratio():
    G = np.random.default_rng(7).standard_normal((4, 4))
    S = G @ G.T + np.eye(4)
    w = np.linalg.eigvalsh(S)
    assert specmat.condition_number(S) == pytest.approx(w[-1] / w[0], rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_condition_number_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((4, 4))
    U, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    assert specmat.condition_number(U @ V) == pytest.approx(specmat.condition_number(V), rel=1e-10)


def test_condition_number_singular():
    with pytest.raises(SingularityError):
        specmat.condition_number([[1.0, 1.0], [1.0, 1.0]])


def test_loewner_tolerances():
    assert specmat.loewner_greater(np.eye(2), 0.5 * np.eye(2))
    assert not specmat.loewner_greater(np.eye(2), np.eye(2))
    assert specmat.loewner_geq(np.eye(2), np.eye(2) + 1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_eigenstructure_residuals(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4))
    es = specmat.eigenstructure(A)
    rec, ident = es.residuals(A)
    assert rec <= 1e-10 and ident <= 1e-12
    assert np.allclose(np.linalg.norm(es.similarity, axis=0), 1.0)


def test_eigenstructure_defective():
    with pytest.raises(SingularityError):
        specmat.eigenstructure([[1.0, 1.0], [0.0, 1.0]])


def test_as_square_validation():
    with pytest.raises(InvalidInputError):
        specmat.as_square(np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        specmat.as_square([[1j]], allow_complex=False)
