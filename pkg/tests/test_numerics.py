import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nessent.numerics import (
    NonConvergence,
    NotHermitian,
    QuadratureSpec,
    Singular,
    eig_general,
    eig_hermitian,
    integrate,
    integrate_oscillatory,
    mat_inverse,
    mat_mul,
)

SPEC = QuadratureSpec(abs_tol=1e-12)


def alternating_zeta2():
    # sum_{k>=1} (-1)^(k+1)/k^2 = pi^2/12; truncating an alternating series
    # halfway into the next term leaves an error ~ 1/K^3, far below 1e-12
    k = np.arange(1, 100_002, dtype=float)
    terms = (-1.0) ** (k + 1) / k**2
    return terms[:-1].sum() + 0.5 * terms[-1]


def test_integrate_polynomial_exact():
    assert abs(integrate(lambda x: x, 0.0, 1.0, SPEC) - 0.5) < 1e-13


def test_integrate_sine():
    assert abs(integrate(np.sin, 0.0, np.pi, SPEC) - 2.0) < 1e-12


def test_integrate_log_singularity_dilogarithm():
    oracle = alternating_zeta2()
    val = integrate(lambda x: np.log1p(x) / x, 0.0, 1.0, SPEC, singular_left=True)
    assert abs(val - oracle) < 1e-11


def test_integrate_empty_range():
    assert integrate(np.sin, 1.0, 1.0, SPEC) == 0.0


def test_integrate_rejects_reversed_range():
    with pytest.raises(ValueError):
        integrate(np.sin, 1.0, 0.0, SPEC)


def test_integrate_nonconvergence_on_budget():
    tiny = QuadratureSpec(abs_tol=1e-14, max_panels=4)
    with pytest.raises(NonConvergence):
        integrate(lambda x: np.sin(40 * x) / (x + 1e-3), 0.0, 3.0, tiny)


def test_oscillatory_closed_form_fast_phase():
    val = integrate_oscillatory(lambda k: np.ones_like(k), 200.0, 0.0, np.pi, SPEC)
    exact = (np.exp(1j * 200 * np.pi) - 1.0) / (200j)
    assert abs(val - exact) < 1e-10


def test_oscillatory_zero_phase_is_plain_length():
    val = integrate_oscillatory(lambda k: np.ones_like(k), 0.0, -1.0, 2.5, SPEC)
    assert abs(val - 3.5) < 1e-12


def test_oscillatory_self_consistency_two_paths():
    # same integrand evaluated with the oscillatory rule and with the plain
    # adaptive rule given a 10x larger panel budget
    f = lambda k: np.sin(k) ** 2 / (np.sin(k) ** 2 + 1.0)
    g = lambda k: f(k) * np.exp(1j * 500.0 * k)
    a = integrate_oscillatory(f, 500.0, np.pi / 2, 2 * np.pi / 3, QuadratureSpec(abs_tol=1e-12, max_panels=2000))
    b = integrate(g, np.pi / 2, 2 * np.pi / 3, QuadratureSpec(abs_tol=1e-12, max_panels=20000))
    assert abs(a - b) < 1e-9


def test_oscillatory_panel_budget_raises():
    with pytest.raises(NonConvergence):
        integrate_oscillatory(lambda k: np.ones_like(k), 1e7, 0.0, np.pi, QuadratureSpec(max_panels=100))


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_integrate_linearity(alpha, beta):
    f = lambda x: np.exp(-x) * np.sin(3 * x)
    g = lambda x: 1.0 / (1.0 + x**2)
    lhs = integrate(lambda x: alpha * f(x) + beta * g(x), 0.0, 2.0, SPEC)
    rhs = alpha * integrate(f, 0.0, 2.0, SPEC) + beta * integrate(g, 0.0, 2.0, SPEC)
    assert abs(lhs - rhs) < 2e-12 * (1 + abs(alpha) + abs(beta))


def test_eig_hermitian_identity():
    assert np.allclose(eig_hermitian(np.eye(3)), [1, 1, 1])


def test_eig_hermitian_pauli_x():
    vals = eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(vals, [-1.0, 1.0])


def test_eig_hermitian_cubic_oracle():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = 0.5 * (m + m.conj().T)
    # characteristic cubic expanded explicitly from the entries
    tr = np.trace(m).real
    sum2 = 0.5 * (np.trace(m).real ** 2 - np.trace(m @ m).real)
    det = np.linalg.det(m).real
    roots = np.roots([1.0, -tr, sum2, -det])
    assert np.abs(roots.imag).max() < 1e-8
    assert np.allclose(np.sort(roots.real), eig_hermitian(m), atol=1e-10)


def test_eig_hermitian_known_decomposition():
    rng = np.random.default_rng(5)
    h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    _, u = np.linalg.eigh(h + h.conj().T)
    lam = np.sort(rng.uniform(-2, 2, size=6))
    m = (u * lam) @ u.conj().T
    assert np.abs(eig_hermitian(m) - lam).max() < 1e-10


def test_eig_hermitian_rejects_nonhermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_hermitian_trace_sum():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = 0.5 * (m + m.conj().T)
    assert abs(eig_hermitian(m).sum() - np.trace(m).real) < 1e-9 * 8


def test_eig_general_diagonal():
    vals = eig_general(np.diag([2.0, 3.0j]))
    assert sorted(vals, key=lambda z: z.real) == pytest.approx([3.0j, 2.0])


def test_eig_general_nilpotent():
    vals = eig_general(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.abs(vals).max() < 1e-12


def test_eig_general_determinant_residual_oracle():
    rng = np.random.default_rng(11)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    norm = np.linalg.norm(m, 2)
    for lam in eig_general(m):
        assert abs(np.linalg.det(m - lam * np.eye(4))) < 1e-8 * norm**4


def test_eig_general_similarity_invariance():
    rng = np.random.default_rng(13)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    s = rng.normal(size=(5, 5)) + np.eye(5) * 4.0
    transformed = np.linalg.solve(s, m @ s)
    a = np.sort_complex(eig_general(m))
    b = np.sort_complex(eig_general(transformed))
    assert np.abs(a - b).max() < 1e-8


def test_eig_general_trace_sum():
    rng = np.random.default_rng(17)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert abs(eig_general(m).sum() - np.trace(m)) < 1e-8 * 6


def test_inverse_identity_and_diagonal():
    assert np.allclose(mat_inverse(np.eye(4)), np.eye(4))
    assert np.allclose(mat_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_inverse_residual_oracle():
    rng = np.random.default_rng(19)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)) + 3.0 * np.eye(5)
    inv = mat_inverse(m)
    assert np.abs(m @ inv - np.eye(5)).max() < 1e-10


def test_inverse_singular_raises():
    with pytest.raises(Singular):
        mat_inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_mat_mul_shapes():
    a = np.ones((2, 2))
    with pytest.raises(ValueError):
        mat_mul(a, np.ones((3, 3)))
    assert np.allclose(mat_mul(a, a), 2 * np.ones((2, 2)))


def test_quadrature_spec_invariants():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(nodes_per_panel=2)
    with pytest.raises(ValueError):
        QuadratureSpec(max_panels=0)
