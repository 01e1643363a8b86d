"""Fast invariant suite behind the ``selftest`` CLI scenario.

Each check is a small, self-contained property with a hard threshold; the
runner prints one PASS/FAIL line per property.  The heavyweight acceptance
checks live in the pytest suite; this is the quick smoke screen.
"""

from __future__ import annotations

import numpy as np

from . import asymptotics as asy
from .correlation import CorrelationMatrix, FarLimitBuilder, SubsystemGeometry, correlation_matrix_far
from .entanglement import (
    correlation_moments,
    entropy_from_spectrum,
    fermionic_negativity,
    measures,
    occupation_spectrum,
    renyi_entropy,
    von_neumann_entropy,
)
from .fockspace import gaussian_density_matrix, negativity_dm, partial_trace, vn_entropy_dm
from .numerics import QuadratureSpec, integrate, integrate_oscillatory
from .scattering import BiasState, ConstantTransmission, SingleImpurity, TrivialScatterer, s_matrix, transmission

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _random_correlation(rng, nl, nr):
    dim = nl + nr
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (h + h.conj().T)
    nu = rng.uniform(0.02, 0.98, size=dim)
    _, u = np.linalg.eigh(h)
    c = (u * nu) @ u.conj().T
    return CorrelationMatrix(c, tuple(range(-nl, 0)), tuple(range(1, nr + 1)))


@check
def smatrix_unitarity_grid():
    ks = np.linspace(1e-3, np.pi - 1e-3, 200)
    worst = 0.0
    for model in (SingleImpurity(0.7), SingleImpurity(2.5, 0.8), ConstantTransmission(0.3), TrivialScatterer()):
        for k in ks:
            worst = max(worst, s_matrix(model, k).unitarity_defect())
    assert worst < 1e-12, f"unitarity defect {worst}"


@check
def single_impurity_transmission_value():
    model = SingleImpurity(2.0, 1.0)
    assert abs(transmission(model, np.pi / 2) - 0.5) < 1e-14


@check
def kernel_dual_representations():
    for n in (0.5, 2.0):
        for p in (0.0, 0.3, 1.0):
            a = asy.log_kernel(n, p)
            b = asy.log_kernel_first_rep(n, p)
            assert abs(a - b) < 1e-8, f"kernel reps differ at n={n}, p={p}: {a} vs {b}"
    for n in (0.5, 2.0):
        for t in (0.0, 0.5, 0.8):
            a = asy.log_kernel_pair(n, t)
            b = asy.log_kernel_pair_first_rep(n, t)
            assert abs(a - b) < 1e-8, f"pair kernel reps differ at n={n}, T={t}"


@check
def kernel_exact_zeros():
    for p in (0.0, 0.25, 0.5, 1.0):
        assert abs(asy.log_kernel(1.0, p)) < 1e-10
    for n in (0.5, 2.0, 3.0):
        assert abs(asy.log_kernel(n, 1.0)) < 1e-9


@check
def integrate_linearity():
    rng = np.random.default_rng(7)
    spec = QuadratureSpec(abs_tol=1e-11)
    f = lambda x: np.exp(-x) * np.sin(3 * x)
    g = lambda x: 1.0 / (1.0 + x**2)
    alpha, beta = rng.normal(), rng.normal()
    lhs = integrate(lambda x: alpha * f(x) + beta * g(x), 0.0, 2.0, spec)
    rhs = alpha * integrate(f, 0.0, 2.0, spec) + beta * integrate(g, 0.0, 2.0, spec)
    assert abs(lhs - rhs) < 2e-11


@check
def oscillatory_matches_plain():
    spec = QuadratureSpec(abs_tol=1e-11)
    f = lambda k: np.sin(k) ** 2 / (np.sin(k) ** 2 + 1.0)
    a = integrate_oscillatory(f, 0.0, 0.3, 1.2, spec)
    b = integrate(f, 0.3, 1.2, spec)
    assert abs(a - b) < 5e-11


@check
def far_cross_block_zero_without_window():
    model = SingleImpurity(1.0)
    bias = BiasState(np.pi / 2, np.pi / 2)
    geom = SubsystemGeometry(0, 3, 5, 3, 5)
    cmat = correlation_matrix_far(model, bias, geom, "A")
    assert np.abs(cmat.cross_block()).max() == 0.0


@check
def far_matrix_spectrum_in_unit_interval():
    model = SingleImpurity(1.0)
    bias = BiasState(2 * np.pi / 3, np.pi / 2)
    geom = SubsystemGeometry(0, 0, 24, 0, 24)
    cmat = correlation_matrix_far(model, bias, geom, "A")
    nu, _ = occupation_spectrum(cmat)
    assert nu.min() > -1e-8 and nu.max() < 1 + 1e-8


@check
def entropy_spectral_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        cm = _random_correlation(rng, 3, 3)
        nu = np.linalg.eigvalsh(cm.matrix)
        direct = float(np.log(nu**2 + (1 - nu) ** 2).sum() / (1 - 2))
        assert abs(renyi_entropy(cm, 2.0) - direct) < 1e-10


@check
def moment_dual_path():
    rng = np.random.default_rng(13)
    cm = _random_correlation(rng, 2, 3)
    nu = np.linalg.eigvalsh(cm.matrix)
    for p in (1, 2, 3, 4):
        assert abs(correlation_moments(cm, p) - (nu**p).sum()) < 1e-10


@check
def fock_oracle_small():
    rng = np.random.default_rng(17)
    cm = _random_correlation(rng, 2, 2)
    rho = gaussian_density_matrix(cm.matrix)
    s_a = vn_entropy_dm(rho)
    s_l = vn_entropy_dm(partial_trace(rho, [0, 1], 4))
    s_r = vn_entropy_dm(partial_trace(rho, [2, 3], 4))
    rep = measures(cm, "vn", with_negativity=True)
    assert abs(rep.mutual_info - (s_l + s_r - s_a)) < 1e-8
    assert abs(rep.negativity - negativity_dm(rho, [0, 1], 4)) < 1e-8


@check
def negativity_product_state_zero():
    rng = np.random.default_rng(19)
    cm = _random_correlation(rng, 2, 2)
    c = cm.matrix.copy()
    c[:2, 2:] = 0.0
    c[2:, :2] = 0.0
    cm0 = CorrelationMatrix(c, cm.sites_left, cm.sites_right)
    assert abs(fermionic_negativity(cm0, 1)) < 1e-8


@check
def mutual_information_nonnegative():
    rng = np.random.default_rng(23)
    for _ in range(10):
        cm = _random_correlation(rng, 3, 2)
        assert measures(cm, "vn").mutual_info >= -1e-8


@check
def renyi_continuity_near_one():
    rng = np.random.default_rng(29)
    cm = _random_correlation(rng, 3, 3)
    vn = von_neumann_entropy(cm)
    lo = renyi_entropy(cm, 1.0 - 1e-4)
    hi = renyi_entropy(cm, 1.0 + 1e-4)
    assert abs(0.5 * (lo + hi) - vn) < 1e-3 * (1.0 + abs(vn))


@check
def prediction_relabeling_invariance():
    model = SingleImpurity(1.0)
    bias = BiasState(2 * np.pi / 3, np.pi / 2)
    geom = SubsystemGeometry(0, 7, 40, 3, 60)
    mirrored = SubsystemGeometry(0, 3, 60, 7, 40)
    a = asy.mi_prediction(model, bias, geom, 2.0)
    b = asy.mi_prediction(model, bias, mirrored, 2.0)
    assert abs(a.log_term - b.log_term) < 1e-10
    assert abs(a.linear_term - b.linear_term) < 1e-12


@check
def entropy_assembly_matches_mi():
    model = SingleImpurity(1.0)
    bias = BiasState(2 * np.pi / 3, np.pi / 2)
    ell = 80
    geom = SubsystemGeometry(0, 5, ell, 5, ell)
    mi = asy.mi_prediction(model, bias, geom, 2.0)
    s_l = asy.contiguous_entropy_prediction(model, bias, ell, "L", 2.0)
    s_r = asy.contiguous_entropy_prediction(model, bias, ell, "R", 2.0)
    s_a_log = asy.disjoint_symmetric_log_coefficient(2.0) * np.log(ell)
    assert abs((s_l.log_term + s_r.log_term - s_a_log) - mi.log_term) < 1e-9
    assert abs((s_l.linear_term + s_r.linear_term) - mi.linear_term) < 1e-10


def run_selftest(verbose_print=print) -> bool:
    """Run every registered property; returns True when all pass."""
    ok = True
    for fn in CHECKS:
        name = fn.__name__
        try:
            fn()
        except AssertionError as exc:
            ok = False
            verbose_print(f"FAIL {name}: {exc}")
        except Exception as exc:  # noqa: BLE001 - report, keep going
            ok = False
            verbose_print(f"FAIL {name}: {type(exc).__name__}: {exc}")
        else:
            verbose_print(f"PASS {name}")
    return ok
