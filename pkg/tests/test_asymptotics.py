import numpy as np
import pytest

from nessent import asymptotics as asy
from nessent.correlation import SubsystemGeometry
from nessent.scattering import BiasState, ConstantTransmission, SingleImpurity, TrivialScatterer

BIAS = BiasState(2 * np.pi / 3, np.pi / 2)
IMPURITY = SingleImpurity(1.0)
HALF = ConstantTransmission(0.5)
DK6 = BiasState(np.pi / 2 + np.pi / 6, np.pi / 2)


# --- kernels ---------------------------------------------------------------


@pytest.mark.parametrize("n", [0.5, 1.5, 2.0, 3.0])
def test_kernel_dual_representations(n):
    for p in np.round(np.arange(0.0, 1.0001, 0.1), 10):
        assert abs(asy.log_kernel(n, p) - asy.log_kernel_first_rep(n, p)) < 1e-8
        assert abs(asy.log_kernel_pair(n, p) - asy.log_kernel_pair_first_rep(n, p)) < 1e-8


def test_kernel_identically_zero_at_order_one():
    for p in np.round(np.arange(0.0, 1.0001, 0.1), 10):
        assert abs(asy.log_kernel(1.0, p)) < 1e-10


@pytest.mark.parametrize("n", [0.5, 1.5, 2.0, 3.0])
def test_kernel_vanishes_at_full_step(n):
    assert abs(asy.log_kernel(n, 1.0)) < 1e-9


def test_kernel_exact_value_at_zero_step():
    # log_kernel(n, 0) = (1-n)(1+n)/(12 n), from the dilogarithm integral
    for n in (0.5, 2.0, 3.0):
        assert asy.log_kernel(n, 0.0) == pytest.approx((1 - n) * (1 + n) / (12 * n), abs=1e-11)


def test_pair_kernel_symmetric_in_t_and_r():
    for n in (0.5, 2.0):
        for t in (0.1, 0.3, 0.45, 0.9):
            assert abs(asy.log_kernel_pair(n, t) - asy.log_kernel_pair(n, 1 - t)) < 1e-10


def test_vn_kernels_symmetric():
    for t in (0.1, 0.25, 0.4, 0.8):
        assert abs(asy.log_kernel_vn(t) - asy.log_kernel_vn(1 - t)) < 1e-10
        assert abs(asy.log_kernel_pair_vn(t) - asy.log_kernel_pair_vn(1 - t)) < 1e-10


def test_vn_kernel_finite_difference_oracle():
    h = 1e-4
    for t in (0.2, 0.5, 0.7):
        r = 1 - t

        def combo(n):
            return (asy.log_kernel(n, t) + asy.log_kernel(n, r) - (1 / n - n) / 12.0) / (1 - n)

        central = 0.5 * (combo(1 - h) + combo(1 + h))
        assert abs(asy.log_kernel_vn(t) - central) < 1e-3 * max(abs(central), 1e-3)


def test_vn_pair_kernel_finite_difference_oracle():
    h = 1e-4
    for t in (0.2, 0.5, 0.7):

        def combo(n):
            return asy.log_kernel_pair(n, t) / (1 - n)

        central = 0.5 * (combo(1 - h) + combo(1 + h))
        assert abs(asy.log_kernel_pair_vn(t) - central) < 1e-3 * max(abs(central), 1e-3)


def test_vn_entropy_kernel_values_and_identity():
    assert asy.log_kernel_entropy_vn(1.0) == pytest.approx(0.0, abs=1e-11)
    assert asy.log_kernel_entropy_vn(0.0) == pytest.approx(1.0 / 6.0, abs=1e-11)
    for t in (0.15, 0.5, 0.85):
        combined = asy.log_kernel_entropy_vn(t) + asy.log_kernel_entropy_vn(1 - t) - 1.0 / 6.0
        assert abs(asy.log_kernel_vn(t) - combined) < 1e-10


# --- volume coefficients ----------------------------------------------------


def test_volume_coefficients_trivial_model():
    for order in ("vn", 0.5, 2.0):
        assert asy.volume_coefficient_mi(TrivialScatterer(), BIAS, order) == pytest.approx(0.0, abs=1e-14)
        assert asy.volume_coefficient_entropy(TrivialScatterer(), BIAS, order) == pytest.approx(0.0, abs=1e-14)
    assert asy.volume_coefficient_negativity(TrivialScatterer(), BIAS) == pytest.approx(0.0, abs=1e-14)


def test_volume_coefficient_mi_constant_half_vn():
    # window pi/6, constant integrand ln 2: coefficient = ln2 / 6
    assert asy.volume_coefficient_mi(HALF, DK6, "vn") == pytest.approx(np.log(2) / 6, abs=1e-12)


def test_volume_coefficient_mi_constant_half_order_half():
    # (1/(1-1/2)) * (dk/pi) * ln(2 sqrt(1/2)) = ln2 / 6
    assert asy.volume_coefficient_mi(HALF, DK6, 0.5) == pytest.approx(np.log(2) / 6, abs=1e-12)


def test_volume_coefficient_entropy_constant_half_order_two():
    # (1/(1-2)) * (dk/2pi) * ln(2 * (1/2)^2) = (dk/2pi) ln 2
    expected = (np.pi / 6) / (2 * np.pi) * np.log(2)
    assert asy.volume_coefficient_entropy(HALF, DK6, 2.0) == pytest.approx(expected, abs=1e-12)


def test_volume_coefficient_negativity_constant_half():
    # ln(sqrt(1/2) + sqrt(1/2)) = ln sqrt 2 -> coefficient ln2 / 12
    assert asy.volume_coefficient_negativity(HALF, DK6) == pytest.approx(np.log(2) / 12, abs=1e-12)


def test_negativity_coefficient_is_half_of_order_half_mi():
    for model in (IMPURITY, HALF):
        lhs = asy.volume_coefficient_negativity(model, BIAS)
        rhs = 0.5 * asy.volume_coefficient_mi(model, BIAS, 0.5)
        assert abs(lhs - rhs) < 1e-12


def test_zero_window_kills_volume_terms():
    flat = BiasState(np.pi / 2, np.pi / 2)
    assert asy.volume_coefficient_mi(IMPURITY, flat, "vn") == 0.0
    assert asy.mi_prediction(IMPURITY, flat, SubsystemGeometry(0, 0, 30, 0, 30), "vn").linear_term == 0.0


# --- predictions -------------------------------------------------------------


def test_mi_prediction_symmetric_two_path_oracle():
    # general sorted-length path vs the symbolic symmetric-case reduction
    ell = 64
    geom = SubsystemGeometry(0, 9, ell, 9, ell)
    for n in (0.5, 2.0, 3.0):
        pred = asy.mi_prediction(IMPURITY, BIAS, geom, n)
        total = 0.0
        for kf in (BIAS.k_fl, BIAS.k_fr):
            from nessent.scattering import transmission

            t = transmission(IMPURITY, kf)
            total += asy.log_kernel(n, t) + asy.log_kernel(n, 1 - t)
        coeff = total / (1 - n) - (1 + n) / (6 * n)
        assert abs(pred.log_term - coeff * np.log(ell)) < 1e-10
        assert pred.total_minus_constant == pred.linear_term + pred.log_term


def test_mi_prediction_touching_case():
    # mirror image of A_L exactly touches A_R: no linear term, pair kernel
    # multiplies ln(ell_l * ell_r / (ell_l + ell_r))
    ell_l, ell_r = 40, 60
    geom = SubsystemGeometry(0, ell_r + 5, ell_l, 5, ell_r)
    assert geom.ell_mirror == 0
    for n in (0.5, 2.0):
        pred = asy.mi_prediction(IMPURITY, BIAS, geom, n)
        assert pred.linear_term == 0.0
        from nessent.scattering import transmission

        expected = 0.0
        for kf in (BIAS.k_fl, BIAS.k_fr):
            t = transmission(IMPURITY, kf)
            expected += 0.5 * (asy.log_kernel_pair(n, t) / (1 - n)) * np.log(ell_l * ell_r / (ell_l + ell_r))
        assert abs(pred.log_term - expected) < 1e-10


def test_mi_prediction_relabeling_invariance():
    geom = SubsystemGeometry(0, 7, 40, 3, 60)
    swapped = SubsystemGeometry(0, 3, 60, 7, 40)
    for order in ("vn", 2.0):
        a = asy.mi_prediction(IMPURITY, BIAS, geom, order)
        b = asy.mi_prediction(IMPURITY, BIAS, swapped, order)
        assert abs(a.log_term - b.log_term) < 1e-10
        assert abs(a.linear_term - b.linear_term) < 1e-12


def test_mi_prediction_shift_invariance():
    a = asy.mi_prediction(IMPURITY, BIAS, SubsystemGeometry(0, 11, 30, 4, 50), 2.0)
    b = asy.mi_prediction(IMPURITY, BIAS, SubsystemGeometry(0, 111, 30, 104, 50), 2.0)
    assert abs(a.log_term - b.log_term) < 1e-12
    assert abs(a.linear_term - b.linear_term) < 1e-12


def test_mi_prediction_continuity_across_regimes():
    # away from exact degeneracies the log term varies smoothly with the
    # offset; scan across both containment boundaries
    vals = []
    for delta in range(-8, 68, 1):
        geom = SubsystemGeometry(0, 20 + delta, 30, 20, 50)
        vals.append(asy.mi_prediction(IMPURITY, BIAS, geom, 2.0).total_minus_constant)
    steps = np.abs(np.diff(vals))
    interior = [s for i, s in enumerate(steps) if abs(i - 8) > 1 and abs(i - 28) > 1]
    assert max(interior) < 0.2


def test_contiguous_entropy_trivial_model():
    # clean chain: two full occupation steps, log coefficient (1+n)/(6n)
    for n, ell in ((2.0, 50), (3.0, 120)):
        pred = asy.contiguous_entropy_prediction(TrivialScatterer(), BIAS, ell, "L", n)
        assert pred.linear_term == pytest.approx(0.0, abs=1e-13)
        assert pred.log_term == pytest.approx((1 + n) / (6 * n) * np.log(ell), abs=1e-9)
    vn = asy.contiguous_entropy_prediction(TrivialScatterer(), BIAS, 80, "L", "vn")
    assert vn.log_term == pytest.approx(np.log(80) / 3, abs=1e-9)


def test_entropy_assembly_reproduces_mi_symmetric():
    ell = 90
    geom = SubsystemGeometry(0, 4, ell, 4, ell)
    for order in ("vn", 2.0):
        mi = asy.mi_prediction(IMPURITY, BIAS, geom, order)
        s_l = asy.contiguous_entropy_prediction(IMPURITY, BIAS, ell, "L", order)
        s_r = asy.contiguous_entropy_prediction(IMPURITY, BIAS, ell, "R", order)
        s_a_log = asy.disjoint_symmetric_log_coefficient(order) * np.log(ell)
        assert abs((s_l.log_term + s_r.log_term - s_a_log) - mi.log_term) < 1e-9
        assert abs((s_l.linear_term + s_r.linear_term) - mi.linear_term) < 1e-10


def test_contiguous_entropy_constant_residual():
    # numeric far-limit order-2 entropy of one interval minus its prediction
    # is length-independent (the fitted constant) across a 4x length span
    from nessent.correlation import SubsystemGeometry, correlation_matrix_far, FarLimitBuilder
    from nessent.entanglement import renyi_entropy

    builder = FarLimitBuilder(IMPURITY, BIAS)
    residuals = []
    for ell in (50, 100, 200):
        geom = SubsystemGeometry(0, 0, ell, 0, ell)
        cm = correlation_matrix_far(IMPURITY, BIAS, geom, "A_L", builder=builder)
        pred = asy.contiguous_entropy_prediction(IMPURITY, BIAS, ell, "L", 2.0)
        residuals.append(renyi_entropy(cm, 2.0) - pred.total_minus_constant)
    assert max(residuals) - min(residuals) < 0.05


def test_ci_prediction_trivial_and_assembly():
    geom = SubsystemGeometry(0, 6, 70, 6, 70)
    trivial = asy.ci_prediction(TrivialScatterer(), BIAS, geom)
    assert trivial.linear_term == pytest.approx(0.0, abs=1e-13)
    ci = asy.ci_prediction(IMPURITY, BIAS, geom)
    mi = asy.mi_prediction(IMPURITY, BIAS, geom, "vn")
    s_l = asy.contiguous_entropy_prediction(IMPURITY, BIAS, 70, "L", "vn")
    assert abs(ci.log_term - (mi.log_term - s_l.log_term)) < 1e-10
    assert abs(ci.linear_term - (mi.linear_term - s_l.linear_term)) < 1e-10


def test_ci_linear_constant_half():
    geom = SubsystemGeometry(0, 0, 36, 0, 36)
    pred = asy.ci_prediction(HALF, DK6, geom)
    assert pred.linear_term == pytest.approx(36 * np.log(2) / 12, abs=1e-10)


def test_negativity_prediction_symmetric_log_term():
    ell = 48
    geom = SubsystemGeometry(0, 3, ell, 3, ell)
    pred = asy.negativity_prediction(IMPURITY, BIAS, geom)
    from nessent.scattering import transmission

    coeff = -0.25
    for kf in (BIAS.k_fl, BIAS.k_fr):
        t = transmission(IMPURITY, kf)
        coeff += asy.log_kernel(0.5, t) + asy.log_kernel(0.5, 1 - t)
    assert abs(pred.log_term - coeff * np.log(ell)) < 1e-10
    assert abs(pred.linear_term - 0.5 * asy.mi_prediction(IMPURITY, BIAS, geom, 0.5).linear_term) < 1e-12


def test_negativity_prediction_asymmetric_refuses_log():
    geom = SubsystemGeometry(0, 0, 30, 5, 40)
    pred = asy.negativity_prediction(IMPURITY, BIAS, geom)
    assert pred.log_term == 0.0
    with pytest.raises(asy.GeometryError):
        asy.negativity_prediction(IMPURITY, BIAS, geom, with_log_term=True)


def test_disjoint_symmetric_log_coefficient_values():
    assert asy.disjoint_symmetric_log_coefficient("vn") == pytest.approx(2 / 3)
    assert asy.disjoint_symmetric_log_coefficient(2.0) == pytest.approx(0.5)
    assert asy.disjoint_symmetric_log_coefficient(3.0) == pytest.approx(4 / 9)


def test_predictions_bracket_vn_near_order_one():
    geom = SubsystemGeometry(0, 5, 45, 5, 45)
    h = 1e-4
    vn = asy.mi_prediction(IMPURITY, BIAS, geom, "vn").total_minus_constant
    lo = asy.mi_prediction(IMPURITY, BIAS, geom, 1 - h).total_minus_constant
    hi = asy.mi_prediction(IMPURITY, BIAS, geom, 1 + h).total_minus_constant
    assert abs(0.5 * (lo + hi) - vn) < 1e-3 * (1 + abs(vn))
    assert min(lo, hi) - 1e-3 * (1 + abs(vn)) <= vn <= max(lo, hi) + 1e-3 * (1 + abs(vn))
