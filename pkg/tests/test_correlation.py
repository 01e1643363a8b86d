import numpy as np
import pytest

from nessent.correlation import (
    CorrelationBuilder,
    CorrelationMatrix,
    SubsystemGeometry,
    correlation_entry_finite,
    correlation_matrix_far,
    correlation_matrix_finite,
    mirror_overlap,
    read_matrix_dump,
    write_matrix_dump,
)
from nessent.numerics import QuadratureSpec
from nessent.scattering import BiasState, ConstantTransmission, SingleImpurity, TrivialScatterer, wavefunction

BIAS = BiasState(2 * np.pi / 3, np.pi / 2)
IMPURITY = SingleImpurity(1.0)


def brute_force_overlap(geom):
    left_mirror = {m for m in range(geom.d_l + 1, geom.d_l + geom.ell_l + 1)}
    right = {m for m in range(geom.d_r + 1, geom.d_r + geom.ell_r + 1)}
    return len(left_mirror & right)


def test_mirror_overlap_symmetric():
    geom = SubsystemGeometry(0, 10, 50, 10, 50)
    assert mirror_overlap(geom) == (50, 0, 0)


def test_mirror_overlap_disjoint_images():
    geom = SubsystemGeometry(0, 0, 10, 20, 10)
    assert mirror_overlap(geom) == (0, 10, 10)


def test_mirror_overlap_partial():
    geom = SubsystemGeometry(0, 0, 100, 30, 100)
    assert mirror_overlap(geom) == (70, 30, 30)


@pytest.mark.parametrize("seed", range(8))
def test_mirror_overlap_brute_force(seed):
    rng = np.random.default_rng(seed)
    geom = SubsystemGeometry(
        0, int(rng.integers(0, 40)), int(rng.integers(1, 60)),
        int(rng.integers(0, 40)), int(rng.integers(1, 60)),
    )
    assert geom.ell_mirror == brute_force_overlap(geom)
    assert geom.delta_ell_l == geom.ell_l - geom.ell_mirror >= 0
    assert geom.delta_ell_r == geom.ell_r - geom.ell_mirror >= 0


def test_geometry_validation():
    with pytest.raises(ValueError):
        SubsystemGeometry(0, -1, 5, 0, 5)
    with pytest.raises(ValueError):
        SubsystemGeometry(0, 0, 0, 0, 5)


def test_geometry_site_lists():
    geom = SubsystemGeometry(1, 2, 3, 4, 2)
    assert geom.sites_left() == (-4, -5, -6)
    assert geom.sites_right() == (6, 7)


def test_entry_filled_sea_density():
    eq = BiasState(np.pi / 2, np.pi / 2)
    val = correlation_entry_finite(TrivialScatterer(), eq, 3, 3)
    assert val.real == pytest.approx(0.5, abs=1e-11)
    assert abs(val.imag) < 1e-12


@pytest.mark.parametrize("x", [1, 3, 6])
def test_entry_filled_sea_kernel(x):
    kf = np.pi / 3
    eq = BiasState(kf, kf)
    val = correlation_entry_finite(TrivialScatterer(), eq, 5 + x, 5)
    assert abs(val - np.sin(kf * x) / (np.pi * x)) < 1e-11


def trapezoid_entry(model, bias, j, m, npts=1_000_001):
    """Dense trapezoid oracle for the occupied-state integral."""
    total = 0.0 + 0.0j
    for lo, hi in ((-bias.k_fr, -1e-12), (1e-12, bias.k_fl)):
        ks = np.linspace(lo, hi, npts // 2)
        vals = np.conj(wavefunction(model, ks, j)) * wavefunction(model, ks, m)
        total += np.trapezoid(vals, ks)
    return total / (2.0 * np.pi)


def test_entry_against_trapezoid_oracle():
    val = correlation_entry_finite(IMPURITY, BIAS, 5, 7)
    assert abs(val - trapezoid_entry(IMPURITY, BIAS, 5, 7)) < 1e-8


def test_cross_entry_against_trapezoid_oracle():
    val = correlation_entry_finite(IMPURITY, BIAS, 4, -6)
    assert abs(val - trapezoid_entry(IMPURITY, BIAS, 4, -6)) < 1e-8


def test_entry_rejects_scattering_region():
    with pytest.raises(ValueError):
        correlation_entry_finite(IMPURITY, BIAS, 0, 3)


def test_finite_matrix_reduces_to_entry():
    geom = SubsystemGeometry(0, 2, 1, 2, 1)
    cm = correlation_matrix_finite(IMPURITY, BIAS, geom, "A_R")
    entry = correlation_entry_finite(IMPURITY, BIAS, 3, 3)
    assert cm.matrix.shape == (1, 1)
    assert abs(cm.matrix[0, 0] - entry) < 1e-14


def test_finite_matrix_hermitian_and_contractive():
    geom = SubsystemGeometry(0, 1, 10, 2, 10)
    cm = correlation_matrix_finite(TrivialScatterer(), BIAS, geom, "A")
    m = cm.matrix
    assert np.abs(m - m.conj().T).max() == 0.0
    nu = np.linalg.eigvalsh(m)
    assert nu.min() > -1e-10 and nu.max() < 1 + 1e-10


def test_finite_matrix_matches_entrywise_assembly():
    geom = SubsystemGeometry(0, 3, 4, 1, 3)
    cm = correlation_matrix_finite(IMPURITY, BIAS, geom, "A")
    sites = geom.sites_left() + geom.sites_right()
    builder = CorrelationBuilder(IMPURITY, BIAS)
    for a, sa in enumerate(sites):
        for b, sb in enumerate(sites):
            assert abs(cm.matrix[a, b] - builder.entry(sa, sb)) < 1e-12


def test_far_limit_entries_converge_with_distance():
    # entrywise limit of the finite-distance matrix; SM-style 1/d envelope
    geom = lambda d: SubsystemGeometry(0, d, 4, d, 4)
    far = correlation_matrix_far(IMPURITY, BIAS, geom(500), "A")
    for d in (500, 1500):
        fin = correlation_matrix_finite(IMPURITY, BIAS, geom(d), "A")
        assert np.abs(fin.matrix - far.matrix).max() < 3.0 / d


def test_far_limit_mirrored_bias_ordering():
    mirrored = BiasState(np.pi / 2, 2 * np.pi / 3)
    geom = SubsystemGeometry(0, 600, 4, 600, 4)
    far = correlation_matrix_far(IMPURITY, mirrored, geom, "A")
    fin = correlation_matrix_finite(IMPURITY, mirrored, geom, "A")
    assert np.abs(fin.matrix - far.matrix).max() < 3.0 / 600


def test_far_diag_constant_transmission():
    model = ConstantTransmission(0.37)
    cm = correlation_matrix_far(model, BIAS, SubsystemGeometry(0, 0, 3, 0, 3), "A_R")
    expected = BIAS.k_fr / np.pi + 0.37 * (BIAS.k_fl - BIAS.k_fr) / (2 * np.pi)
    assert cm.matrix[0, 0].real == pytest.approx(expected, abs=1e-12)


def test_far_cross_block_vanishes_without_window():
    eq = BiasState(np.pi / 2, np.pi / 2)
    cm = correlation_matrix_far(IMPURITY, eq, SubsystemGeometry(0, 5, 6, 5, 6), "A")
    assert np.abs(cm.cross_block()).max() == 0.0


def test_far_within_blocks_toeplitz():
    geom = SubsystemGeometry(0, 0, 12, 0, 12)
    cm = correlation_matrix_far(IMPURITY, BIAS, geom, "A")
    n = 12
    for block in (cm.matrix[:n, :n], cm.matrix[n:, n:]):
        for off in range(-n + 1, n):
            diag = np.diagonal(block, off)
            assert np.abs(diag - diag[0]).max() < 1e-12


def test_far_cross_block_carries_offset_phase():
    # cross entries depend on d_l - d_r only through a shifted argument
    g1 = SubsystemGeometry(0, 9, 5, 2, 5)
    g2 = SubsystemGeometry(0, 16, 5, 9, 5)
    c1 = correlation_matrix_far(IMPURITY, BIAS, g1, "A")
    c2 = correlation_matrix_far(IMPURITY, BIAS, g2, "A")
    assert np.abs(c1.matrix - c2.matrix).max() < 1e-13


def test_far_finite_mi_agreement_moderate_distance():
    from nessent.entanglement import measures

    geom = SubsystemGeometry(0, 200, 20, 200, 20)
    fin = correlation_matrix_finite(IMPURITY, BIAS, geom, "A")
    far = correlation_matrix_far(IMPURITY, BIAS, geom, "A")
    mi_fin = measures(fin, "vn").mutual_info
    mi_far = measures(far, "vn").mutual_info
    assert abs(mi_fin - mi_far) < 0.05


def test_matrix_dump_round_trip(tmp_path):
    geom = SubsystemGeometry(0, 1, 3, 1, 2)
    cm = correlation_matrix_far(IMPURITY, BIAS, geom, "A")
    path = tmp_path / "matrix.bin"
    write_matrix_dump(cm, path)
    back = read_matrix_dump(path)
    assert back.shape == cm.matrix.shape
    assert np.abs(back - cm.matrix).max() == 0.0
    # layout: uint64 dim then row-major little-endian float64 pairs
    raw = path.read_bytes()
    assert len(raw) == 8 + 16 * cm.dim**2
    assert int.from_bytes(raw[:8], "little") == cm.dim


def test_partition_block_views():
    geom = SubsystemGeometry(0, 1, 2, 1, 3)
    cm = correlation_matrix_far(IMPURITY, BIAS, geom, "A")
    assert cm.block_left().matrix.shape == (2, 2)
    assert cm.block_right().matrix.shape == (3, 3)
    assert cm.cross_block().shape == (2, 3)
    with pytest.raises(ValueError):
        CorrelationMatrix(np.eye(3), (-1,), (1,))
