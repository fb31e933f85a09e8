import numpy as np
import pytest
from numpy.testing import assert_allclose

from mubsep.errors import FamilyMismatchError, PositivityError, ShapeError, UnsupportedDimensionError
from mubsep.measurements import (
    GsicSet,
    MumSet,
    build_family,
    build_gsic,
    build_mub_prime,
    build_mum,
    gell_mann_basis,
    gsic_generators,
    gsic_max_t,
    gsic_parameter,
    max_t,
    min_eigenvalue,
    mub_as_mum,
    mum_generators,
    mum_kappa,
    validate_family,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def assert_family_ok(fam, tol=1e-10):
    report = validate_family(fam)
    assert report.ok, report.residuals
    assert max(report.residuals.values()) <= tol


def test_gell_mann_qubit_is_scaled_pauli():
    basis = gell_mann_basis(2)
    assert_allclose(basis.ops, np.array([SX, SY, SZ]) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("d", range(2, 9))
def test_gell_mann_orthonormal_traceless_hermitian(d):
    basis = gell_mann_basis(d)
    assert basis.ops.shape == (d * d - 1, d, d)
    assert_allclose(basis.gram(), np.eye(d * d - 1), atol=1e-12)
    assert_allclose(np.trace(basis.ops, axis1=1, axis2=2), 0, atol=1e-12)
    assert_allclose(basis.ops, np.conj(np.swapaxes(basis.ops, 1, 2)), atol=1e-15)


def test_gell_mann_rejects_d1():
    with pytest.raises(ShapeError):
        gell_mann_basis(1)


def test_qubit_mubs_are_z_x_y():
    mub = build_mub_prime(2)
    assert mub.count == 3
    for b in range(3):
        for b2 in range(b + 1, 3):
            sq = np.abs(mub.bases[b].conj().T @ mub.bases[b2]) ** 2
            assert_allclose(sq, 0.5, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_prime_mubs_validate(d):
    mub = build_mub_prime(d)
    assert mub.count == d + 1
    assert_family_ok(mub, tol=1e-12)


def test_qutrit_mub_overlaps():
    mub = build_mub_prime(3)
    sq = np.abs(mub.bases[1].conj().T @ mub.bases[3]) ** 2
    assert_allclose(sq, np.full((3, 3), 1 / 3), atol=1e-12)


@pytest.mark.parametrize("d", [4, 6, 9])
def test_non_prime_mub_dimension_is_rejected(d):
    with pytest.raises(UnsupportedDimensionError, match="prime dimensions only; import a file"):
        build_mub_prime(d)


def test_qubit_mum_kappa_closed_form():
    mum = build_mum(2, M=3, t=0.1)
    expected = 0.5 + 0.01 * (1 + np.sqrt(2)) ** 2
    assert mum.kappa == pytest.approx(expected, abs=1e-12)
    assert mum.kappa == pytest.approx(0.5582843, abs=1e-7)
    measured = np.real(np.trace(mum.groups[0, 0] @ mum.groups[0, 0]))
    assert measured == pytest.approx(mum.kappa, abs=1e-10)
    assert_family_ok(mum)


@pytest.mark.parametrize("d", range(2, 7))
def test_mum_generators_sum_to_zero(d):
    gens = mum_generators(d)
    assert_allclose(gens.sum(axis=1), 0, atol=1e-12)
    assert_allclose(np.trace(gens, axis1=2, axis2=3), 0, atol=1e-12)


def test_qutrit_mum_at_max_t_touches_zero():
    t = max_t(3)
    mum = build_mum(3, M=4, t=t)
    assert_family_ok(mum)
    assert abs(min_eigenvalue(mum)) <= 1e-6


def test_qubit_max_t_reaches_projective_limit():
    t = max_t(2)
    assert t == pytest.approx(np.sqrt(2) / (2 * (1 + np.sqrt(2))), abs=1e-9)
    assert mum_kappa(2, t) <= 1 + 1e-9


def test_mum_beyond_max_t_fails_positivity():
    d = 3
    t = 1.01 * max_t(d)
    with pytest.raises(PositivityError):
        build_mum(d, t=t)
    groups = np.eye(d)[None, None] / d + t * mum_generators(d)
    report = validate_family(MumSet(d, mum_kappa(d, t), groups, t))
    assert not report.ok
    assert report.residuals["positivity"] > 1e-10


def test_tiny_t_is_feasible():
    assert_family_ok(build_mum(4, t=1e-9))


@pytest.mark.parametrize("d", range(2, 8))
def test_mum_kappa_matches_measured_overlap(d):
    rng = np.random.default_rng(100 + d)
    top = max_t(d)
    for t in rng.uniform(0.05, 1.0, size=5) * top:
        mum = build_mum(d, t=t)
        measured = np.real(np.trace(mum.groups[1, 0] @ mum.groups[1, 0]))
        assert measured == pytest.approx(mum_kappa(d, t), abs=1e-10)
        assert_family_ok(mum)


@pytest.mark.parametrize("d", range(2, 8))
@pytest.mark.parametrize("frac", [0.3, 0.9])
def test_complete_mum_at_bound_fractions(d, frac):
    t = frac * max_t(d)
    mum = build_mum(d, M=d + 1, t=t)
    assert mum.count == d + 1
    assert mum.kappa == pytest.approx(mum_kappa(d, t), abs=1e-10)
    purities = np.real(np.einsum("bnij,bnji->bn", mum.groups, mum.groups))
    assert_allclose(purities, mum_kappa(d, t), atol=1e-10)
    assert_family_ok(mum)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_mum_kappa_symmetric_in_t_sign(d):
    t = 0.9 * max_t(d) / (d - 1)
    pos, neg = build_mum(d, t=t), build_mum(d, t=-t)
    assert pos.kappa == pytest.approx(neg.kappa, abs=1e-15)
    assert_family_ok(neg)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_minus_root_mum(d):
    mum = build_mum(d, root="minus")
    assert mum.kappa == pytest.approx(mum_kappa(d, mum.t, "minus"), abs=1e-12)
    assert_family_ok(mum)


def test_mum_count_and_basis_checks():
    with pytest.raises(FamilyMismatchError):
        build_mum(2, M=4)
    with pytest.raises(FamilyMismatchError):
        build_mum(3, basis=gell_mann_basis(2))


@pytest.mark.parametrize("d", range(2, 6))
def test_gsic_generators_sum_to_zero(d):
    assert_allclose(gsic_generators(d).sum(axis=0), 0, atol=1e-11)


@pytest.mark.parametrize("d", range(2, 8))
@pytest.mark.parametrize("frac", [0.3, 0.9])
def test_gsic_validates(d, frac):
    g = build_gsic(d, t=frac * gsic_max_t(d))
    assert_family_ok(g)
    assert 1 / d**3 < g.a <= 1 / d**2
    measured = np.real(np.trace(g.ops[2] @ g.ops[2]))
    assert measured == pytest.approx(g.a, abs=1e-10)


def test_qubit_gsic_at_max_t_is_rank_one_sic():
    g = build_gsic(2, t=gsic_max_t(2))
    assert g.a == pytest.approx(0.25, abs=1e-9)
    for op in g.ops:
        assert np.linalg.eigvalsh(op)[0] <= 1e-8


def test_gsic_parameter_value():
    assert gsic_parameter(3, 0.01) == pytest.approx(0.049837, abs=1e-6)
    g = build_gsic(3, t=0.01)
    assert np.real(np.trace(g.ops[0] @ g.ops[0])) == pytest.approx(gsic_parameter(3, 0.01), abs=1e-12)


def test_mub_as_mum_validates():
    for d in (2, 3):
        mum = mub_as_mum(build_mub_prime(d))
        assert mum.kappa == 1.0
        assert_family_ok(mum, tol=1e-12)
        proj = mum.groups
        assert_allclose(proj @ proj, proj, atol=1e-12)


def test_corrupted_mum_is_reported():
    mum = build_mum(3)
    groups = np.array(mum.groups)
    groups[0, 0, 0, 1] += 1e-3
    report = validate_family(MumSet(3, mum.kappa, groups, mum.t))
    assert not report.ok
    assert max(report.residuals.values()) >= 1e-4


def test_corrupted_gsic_is_reported():
    g = build_gsic(2)
    ops = np.array(g.ops)
    ops[1] *= 1.01
    report = validate_family(GsicSet(2, g.a, ops, g.t))
    assert not report.ok
    assert report.residuals["completeness"] > 1e-4


def test_build_family_dispatch():
    mub = build_family("mub", 3, count=2)
    assert mub.kind == "mub" and mub.count == 2
    mum = build_family("mum", 2, t_frac=0.5)
    assert mum.t == pytest.approx(0.5 * max_t(2), abs=1e-15)
    gsic = build_family("gsic", 2)
    assert gsic.kind == "gsic" and gsic.count == 1
    with pytest.raises(FamilyMismatchError):
        build_family("mub", 2, count=5)
