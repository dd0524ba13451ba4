import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dof_atlas.fading import (
    FadingModel,
    build_gk,
    draw_channel,
    draw_haar_unitary,
    draw_iid_rayleigh,
    haar_check,
    haar_invariance_check,
    matrix_from_json,
    matrix_to_json,
    numerical_rank,
    partition_plan,
    qr_haar_check,
    qr_independence,
    qr_tall,
    relative_error,
    svd_ordered,
    test_isotropy as isotropy_check,
    unitarity_error,
)
from dof_atlas.regions import AntennaConfig


def rng(seed=0):
    return np.random.default_rng(seed)


# --- draws ------------------------------------------------------------------


def test_iid_rayleigh_seeded_determinism():
    a = draw_iid_rayleigh(2, 2, rng(0))
    b = draw_iid_rayleigh(2, 2, rng(0))
    assert np.array_equal(a, b)


def test_iid_rayleigh_moments():
    g = rng(1)
    samples = np.stack([draw_iid_rayleigh(3, 2, g) for _ in range(100_000)])
    second = np.mean(np.abs(samples) ** 2, axis=0)
    assert np.all(np.abs(second - 1.0) < 0.02)
    # real and imaginary parts each carry half the power
    assert abs(np.mean(samples.real ** 2) - 0.5) < 0.01
    assert abs(np.mean(samples.imag ** 2) - 0.5) < 0.01


def test_iid_rayleigh_exponential_tail():
    g = rng(2)
    h = draw_iid_rayleigh(100_000, 1, g)
    frac = np.mean(np.abs(h) ** 2 > 1.0)
    assert abs(frac - np.exp(-1.0)) < 0.01


def test_haar_dim1_uniform_phase():
    g = rng(3)
    z = np.array([draw_haar_unitary(1, g)[0, 0] for _ in range(100_000)])
    assert np.allclose(np.abs(z), 1.0)
    assert abs(z.real.mean()) < 0.02 and abs(z.imag.mean()) < 0.02


def test_haar_unitary_and_first_column():
    g = rng(4)
    us = [draw_haar_unitary(4, g) for _ in range(100_000)]
    assert max(unitarity_error(u) for u in us[:1000]) < 1e-10
    mean_sq = np.mean([abs(u[0, 0]) ** 2 for u in us])
    assert abs(mean_sq - 0.25) < 0.01


def test_draw_channel_shapes():
    c = AntennaConfig(3, 1, 5, 2)
    ch = draw_channel(c, "iid-rayleigh", rng(0))
    assert ch.h11.shape == (5, 3) and ch.h22.shape == (2, 1)
    ch.check_shapes(c)
    ch2 = draw_channel(c, "isotropic", rng(0))
    ch2.check_shapes(c)


def test_correlated_identity_rotation_zero_rows():
    c = AntennaConfig(5, 2, 7, 3)
    model = FadingModel("correlated-rayleigh", np.eye(7), np.eye(3))
    ch = draw_channel(c, model, rng(5))
    assert np.all(ch.h22[2:] == 0)
    assert np.all(ch.h12[6:] == 0)
    assert np.all(ch.h22[:2] != 0)


def test_correlated_haar_full_rank():
    c = AntennaConfig(5, 2, 7, 3)
    g = rng(6)
    model = FadingModel("correlated-rayleigh", draw_haar_unitary(7, g), draw_haar_unitary(3, g))
    ranks = [numerical_rank(draw_channel(c, model, g).h22) for _ in range(10_000)]
    assert all(r == 2 for r in ranks)


def test_correlated_dimension_mismatch():
    c = AntennaConfig(5, 2, 7, 3)
    with pytest.raises(ValueError):
        draw_channel(c, FadingModel("correlated-rayleigh", np.eye(6), np.eye(3)), rng())
    with pytest.raises(ValueError):
        draw_channel(c, FadingModel("correlated-rayleigh", np.eye(7), 2 * np.eye(3)), rng())
    with pytest.raises(ValueError):
        FadingModel("rician")


# --- SVD --------------------------------------------------------------------


def test_svd_identity():
    f = svd_ordered(np.eye(3))
    assert np.array_equal(f.singular_values, np.ones(3))


def test_svd_diagonal_phase_convention():
    f = svd_ordered(np.diag([2.0, 1.0]))
    assert np.allclose(f.singular_values, [2.0, 1.0])
    assert np.allclose(f.u, np.eye(2)) and np.allclose(f.v, np.eye(2))


def test_svd_random_energy_and_reconstruction():
    h = draw_iid_rayleigh(2, 3, rng(7))
    f = svd_ordered(h)
    assert relative_error(f.reconstruct(), h) < 1e-10
    assert abs(np.sum(f.singular_values ** 2) - np.linalg.norm(h) ** 2) < 1e-10
    assert f.u.shape == (2, 2) and f.lam.shape == (2, 2) and f.v.shape == (3, 2)


def test_svd_zero_matrix():
    f = svd_ordered(np.zeros((3, 2)))
    assert np.all(f.lam == 0)
    assert unitarity_error(f.u) < 1e-12


def test_svd_deterministic():
    h = draw_iid_rayleigh(4, 3, rng(8))
    a, b = svd_ordered(h), svd_ordered(h.copy())
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_svd_invariants(n, m, seed):
    h = draw_iid_rayleigh(n, m, rng(seed))
    f = svd_ordered(h)
    k = min(n, m)
    assert f.lam.shape == (n, k) and f.v.shape == (m, k)
    assert relative_error(f.reconstruct(), h) < 1e-10
    assert unitarity_error(f.u) < 1e-10 and unitarity_error(f.v) < 1e-10
    off = f.lam.copy()
    off[np.arange(k), np.arange(k)] = 0
    assert np.all(off == 0)
    s = f.singular_values
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    for i in range(k):
        first = f.v[np.flatnonzero(np.abs(f.v[:, i]) > 1e-12)[0], i]
        assert first.imag == 0 and first.real > 0


# --- QR ---------------------------------------------------------------------


def test_qr_fixed_point():
    h = np.array([[2, 1 + 1j], [0, 3], [0, 0]], dtype=complex)
    f = qr_tall(h)
    assert np.allclose(f.q, np.eye(3))
    assert np.allclose(f.r, h)


def test_qr_rank_deficient_column():
    h = draw_iid_rayleigh(3, 2, rng(9))
    h[:, 1] = 0
    f = qr_tall(h)
    assert f.r[1, 1] == 0
    assert relative_error(f.reconstruct(), h) < 1e-10


def test_qr_random_3x2():
    h = draw_iid_rayleigh(3, 2, rng(10))
    f = qr_tall(h)
    assert relative_error(f.reconstruct(), h) < 1e-10
    assert f.r[2, 0] == 0 and f.r[2, 1] == 0


def test_qr_rejects_wide():
    with pytest.raises(ValueError):
        qr_tall(np.ones((2, 3)))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_qr_invariants(m, extra, seed, randomize):
    g = rng(seed)
    h = draw_iid_rayleigh(m + extra, m, g)
    f = qr_tall(h, rng=g if randomize else None)
    assert relative_error(f.reconstruct(), h) < 1e-10
    assert unitarity_error(f.q) < 1e-10
    assert np.all(np.tril(f.r, -1) == 0)
    assert np.all(f.r[m:] == 0)
    d = np.diagonal(f.r)
    assert np.all(d.imag == 0) and np.all(d.real >= 0)


def test_qr_q_is_haar():
    assert qr_haar_check(3, 2, 10_000, rng(11)).passed


def test_naive_qr_is_not_haar():
    # Without the diagonal phase correction Q is detectably non-Haar.
    rep = haar_check(lambda g: np.linalg.qr(draw_iid_rayleigh(3, 3, g))[0], 3, 10_000, rng(12))
    assert not rep.passed


def test_qr_r_independent_of_q():
    assert qr_independence(3, 2, 10_000, rng(13)) < 0.05


# --- isotropy and Haar invariance --------------------------------------------


def test_isotropy_iid_vs_haar():
    g = rng(14)
    u = draw_haar_unitary(3, g)
    rep = isotropy_check(lambda r: draw_iid_rayleigh(3, 3, r), u, 10_000, g)
    assert rep.passed, rep.to_dict()


def test_isotropy_identity():
    rep = isotropy_check(lambda r: draw_iid_rayleigh(3, 3, r), np.eye(3), 2000, rng(15))
    assert rep.passed


def test_isotropy_detects_scaled_column():
    def skewed(r):
        h = draw_iid_rayleigh(3, 3, r)
        h[:, 0] *= 10
        return h

    g = rng(16)
    rep = isotropy_check(skewed, draw_haar_unitary(3, g), 10_000, g)
    assert not rep.passed


def test_isotropy_argument_checks():
    with pytest.raises(ValueError):
        isotropy_check(lambda r: draw_iid_rayleigh(3, 3, r), np.eye(3), 100, rng())
    with pytest.raises(ValueError):
        isotropy_check(lambda r: draw_iid_rayleigh(3, 3, r), np.eye(2), 1000, rng())


def test_haar_left_invariance():
    g = rng(17)
    assert haar_invariance_check(draw_haar_unitary(3, g), 10_000, g).passed


# --- partition and G_k ------------------------------------------------------


@pytest.mark.parametrize("cfg, m, n, sets, counts", [
    ((5, 2, 7, 3), 2, 0, [(5, 6, 7), (1, 2), (3, 4)], [0, 1, 1]),
    ((2, 1, 3, 2), 1, 0, [(2, 3), (1,)], [0, 1]),
    ((3, 2, 5, 3), 1, 0, [(3, 4, 5), (1, 2)], [0, 1]),
    ((4, 2, 6, 3), 1, 1, [(4, 5, 6), (1,), (2, 3)], [0, 2, 1]),
])
def test_partition_plan(cfg, m, n, sets, counts):
    plan = partition_plan(AntennaConfig(*cfg))
    assert (plan.m, plan.n) == (m, n)
    assert list(plan.actual_sets) == sets
    assert list(plan.fictitious_counts) == counts


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 8))
def test_partition_invariants(m2, gap, m1):
    n2 = m2 + gap
    n1 = m1 + m2
    if not n1 > n2:
        return
    plan = partition_plan(AntennaConfig(m1, m2, n1, n2))
    assert plan.m == (n1 - n2) // m2
    assert plan.n == (n1 - n2) - plan.m * m2
    flat = [i for s in plan.actual_sets for i in s]
    assert sorted(flat) == list(range(1, n1 + 1))
    for s, f in zip(plan.actual_sets, plan.fictitious_counts):
        assert len(s) + f == n2


def test_partition_precondition():
    with pytest.raises(ValueError):
        partition_plan(AntennaConfig(4, 2, 7, 3))


def test_build_gk_shape_and_structural_zeros():
    c = AntennaConfig(5, 2, 7, 3)
    g = build_gk(c, 1, rng(18))
    assert g.shape == (7, 7)
    right = g[:, 5:]
    # Two 2x2 upper-triangular R blocks, then the 3x2 R of S_0.
    assert right[1, 0] == 0 and right[3, 0] == 0 and right[5, 0] == 0
    assert np.all(right[6] == 0)
    assert np.all(np.diagonal(right[0:2]).imag == 0)


def test_build_gk_singleton_row_selection():
    c = AntennaConfig(4, 2, 6, 3)  # n = 1: row k of R goes into row 1
    g1 = build_gk(c, 1, rng(19))
    g2 = build_gk(c, 2, rng(19))
    assert g1[0, 4] != 0 and g1[0, 5] != 0
    assert g2[0, 4] == 0 and g2[0, 5] != 0


def test_build_gk_errors():
    with pytest.raises(ValueError):
        build_gk(AntennaConfig(4, 2, 7, 3), 1, rng())
    with pytest.raises(ValueError):
        build_gk(AntennaConfig(5, 2, 7, 3), 3, rng())
    with pytest.raises(ValueError):
        build_gk(AntennaConfig(5, 2, 7, 3), 0, rng())


def test_build_gk_full_rank_small():
    g = rng(20)
    c = AntennaConfig(5, 2, 7, 3)
    for k in (1, 2):
        for _ in range(500):
            assert numerical_rank(build_gk(c, k, g)) == 7


def test_seeded_determinism_channel():
    c = AntennaConfig(5, 2, 7, 3)
    a = draw_channel(c, "iid-rayleigh", rng(21))
    b = draw_channel(c, "iid-rayleigh", rng(21))
    for name in ("h11", "h12", "h21", "h22"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_matrix_json_roundtrip():
    h = draw_iid_rayleigh(2, 3, rng(22))
    data = matrix_to_json(h)
    assert len(data) == 2 and len(data[0]) == 3 and len(data[0][0]) == 2
    assert np.array_equal(matrix_from_json(data), h)
