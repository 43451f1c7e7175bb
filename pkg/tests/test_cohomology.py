import numpy as np
import pytest

from gal2 import cohomology as ch, gf2, pgroups as pg
from gal2.gf2 import BitMatrix


@pytest.fixture(scope="module")
def v2():
    return pg.build_V(2)


@pytest.fixture(scope="module")
def res_v2_deg5(v2):
    return ch.minimal_resolution(v2.table, 5)


# -- resolutions ------------------------------------------------------------------


def test_resolution_cyclic_periodic():
    z2 = pg.PcGroup(1, {0: []}, {}).to_table()
    assert ch.minimal_resolution(z2, 6).betti == [1] * 7


def test_resolution_e2_polynomial():
    e2 = pg.build_elementary(2).to_table()
    r = ch.minimal_resolution(e2, 6)
    assert r.betti == list(range(1, 8))
    rep = r.verify(spot_check=0)
    assert rep["minimal"] and rep["composite_zero"]


def test_resolution_e3():
    e3 = pg.build_elementary(3).to_table()
    r = ch.minimal_resolution(e3, 4)
    assert r.betti == [1, 3, 6, 10, 15]


def test_resolution_v2_low_degrees(res_v2_deg5):
    assert res_v2_deg5.betti == [1, 2, 6, 11, 22, 36]
    rep = res_v2_deg5.verify()
    assert rep["minimal"] and rep["composite_zero"]


def test_resolution_caps():
    e2 = pg.build_elementary(2).to_table()
    with pytest.raises(ch.ResourceCap):
        ch.minimal_resolution(e2, 11)


def test_boundary_matrix_shape(res_v2_deg5):
    b = res_v2_deg5.boundary_matrix(2)
    assert (b.rows, b.cols) == (6 * 128, 2 * 128)


# -- rational series ---------------------------------------------------------------


def test_series_geometric():
    assert ch.verify_rational_series([1, 1, 1], [1], [1, -1])


def test_series_mismatch():
    assert not ch.verify_rational_series([1, 2, 2], [1], [1, -1])


def test_series_v2(res_v2_deg5):
    den = ch.poly_mul(
        ch.poly_mul([1, -1], ch.poly_mul([1, -1], [1, -1])),
        ch.poly_mul([1, 0, -1], [1, 0, -1]),
    )
    assert ch.verify_rational_series(res_v2_deg5.betti, [1, -1, 1], den)


def test_series_x2_polynomial():
    # a finite Poincare polynomial against the constant denominator
    assert ch.verify_rational_series([1, 2, 5, 5, 2, 1], [1, 2, 5, 5, 2, 1], [1])


# -- restriction -------------------------------------------------------------------


def test_restriction_to_self_full_rank(res_v2_deg5, v2):
    rep = ch.restriction_ranks(res_v2_deg5, [list(range(128))], 3)
    assert rep["full"] == [True] * 4


def test_restriction_d8_detection():
    d8 = pg.PcGroup(3, {0: [], 1: [2], 2: []}, {(0, 1): [2]}).to_table()
    res = ch.minimal_resolution(d8, 4)
    subs = d8.maximal_abelian_subgroups()
    elem = [list(s) for s in subs if all(d8.mul(g, g) == 0 for g in s)]
    assert len(elem) == 2
    rep = ch.restriction_ranks(res, elem, 4)
    assert rep["full"] == [True] * 5


def test_restriction_functoriality(v2):
    res = ch.minimal_resolution(v2.table, 2)
    A = v2.kernel_elements
    Z = [g for g in range(128) if all(v2.table.mul(g, h) == v2.table.mul(h, g) for h in range(128))]
    mA = ch.restriction_matrices(res, A, 2)
    mZ = ch.restriction_matrices(res, Z, 2)
    At, posA = v2.table.subgroup_table(A)
    resA = ch.minimal_resolution(At, 2)
    mAZ = ch.restriction_matrices(resA, sorted(posA[z] for z in Z), 2)
    for i in (1, 2):
        assert np.array_equal(mZ[i] % 2, (mAZ[i] @ mA[i]) % 2)


def test_restriction_kernel_only_deficient(res_v2_deg5, v2):
    rep = ch.restriction_ranks(res_v2_deg5, [v2.kernel_elements], 3)
    # H^1 of the group dies entirely on the Frattini subgroup
    assert rep["ranks"][1] == 0
    assert not rep["full"][1]


# -- polynomial classes and the (1,1) kernel --------------------------------------------


def test_d2_01_examples():
    ext = ch.CentralExtension.from_extension_data(pg.extension_data(pg.build_W(2)))
    # kernel-dual basis: j1 = (s1^2)*, j2 = (s2^2)*, j3 = ([s1,s2])*
    j1 = np.array([1, 0, 0], np.uint8)
    j3 = np.array([0, 0, 1], np.uint8)
    assert ch.d2_01(ext, j1).monomial_terms() == [(0, 0)]
    assert ch.d2_01(ext, j3).monomial_terms() == [(0, 1)]
    assert ch.d2_01(ext, np.zeros(3, np.uint8)).is_zero()


def test_d2_11_examples():
    ext = ch.CentralExtension.from_extension_data(pg.extension_data(pg.build_W(2)))
    j1 = np.array([1, 0, 0], np.uint8)
    j2 = np.array([0, 1, 0], np.uint8)
    j3 = np.array([0, 0, 1], np.uint8)
    lam1 = np.stack([j3, j1])
    lam2 = np.stack([j2, j3])
    assert ch.d2_11(ext, lam1).is_zero()
    assert ch.d2_11(ext, lam2).is_zero()
    only_a1j1 = np.stack([j1, np.zeros(3, np.uint8)])
    assert ch.d2_11(ext, only_a1j1).monomial_terms() == [(0, 0, 0)]
    assert ch.d2_11(ext, np.zeros((2, 3), np.uint8)).is_zero()


def test_d2_11_leibniz_on_pure_tensors():
    ext = ch.CentralExtension.universal(3)
    rng = np.random.default_rng(4)
    deg3 = ch.monomials(3, 3)
    idx3 = {m: i for i, m in enumerate(deg3)}
    pairs = ch.monomials(3, 2)
    for _ in range(20):
        i = int(rng.integers(0, 3))
        z = rng.integers(0, 2, ext.phi_rank).astype(np.uint8)
        elt = np.zeros((3, ext.phi_rank), np.uint8)
        elt[i] = z
        got = ch.d2_11(ext, elt).coeffs
        expect = np.zeros(len(deg3), np.uint8)
        for r in np.nonzero(ch.d2_01(ext, z).coeffs)[0]:
            a, b = pairs[r]
            expect[idx3[tuple(sorted((i, a, b)))]] ^= 1
        assert np.array_equal(got, expect)


def test_einfty_dimensions():
    assert ch.einfty11(ch.CentralExtension.universal(2))[0] == 2
    assert ch.einfty11(ch.CentralExtension.universal(3))[0] == 8
    gram_d3 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], np.uint8)
    ext = ch.CentralExtension.from_symbol_gram(gram_d3)
    assert ext.phi_rank == 5
    assert ch.einfty11(ext)[0] == 5
    gram_d4 = np.array(
        [[0, 0, 1, 1], [0, 0, 1, 0], [1, 1, 1, 1], [1, 0, 1, 1]], np.uint8
    )
    ext4 = ch.CentralExtension.from_symbol_gram(gram_d4)
    assert ext4.phi_rank == 9
    assert ch.einfty11(ext4)[0] == 16


def test_einfty_kernel_matches_lambda_basis():
    ext = ch.CentralExtension.from_extension_data(pg.extension_data(pg.build_W(2)))
    dim, basis = ch.einfty11(ext)
    assert dim == 2
    lam1 = np.array([0, 0, 1, 1, 0, 0], np.uint8)  # a1 x j3 + a2 x j1
    lam2 = np.array([0, 1, 0, 0, 0, 1], np.uint8)  # a1 x j2 + a2 x j3
    span = gf2.Subspace(6, BitMatrix.from_dense(basis))
    for lam in (lam1, lam2):
        assert span.contains(BitMatrix.from_dense(lam.reshape(1, -1)).data[0])


def test_einfty_arithmetic_consistency():
    # dim = n*phi_rank - rank(d2_11); surjective case matches the formula
    for n, expected in ((3, 5), (4, 16)):
        pairs = ch.monomials(n, 2)
        target = len(ch.monomials(n, 3))
        assert target == n * (n + 1) * (n + 2) // 6
        phi = len(pairs) - 1
        # surjectivity means dim = n*phi - target
        assert n * phi - target == expected
