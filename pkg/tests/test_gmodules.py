import itertools
from collections import Counter

import numpy as np
import pytest

from gal2 import gf2, gmodules as gm
from gal2.gmodules import GModule, heller, label_module


k2 = GModule.trivial(2)


# -- socle series ----------------------------------------------------------------


def test_socle_trivial_module():
    assert k2.socle_series().layer_dims == [1]
    assert k2.socle_series().length == 1


def test_socle_omega_minus2():
    s = heller(k2, -2).socle_series()
    assert s.layer_dims == [3, 2]
    assert s.length == 2


def test_socle_regular():
    assert GModule.regular(2).socle_series().layer_dims == [1, 2, 1]


def test_socle_length_equals_n():
    for n in (2, 3):
        m = heller(GModule.trivial(n), -2)
        assert m.socle_series().length == n


def test_socle_layers_sum_to_dim():
    for m in [heller(k2, 2), GModule.regular(2), label_module("P1")]:
        assert sum(m.socle_series().layer_dims) == m.dim


# -- heller translates -------------------------------------------------------------


def test_heller_zero_is_identity():
    assert heller(k2, 0) is k2


def test_heller_dims_over_klein():
    for m in range(7):
        assert heller(k2, m).dim == 2 * m + 1
        assert heller(k2, -m).dim == 2 * m + 1


def test_heller_duality():
    om2 = heller(k2, -2)
    assert gm.is_isomorphic(om2.dual(), heller(k2, 2))


def test_heller_has_no_free_summand():
    for m in (1, 2, 3):
        assert gm.split_free(heller(k2, m))[0] == 0


def test_omega2_rank17_over_E3():
    assert heller(GModule.trivial(3), 2).dim == 17  # 2^3(3-1)+1


# -- functors ------------------------------------------------------------------------


def test_ext_power_top_and_zero():
    om2 = heller(k2, -2)
    assert gm.ext_power(om2, 0).dim == 1
    top = gm.ext_power(om2, 5)
    assert top.dim == 1 and gm.is_isomorphic(top, k2)


def test_sym_dims():
    om2 = heller(k2, -2)
    for q in range(5):
        assert gm.sym_power(om2, q).dim == len(
            list(itertools.combinations_with_replacement(range(5), q))
        )


def test_tensor_dim_and_dual_involution():
    a, b = heller(k2, 1), label_module("P1")
    assert a.tensor(b).dim == a.dim * b.dim
    assert a.dual().dual().acts[0] == a.acts[0]


# -- hom spaces ------------------------------------------------------------------------


def brute_hom_dim(m1, m2):
    """Independent oracle: enumerate all matrices (small dims only)."""
    d1, d2 = m1.dim, m2.dim
    count = 0
    for bits in range(2 ** (d1 * d2)):
        h = np.array(
            [[(bits >> (r * d1 + c)) & 1 for c in range(d1)] for r in range(d2)],
            dtype=np.uint8,
        )
        ok = all(
            np.array_equal(
                (a2.to_dense() @ h) % 2, (h @ a1.to_dense()) % 2
            )
            for a1, a2 in zip(m1.acts, m2.acts)
        )
        count += ok
    return count.bit_length() - 1


def test_hom_k_k():
    assert len(gm.hom_space(k2, k2)) == 1


def test_hom_k_regular():
    assert len(gm.hom_space(k2, GModule.regular(2))) == 1


def test_hom_omega1_omega1_pinned_by_oracle():
    o1 = heller(k2, 1)
    expect = brute_hom_dim(o1, o1)
    assert len(gm.hom_space(o1, o1)) == expect


# -- isomorphism -----------------------------------------------------------------------


def test_iso_reflexive():
    m = heller(k2, 2)
    assert gm.is_isomorphic(m, m)


def test_iso_dims_differ():
    assert not gm.is_isomorphic(k2, heller(k2, 1))


def test_iso_distinguishes_duals():
    assert not gm.is_isomorphic(heller(k2, 1), heller(k2, -1))


def test_lambda4_is_omega2():
    lam4 = gm.ext_power(heller(k2, -2), 4)
    assert gm.is_isomorphic(lam4, heller(k2, 2))


# -- split_free --------------------------------------------------------------------------


def test_split_free_regular():
    fr, core = gm.split_free(GModule.regular(2))
    assert fr == 1 and core.dim == 0


def test_split_free_trivial():
    fr, core = gm.split_free(k2)
    assert fr == 0 and core is k2


def test_split_free_lambda2():
    lam2 = gm.ext_power(heller(k2, -2), 2)
    fr, core = gm.split_free(lam2)
    assert fr == 1
    model = label_module("Omega^1").direct_sum(label_module("Omega^1"))
    assert gm.is_isomorphic(core, model)


# -- decomposition ------------------------------------------------------------------------


def test_battery_full_rank_on_labels():
    mat = gm._battery_matrix()
    # exact inversion succeeds iff the 9x9 is nonsingular
    gm._invert_fraction_matrix([[mat[j][i] for j in range(9)] for i in range(9)])


def test_battery_identifies_each_label():
    for name in gm.LABELS:
        got = gm._battery_solve(gm.battery(label_module(name)))
        assert got == Counter({name: 1})


def test_decompose_zero():
    assert gm.decompose_klein4(GModule.zero(2)) == Counter()


def test_decompose_s1():
    got = gm.decompose_klein4(gm.sym_power(heller(k2, -2), 1))
    assert got == Counter({"Omega^-2": 1})


def test_decompose_s2_contains_omega2():
    got = gm.decompose_klein4(gm.sym_power(heller(k2, -2), 2))
    assert got["Omega^2"] == 1


def test_decompose_paths_agree_midsize():
    m = gm.sym_power(heller(k2, -2), 4)  # dim 70, above the peel cap
    assert gm._peel_decompose(m) == gm.decompose_klein4(m)


def test_decompose_rejects_stray_summand():
    # a 2-dim module outside the label set cannot exist over E_2 except the
    # three P's; fake a precondition violation with a module over E_2 whose
    # summands are fine but whose claimed-label reconstruction is checked:
    # direct sum with itself must simply double multiplicities
    m = label_module("P2").direct_sum(label_module("Omega^1"))
    got = gm.decompose_klein4(m)
    assert got == Counter({"P2": 1, "Omega^1": 1})
    doubled = gm.decompose_klein4(m.direct_sum(m))
    assert doubled == Counter({"P2": 2, "Omega^1": 2})


def test_random_label_sums_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(6):
        mults = Counter(
            {name: int(rng.integers(0, 3)) for name in gm.LABELS}
        )
        mults = Counter({k: v for k, v in mults.items() if v})
        if not mults:
            continue
        m = gm.model_sum(mults)
        assert gm.decompose_klein4(m) == mults


# -- koszul cohomology ----------------------------------------------------------------------


def test_koszul_trivial_coefficients():
    kz = gm.KoszulComplex(2)
    for p in range(5):
        assert kz.cohomology_dim(k2, p) == p + 1


def test_koszul_free_acyclic():
    kz = gm.KoszulComplex(2)
    reg = GModule.regular(2)
    assert kz.cohomology_dim(reg, 0) == 1
    for p in (1, 2, 3):
        assert kz.cohomology_dim(reg, p) == 0


def test_koszul_dimension_shift():
    kz = gm.KoszulComplex(2)
    om2 = heller(k2, -2)
    # H^p(E2, Omega^-2 k) = H^{p+2}(E2, k) = p+3 for p >= 1, and fix = 3 at p=0
    assert kz.cohomology_dim(om2, 0) == 3
    for p in (1, 2, 3):
        assert kz.cohomology_dim(om2, p) == p + 3


# -- module file format ---------------------------------------------------------------------


def test_module_text_roundtrip():
    m = heller(k2, 1)
    back = gm.parse_module(gm.format_module(m))
    assert back.n == m.n and back.dim == m.dim
    for a, b in zip(m.acts, back.acts):
        assert a == b
