import numpy as np
import pytest

from gal2 import gf2, gmodules as gm, pgroups as pg
from gal2.gf2 import BitMatrix


# -- elementary abelian groups ----------------------------------------------------


def test_elementary_orders():
    assert pg.build_elementary(1).order == 2
    e2 = pg.build_elementary(2)
    assert e2.order == 4
    t = e2.to_table()
    assert all(t.comm(a, b) == 0 for a in range(4) for b in range(4))
    e3 = pg.build_elementary(3)
    t3 = e3.to_table()
    assert all(t3.mul(g, g) == 0 for g in range(8))


def test_elementary_range_check():
    with pytest.raises(ValueError):
        pg.build_elementary(0)
    with pytest.raises(ValueError):
        pg.build_elementary(6)


# -- collection ----------------------------------------------------------------------


def test_collect_empty_word_is_identity():
    pc = pg.build_elementary(2)
    assert not pc.collect([]).any()


def test_collect_square_in_elementary():
    pc = pg.build_elementary(3)
    for g in range(3):
        assert not pc.collect([g, g]).any()


def test_collect_swap_in_w2():
    w2 = pg.build_W(2)
    # s2 s1 = s1 s2 [s1,s2]; generator order: s1 s2 s1^2 s2^2 [s1,s2]
    nf = w2.pc.collect([1, 0])
    assert nf.tolist() == [1, 1, 0, 0, 1]


def test_collection_is_homomorphism_random():
    v2 = pg.build_V(2)
    pc, model = v2.pc, v2.model
    rng = np.random.default_rng(5)

    def to_model(nf):
        val = 0
        for i in range(pc.m):
            if nf[i]:
                val = model.mul(val, v2.gen_model[i])
        return val

    for _ in range(50):
        w = [int(rng.integers(0, pc.m)) for _ in range(int(rng.integers(0, 12)))]
        nf = pc.collect(w)
        val = 0
        for g in w:
            val = model.mul(val, v2.gen_model[g])
        assert to_model(nf) == val


def test_pc_table_certifies_presentations():
    for sg in (pg.build_W(2), pg.build_V(2)):
        assert np.array_equal(sg.pc.to_table().mult, sg.table.mult)


# -- family structure ------------------------------------------------------------------


def test_w2_structure():
    w2 = pg.build_W(2)
    assert w2.order == 32
    ed = pg.extension_data(w2)
    assert ed.kernel_rank == 3
    assert all(m == BitMatrix.identity(3) for m in ed.action.acts)
    t = w2.table
    s1 = 1 << 0
    assert t.power(s1, 2) != 0 and t.power(s1, 4) == 0  # exponent 4


def test_w3_structure():
    w3 = pg.build_W(3)
    assert w3.order == 512
    assert pg.extension_data(w3).kernel_rank == 6


def test_v2_structure():
    v2 = pg.build_V(2)
    assert v2.order == 128
    assert v2.kernel_module.dim == 5
    assert v2.pc.labels == ["s1", "s2", "s1^2", "s2^2", "[s1,s2]", "[s1^2,s2]", "[s2^2,s1]"]
    # Frattini subgroup equals the kernel
    assert v2.table.frattini() == v2.kernel_elements


def test_v3_kernel_rank():
    v3 = pg.build_V(3)
    assert v3.order == 1 << 20
    assert v3.kernel_module.dim == 17  # 2^3 * 2 + 1


def test_v2_to_w2_quotient():
    v2 = pg.build_V(2)
    # radical of the kernel: generated by the two deepest pc generators
    rad_ids = v2.table.closure([1 << 5, 1 << 6])
    assert len(rad_ids) == 4  # rank 2 = 2^n(n-1) - n - C(n,2) + 1 at n=2
    q, _ = v2.table.quotient_table(rad_ids)
    assert q.order == 32
    rep = pg.verify_metabelian_identities(q)
    assert rep["ok"]


def test_commutator_examples():
    v2 = pg.build_V(2)
    t = v2.table
    s1, s2 = 1 << 0, 1 << 1
    for x in (s1, s2, t.mul(s1, s2)):
        assert t.comm(x, x) == 0
    # [s1, s2] is the third kernel-basis element (generator index 4)
    assert t.comm(s1, s2) == 1 << 4
    w2 = pg.build_W(2)
    tw = w2.table
    # the Frattini subgroup is central: [s1^2, s2] = 1
    assert tw.comm(tw.power(1 << 0, 2), 1 << 1) == 0


# -- identity checks -----------------------------------------------------------------


def test_metabelian_e2():
    rep = pg.verify_metabelian_identities(pg.build_elementary(2).to_table())
    assert rep["ok"]


def test_metabelian_v2_exhaustive():
    rep = pg.verify_metabelian_identities(pg.build_V(2).table)
    assert rep["ok"] and rep["triples"] == 128**3


def test_metabelian_w2():
    assert pg.verify_metabelian_identities(pg.build_W(2).table)["ok"]


def test_metabelian_oracle_sample():
    t = pg.build_V(2).table
    rng = np.random.default_rng(3)
    for _ in range(300):
        s, u, g = (int(rng.integers(0, 128)) for _ in range(3))
        j = t.mul(
            t.mul(t.comm(s, t.comm(u, g)), t.comm(u, t.comm(g, s))),
            t.comm(g, t.comm(s, u)),
        )
        assert j == 0


# -- extension data --------------------------------------------------------------------


def test_extension_data_w2_pair_data():
    ed = pg.extension_data(pg.build_W(2))
    # pair data in the canonical kernel basis (s1^2, s2^2, [s1,s2])
    assert ed.pair_data[(0, 0)].tolist() == [1, 0, 0]
    assert ed.pair_data[(1, 1)].tolist() == [0, 1, 0]
    assert ed.pair_data[(0, 1)].tolist() == [0, 0, 1]


def test_extension_data_v2_action():
    ed = pg.extension_data(pg.build_V(2))
    assert ed.kernel_rank == 5
    # the kernel is the second dimension shift: fixed subspace has dim 2,
    # its dual (the J-module side) has fixed subspace of dim 3
    assert ed.action.fixed_space().rows == 2
    assert ed.action.dual().fixed_space().rows == 3
    assert gm.is_isomorphic(ed.action, gm.heller(gm.GModule.trivial(2), 2))


def test_extension_data_trivial_kernel():
    e2 = pg.build_elementary(2).to_table()
    sg = type("S", (), {})()
    sg.table = e2
    sg.kernel_elements = [0]
    ed = pg.extension_data(sg)
    assert ed.kernel_rank == 0
    assert all(v.size == 0 for v in ed.pair_data.values())


# -- lattice extension ---------------------------------------------------------------


def test_x2_lattice():
    x2 = pg.build_X2()
    assert x2.lattice_rank == 5
    for a in x2.action:
        assert np.array_equal(a @ a, np.eye(5, dtype=np.int64))
    assert gm.is_isomorphic(x2.mod2_module, gm.heller(gm.GModule.trivial(2), 2))


def test_x2_mod2_reproduces_order128_group():
    """Assemble the group from the lattice data mod 2; it must match build_V(2)."""
    x2 = pg.build_X2()
    model = pg.ExtensionModel(x2.mod2_module, x2.extension_class)
    v2 = pg.build_V(2)
    iso = x2.mod2_iso_to_shift.to_dense()

    def transport(idx):
        e, a = model.split(idx)
        avec = (iso @ model.avec(a)) % 2
        return v2.model.join(e, v2.model.aidx(avec))

    rng = np.random.default_rng(9)
    for _ in range(300):
        x, y = (int(rng.integers(0, model.order)) for _ in range(2))
        assert transport(model.mul(x, y)) == v2.model.mul(transport(x), transport(y))


# -- sphere actions ---------------------------------------------------------------------


def test_sphere_actions():
    rep = pg.sphere_action_check(2)
    assert rep["ok"]
    assert rep["count"] == 5
    assert rep["dimension"] == 4
    assert rep["involutions"] == 31


# -- presentation file format ------------------------------------------------------------


def test_presentation_roundtrip():
    w2 = pg.build_W(2)
    text = pg.format_presentation(w2.pc)
    back = pg.parse_presentation(text)
    assert back.m == w2.pc.m
    for a in range(32):
        for b in range(32):
            nfa, nfb = w2.pc.index_nf(a), w2.pc.index_nf(b)
            assert np.array_equal(back.multiply(nfa, nfb), w2.pc.multiply(nfa, nfb))


# -- subgroup machinery -------------------------------------------------------------------


def test_maximal_abelian_subgroups_of_v2():
    t = pg.build_V(2).table
    subs = t.maximal_abelian_subgroups()
    kernel = tuple(pg.build_V(2).kernel_elements)
    assert kernel in subs  # the unique maximal elementary abelian
    for s in subs:
        assert all(t.mul(a, b) == t.mul(b, a) for a in s for b in s)
    # every involution is contained in the kernel copy
    assert set(t.involutions()) <= set(kernel)


def test_quotient_table_by_kernel():
    v2 = pg.build_V(2)
    q, belong = v2.table.quotient_table(v2.kernel_elements)
    assert q.order == 4
    assert all(q.mul(x, x) == 0 for x in range(4))
