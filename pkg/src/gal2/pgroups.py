"""Finite 2-group engine.

Groups are held two ways: a multiplication-table view (GroupTable) used
by exhaustive and cohomological computations, and a polycyclic
presentation (PcGroup) with collection-from-the-left normal forms.

The distinguished families are built as explicit module extensions:
E_n is elementary abelian; the order-2^(2^n(n-1)+1+n) family arises as
the extension of E_n by the second dimension shift of the trivial
module along the unique nonzero 2-cohomology class, and the quotient of
that group by the radical of its kernel is the exponent-4 family with
central Frattini subgroup.  The rank-5 integral lattice variant lifts
the kernel to characteristic zero.  Presentations are extracted from
the explicit multiplication and re-certified by collection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import sympy

from . import gf2
from .gf2 import BitMatrix
from .gmodules import GModule, heller


# -- table view --------------------------------------------------------------


class GroupTable:
    """A finite group as a multiplication table over element indices 0..N-1."""

    def __init__(self, mult: np.ndarray, gens: list[int] | None = None):
        self.mult = np.asarray(mult, dtype=np.int32)
        self.order = self.mult.shape[0]
        assert self.mult.shape == (self.order, self.order)
        assert np.all(self.mult[0] == np.arange(self.order)), "identity must be 0"
        self.inv = np.empty(self.order, dtype=np.int32)
        for g in range(self.order):
            eq = np.nonzero(self.mult[g] == 0)[0]
            assert eq.size == 1, "not a group table"
            self.inv[g] = eq[0]
        self.gens = list(gens) if gens is not None else _table_min_gens(self)

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def conj(self, a: int, b: int) -> int:
        """b^-1 a b."""
        return self.mul(self.mul(int(self.inv[b]), a), b)

    def comm(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        return self.mul(self.mul(int(self.inv[a]), int(self.inv[b])), self.mul(a, b))

    def power(self, a: int, e: int) -> int:
        r = 0
        for _ in range(e):
            r = self.mul(r, a)
        return r

    def closure(self, seed) -> list[int]:
        seen = {0}
        frontier = [0]
        seed = list(seed)
        while frontier:
            nxt = []
            for x in frontier:
                for s in seed:
                    y = self.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def involutions(self) -> list[int]:
        return [g for g in range(1, self.order) if self.mul(g, g) == 0]

    def frattini(self) -> list[int]:
        # for a 2-group the squares alone generate the Frattini subgroup
        return self.closure({self.mul(g, g) for g in range(self.order)})

    def centralizer(self, elems) -> list[int]:
        return [
            g
            for g in range(self.order)
            if all(self.mul(g, h) == self.mul(h, g) for h in elems)
        ]

    def maximal_abelian_subgroups(self) -> list[tuple[int, ...]]:
        """All maximal abelian subgroups, by saturated greedy extension."""
        found: set[tuple[int, ...]] = set()
        seen_states: set[tuple[int, ...]] = set()
        stack = [tuple(self.closure([g])) for g in range(1, self.order)]
        while stack:
            sub = stack.pop()
            if sub in seen_states:
                continue
            seen_states.add(sub)
            ext = [c for c in self.centralizer(sub) if c not in sub]
            if not ext:
                found.add(sub)
                continue
            for c in ext:
                stack.append(tuple(self.closure(list(sub) + [c])))
        return sorted(s for s in found if not any(set(s) < set(t) for t in found))

    def subgroup_table(self, elems) -> tuple["GroupTable", dict[int, int]]:
        elems = sorted(elems)
        assert elems[0] == 0
        pos = {g: i for i, g in enumerate(elems)}
        mult = np.array(
            [[pos[self.mul(a, b)] for b in elems] for a in elems], dtype=np.int32
        )
        return GroupTable(mult), pos

    def quotient_table(self, normal_elems) -> tuple["GroupTable", np.ndarray]:
        nset = sorted(normal_elems)
        belong = np.full(self.order, -1, dtype=np.int32)
        reps: list[int] = []
        for g in range(self.order):
            if belong[g] >= 0:
                continue
            cos = [self.mul(g, x) for x in nset]
            if 0 in cos:
                g = 0
                cos = [self.mul(0, x) for x in nset]
            idx = len(reps)
            reps.append(g)
            for x in cos:
                belong[x] = idx
        # renumber so the identity coset is index 0
        id_idx = int(belong[0])
        if id_idx != 0:
            swap = {id_idx: 0, 0: id_idx}
            belong = np.array([swap.get(int(b), int(b)) for b in belong], dtype=np.int32)
            reps[0], reps[id_idx] = reps[id_idx], reps[0]
        n = len(reps)
        mult = np.zeros((n, n), dtype=np.int32)
        for i in range(n):
            for j in range(n):
                mult[i, j] = belong[self.mul(reps[i], reps[j])]
        return GroupTable(mult), belong


def _table_min_gens(t: GroupTable) -> list[int]:
    gens: list[int] = []
    reach = [0]
    while len(reach) < t.order:
        for g in range(1, t.order):
            if g not in reach:
                gens.append(g)
                reach = t.closure(gens)
                break
    return gens


# -- polycyclic presentations ---------------------------------------------------


class PcGroup:
    """Polycyclic presentation with exponent-2 generators.

    power[i] is the word (generator indices) equal to g_i^2; comm[(i, j)]
    for i < j is the word equal to [g_j, g_i], supported on generators of
    index > i.  Collection from the left rewrites any positive word to
    the unique normal form, an exponent vector in {0,1}^m.
    """

    def __init__(self, ngens: int, power: dict, comm: dict, labels=None):
        self.m = ngens
        self.power = {i: list(w) for i, w in power.items() if w}
        self.comm = {k: list(w) for k, w in comm.items() if w}
        self.labels = labels or [f"g{i+1}" for i in range(ngens)]
        self.order = 1 << ngens
        self._table: GroupTable | None = None

    def collect(self, word) -> np.ndarray:
        """Normal form of a word of generator indices."""
        out = np.zeros(self.m, dtype=np.uint8)
        stack = list(reversed(list(word)))
        guard = 0
        while stack:
            guard += 1
            if guard > 10_000_000:
                raise RuntimeError("collection did not terminate")
            g = stack.pop()
            tail = [h for h in range(g + 1, self.m) if out[h]]
            if not tail:
                if out[g]:
                    out[g] = 0
                    for x in reversed(self.power.get(g, [])):
                        stack.append(x)
                else:
                    out[g] = 1
                continue
            # prefix . tail . g = prefix . g . (h1 [h1,g]) (h2 [h2,g]) ...
            for h in tail:
                out[h] = 0
            emit = [g]
            for h in tail:
                emit.append(h)
                emit.extend(self.comm.get((g, h), []))
            for x in reversed(emit):
                stack.append(x)
        return out

    def multiply(self, nf1, nf2) -> np.ndarray:
        word = [i for i in range(self.m) if nf1[i]] + [i for i in range(self.m) if nf2[i]]
        return self.collect(word)

    def identity(self) -> np.ndarray:
        return np.zeros(self.m, dtype=np.uint8)

    def inverse(self, nf) -> np.ndarray:
        cur = np.array(nf, dtype=np.uint8)
        if not cur.any():
            return cur
        while True:
            nxt = self.multiply(cur, nf)
            if not nxt.any():
                return cur
            cur = nxt

    def nf_index(self, nf) -> int:
        return int(sum(int(nf[i]) << i for i in range(self.m)))

    def index_nf(self, idx: int) -> np.ndarray:
        return np.array([(idx >> i) & 1 for i in range(self.m)], dtype=np.uint8)

    def to_table(self) -> GroupTable:
        """Full multiplication table; certifies presentation consistency."""
        if self._table is None:
            if self.m > 12:
                raise ValueError("table construction capped at 2^12 elements")
            n = self.order
            mult = np.zeros((n, n), dtype=np.int32)
            nfs = [self.index_nf(i) for i in range(n)]
            for a in range(n):
                for b in range(n):
                    mult[a, b] = self.nf_index(self.multiply(nfs[a], nfs[b]))
            self._table = GroupTable(mult, [1 << i for i in range(self.m)])
        return self._table


def format_presentation(pc: PcGroup) -> str:
    lines = [str(pc.m)]
    for i in range(pc.m):
        w = pc.power.get(i, [])
        lines.append(f"pow {i} : {' '.join(map(str, w))}".rstrip())
    for (i, j), w in sorted(pc.comm.items()):
        lines.append(f"comm {i} {j} : {' '.join(map(str, w))}")
    return "\n".join(lines) + "\n"


def parse_presentation(text: str) -> PcGroup:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    m = int(lines[0])
    power: dict = {}
    comm: dict = {}
    for ln in lines[1:]:
        head, _, tail = ln.partition(":")
        parts = head.split()
        word = [int(x) for x in tail.split()]
        if parts[0] == "pow":
            power[int(parts[1])] = word
        elif parts[0] == "comm":
            comm[(int(parts[1]), int(parts[2]))] = word
        else:
            raise ValueError(f"bad presentation line: {ln}")
    return PcGroup(m, power, comm)


def build_elementary(n: int) -> PcGroup:
    """Elementary abelian group of order 2^n."""
    if not 1 <= n <= 5:
        raise ValueError("rank out of range")
    return PcGroup(n, {}, {}, labels=[f"s{i+1}" for i in range(n)])


# -- explicit extensions -----------------------------------------------------------


class ExtensionModel:
    """Explicit group on pairs (a, e): a in the module, e in E_n.

    Multiplication: (a, e)(b, f) = (a + e.b + c(e, f), e XOR f) where c
    is a normalized 2-cocycle.  Element index: (e << dimA) | a_bits.
    """

    def __init__(self, module: GModule, cocycle: np.ndarray):
        self.module = module
        self.n = module.n
        self.dimA = module.dim
        self.orderE = 1 << self.n
        self.cocycle = cocycle
        assert cocycle.shape == (self.orderE, self.orderE, self.dimA)
        assert not cocycle[0].any() and not cocycle[:, 0].any(), "cocycle not normalized"
        self._act = [module.act(e).to_dense() for e in range(self.orderE)]

    @property
    def order(self) -> int:
        return self.orderE << self.dimA

    def avec(self, bits: int) -> np.ndarray:
        return np.array([(bits >> i) & 1 for i in range(self.dimA)], dtype=np.uint8)

    def aidx(self, vec) -> int:
        return int(sum(int(v) << i for i, v in enumerate(vec)))

    def split(self, idx: int) -> tuple[int, int]:
        return idx >> self.dimA, idx & ((1 << self.dimA) - 1)

    def join(self, e: int, abits: int) -> int:
        return (e << self.dimA) | abits

    def mul(self, x: int, y: int) -> int:
        e, a = self.split(x)
        f, b = self.split(y)
        total = (self.avec(a) + self._act[e] @ self.avec(b) + self.cocycle[e, f]) % 2
        return self.join(e ^ f, self.aidx(total))

    def inv(self, x: int) -> int:
        e, a = self.split(x)
        b = (self._act[e] @ ((self.avec(a) + self.cocycle[e, e]) % 2)) % 2
        out = self.join(e, self.aidx(b))
        assert self.mul(x, out) == 0
        return out

    def comm(self, x: int, y: int) -> int:
        return self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))

    def power(self, x: int, k: int) -> int:
        r = 0
        for _ in range(k):
            r = self.mul(r, x)
        return r

    def to_table(self) -> GroupTable:
        if self.order > 4096:
            raise ValueError("table too large")
        N = self.order
        dA = 1 << self.dimA
        allA = np.array(
            [[(i >> k) & 1 for k in range(self.dimA)] for i in range(dA)], dtype=np.uint8
        )
        pow2 = 1 << np.arange(self.dimA)
        mult = np.zeros((N, N), dtype=np.int32)
        for e in range(self.orderE):
            for f in range(self.orderE):
                moved = (allA @ self._act[e].T + self.cocycle[e, f]) % 2
                for a in range(dA):
                    tot = (allA[a] + moved) % 2
                    vals = tot @ pow2
                    mult[self.join(e, a), self.join(f, 0) : self.join(f, dA - 1) + 1] = (
                        (e ^ f) << self.dimA
                    ) + vals
        gens = [self.join(1 << t, 0) for t in range(self.n)]
        return GroupTable(mult, gens)


def bar_h2_class(module: GModule) -> tuple[np.ndarray, int]:
    """A nonzero 2-cohomology class of E_n with the given coefficients.

    Works on the normalized bar complex.  Returns (cocycle table with
    shape (2^n, 2^n, dim), dim H^2).
    """
    n, d = module.n, module.dim
    E = 1 << n
    acts = [module.act(e).to_dense() for e in range(E)]
    g1 = [g for g in range(E) if g]
    pairs = [(g, h) for g in g1 for h in g1]
    i1 = {g: i for i, g in enumerate(g1)}
    i2 = {p: i for i, p in enumerate(pairs)}
    dim1, dim2 = len(g1) * d, len(pairs) * d
    eye = np.eye(d, dtype=np.uint8)
    d1 = np.zeros((dim2, dim1), dtype=np.uint8)
    for (g, h) in pairs:
        row = i2[(g, h)] * d
        d1[row : row + d, i1[h] * d : (i1[h] + 1) * d] ^= acts[g].astype(np.uint8)
        if g ^ h:
            d1[row : row + d, i1[g ^ h] * d : (i1[g ^ h] + 1) * d] ^= eye
        d1[row : row + d, i1[g] * d : (i1[g] + 1) * d] ^= eye
    triples = [(g, h, k) for g in g1 for h in g1 for k in g1]
    d2 = np.zeros((len(triples) * d, dim2), dtype=np.uint8)
    for ti, (g, h, k) in enumerate(triples):
        row = ti * d
        d2[row : row + d, i2[(h, k)] * d : (i2[(h, k)] + 1) * d] ^= acts[g].astype(np.uint8)
        if g ^ h:
            d2[row : row + d, i2[(g ^ h, k)] * d : (i2[(g ^ h, k)] + 1) * d] ^= eye
        if h ^ k:
            d2[row : row + d, i2[(g, h ^ k)] * d : (i2[(g, h ^ k)] + 1) * d] ^= eye
        d2[row : row + d, i2[(g, h)] * d : (i2[(g, h)] + 1) * d] ^= eye
    cocycles = gf2.kernel_basis(BitMatrix.from_dense(d2))
    bech = gf2.Echelon(dim2)
    imgs = BitMatrix.from_dense(d1).transpose()
    for i in range(imgs.rows):
        bech.add_row(imgs.data[i])
    h2_dim = cocycles.rows - bech.rank
    rep = None
    for i in range(cocycles.rows):
        red, _ = bech.reduce(cocycles.data[i])
        if np.any(red):
            rep = cocycles.to_dense()[i]
            break
    assert rep is not None, "no nonzero 2-cohomology class"
    c = np.zeros((E, E, d), dtype=np.uint8)
    for (g, h) in pairs:
        c[g, h] = rep[i2[(g, h)] * d : (i2[(g, h)] + 1) * d]
    return c, h2_dim


def _gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    m = BitMatrix.from_dense(np.hstack([mat % 2, np.eye(n, dtype=np.uint8)]))
    piv = gf2._eliminate(m.data, n)
    assert len(piv) == n, "matrix not invertible over GF(2)"
    dense = m.to_dense()
    for r, c in reversed(piv):
        for rr in range(r):
            if dense[rr, c]:
                dense[rr] ^= dense[r]
    return dense[:, n:]


def _extract_presentation(model: ExtensionModel):
    """Pc presentation from the model: lifts first, then a kernel basis.

    The kernel basis is the canonical word basis: squares of lifts,
    commutators of lifts, then iterated commutators with lifts.  Returns
    (pc, generator model indices).
    """
    n, dimA = model.n, model.dimA
    lifts = [model.join(1 << t, 0) for t in range(n)]
    words: list[tuple[str, int]] = []
    for t in range(n):
        words.append((f"s{t+1}^2", model.power(lifts[t], 2)))
    for t, u in itertools.combinations(range(n), 2):
        words.append((f"[s{t+1},s{u+1}]", model.comm(lifts[t], lifts[u])))
    ech = gf2.Echelon(dimA)
    chosen: list[tuple[str, int]] = []

    def avec_of(idx):
        e, a = model.split(idx)
        assert e == 0, "kernel word has nontrivial quotient part"
        return model.avec(a)

    frontier = list(words)
    while frontier and len(chosen) < dimA:
        label, idx = frontier.pop(0)
        row = BitMatrix.from_dense(avec_of(idx).reshape(1, -1)).data[0]
        if ech.add_row(row):
            chosen.append((label, idx))
            for t in range(n):
                frontier.append((f"[{label},s{t+1}]", model.comm(idx, lifts[t])))
    assert len(chosen) == dimA, "kernel not generated by canonical words"
    basis = np.array([avec_of(idx) for _, idx in chosen], dtype=np.uint8)
    binv = _gf2_inverse(basis)

    def a_coords(avec) -> np.ndarray:
        # avec = coords . basis  =>  coords = avec . basis^{-1}
        return (avec @ binv) % 2

    m = n + dimA
    labels = [f"s{t+1}" for t in range(n)] + [lab for lab, _ in chosen]
    gen_model = lifts + [idx for _, idx in chosen]

    def nf_word(idx) -> list[int]:
        e, _ = model.split(idx)
        w = [t for t in range(n) if (e >> t) & 1]
        lift_val = 0
        for t in w:
            lift_val = model.mul(lift_val, lifts[t])
        rest = model.mul(model.inv(lift_val), idx)
        re, ra = model.split(rest)
        assert re == 0
        coords = a_coords(model.avec(ra))
        return w + [n + int(i) for i in np.nonzero(coords)[0]]

    power: dict = {}
    comm: dict = {}
    for i in range(m):
        power[i] = nf_word(model.power(gen_model[i], 2))
    for i in range(m):
        for j in range(i + 1, m):
            c = model.comm(gen_model[j], gen_model[i])
            if c:
                w = nf_word(c)
                assert all(x > i for x in w), "presentation not polycyclic"
                comm[(i, j)] = w
    return PcGroup(m, power, comm, labels=labels), gen_model


class StructuredGroup:
    """A built family member: model, presentation, and (small) table.

    When the table exists its element ids are pc normal-form bitmasks:
    generator i is id 1 << i and kernel elements occupy the high bits.
    """

    def __init__(self, name: str, pc: PcGroup, model: ExtensionModel, gen_model: list[int]):
        self.name = name
        self.pc = pc
        self.model = model
        self.gen_model = gen_model
        self.n = model.n
        self.kernel_module = model.module
        self.table: GroupTable | None = None
        self.to_model: np.ndarray | None = None
        if model.order <= 4096:
            self._build_relabeled_table()

    @property
    def order(self) -> int:
        return self.model.order

    @property
    def kernel_elements(self) -> list[int]:
        """Kernel element ids (table numbering when available)."""
        dimA = self.model.dimA
        if self.table is None:
            return [self.model.join(0, a) for a in range(1 << dimA)]
        return [a << self.n for a in range(1 << dimA)]

    def _build_relabeled_table(self):
        model, pc = self.model, self.pc
        raw = model.to_table()
        order = model.order
        perm = np.zeros(order, dtype=np.int64)
        for idx in range(order):
            nf = pc.index_nf(idx)
            val = 0
            for i in range(pc.m):
                if nf[i]:
                    val = raw.mul(val, self.gen_model[i])
            perm[idx] = val
        assert len(set(perm.tolist())) == order, "pc normal forms not unique"
        inv_perm = np.zeros(order, dtype=np.int64)
        for new, old in enumerate(perm):
            inv_perm[old] = new
        mult = inv_perm[raw.mult[perm][:, perm]]
        self.table = GroupTable(mult, [1 << i for i in range(pc.m)])
        self.to_model = perm


_family_cache: dict = {}


def build_V(n: int) -> StructuredGroup:
    """Extension of E_n by the second dimension shift, nonsplit class."""
    if n not in (2, 3):
        raise ValueError("rank out of range")
    key = ("V", n)
    if key not in _family_cache:
        module = heller(GModule.trivial(n), 2)
        cocycle, h2 = bar_h2_class(module)
        assert h2 == 1, f"expected a unique nonzero class, got dim {h2}"
        model = ExtensionModel(module, cocycle)
        pc, gen_model = _extract_presentation(model)
        _family_cache[key] = StructuredGroup(f"V({n})", pc, model, gen_model)
    return _family_cache[key]


def build_W(n: int) -> StructuredGroup:
    """Quotient of build_V(n) by the radical of its kernel: exponent 4,
    central elementary abelian Frattini subgroup of rank n + C(n,2)."""
    if n not in (2, 3):
        raise ValueError("rank out of range")
    key = ("W", n)
    if key not in _family_cache:
        module = heller(GModule.trivial(n), 2)
        rad = module.radical()
        quot, proj = module.quotient(rad)
        assert all(a == BitMatrix.identity(quot.dim) for a in quot.acts)
        cocycle, _ = bar_h2_class(module)
        E = 1 << n
        pd = proj.to_dense()
        qc = np.zeros((E, E, quot.dim), dtype=np.uint8)
        for g in range(E):
            for h in range(E):
                qc[g, h] = (pd @ cocycle[g, h]) % 2
        model = ExtensionModel(quot, qc)
        pc, gen_model = _extract_presentation(model)
        _family_cache[key] = StructuredGroup(f"W({n})", pc, model, gen_model)
    return _family_cache[key]


# -- integral lattice variant ----------------------------------------------------


@dataclass
class LatticeExtension:
    quotient_rank: int
    lattice_rank: int
    action: list[np.ndarray]  # integer matrices
    extension_class: np.ndarray  # 2-cocycle valued in M/2M
    mod2_module: GModule
    mod2_iso_to_shift: BitMatrix  # columns convert lattice/2 coords to Omega^2 coords


def _integer_left_kernel(m: sympy.Matrix) -> sympy.Matrix:
    """Saturated basis (rows) of {x in Z^r : x m = 0} via unimodular row ops."""
    r, c = m.shape
    aug = m.row_join(sympy.eye(r))
    row = 0
    for col in range(c):
        # euclidean elimination in this column below `row`
        while True:
            nz = [i for i in range(row, r) if aug[i, col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(aug[i, col]))
            if piv != row:
                aug = aug.elementary_row_op("n<->m", row1=piv, row2=row)
            done = True
            for i in range(row + 1, r):
                if aug[i, col] != 0:
                    q = aug[i, col] // aug[row, col]
                    aug = aug.elementary_row_op("n->n+km", row1=i, row2=row, k=-q)
                    if aug[i, col] != 0:
                        done = False
            if done:
                row += 1
                break
    kernel_rows = [i for i in range(r) if all(aug[i, j] == 0 for j in range(c))]
    return aug[kernel_rows, c:]


def build_X2() -> LatticeExtension:
    """Rank-5 integral lattice extension of the Klein four group."""
    if "X2" not in _family_cache:
        n, E = 2, 4
        # boundary (Z E)^2 -> Z E, e_j -> sigma_j - 1; columns (j, g)
        mat = sympy.zeros(E, 2 * E)
        for j in range(2):
            for g in range(E):
                mat[g ^ (1 << j), j * E + g] += 1
                mat[g, j * E + g] -= 1
        lat = _integer_left_kernel(mat.T)  # rows: Z-basis of the kernel lattice
        assert lat.shape == (5, 2 * E)
        for i in range(5):
            assert (mat * lat.row(i).T).is_zero_matrix
        acts = []
        latT = lat.T
        for t in range(n):
            perm = sympy.zeros(2 * E, 2 * E)
            for j in range(2):
                for g in range(E):
                    perm[j * E + (g ^ (1 << t)), j * E + g] = 1
            img = lat * perm.T
            sol = latT.solve(img.T)  # column i: coordinates of sigma(v_i)
            a = np.array(sol.tolist()).astype(np.int64)
            acts.append(a)
        for a in acts:
            assert np.array_equal((a @ a), np.eye(5, dtype=np.int64))
        assert np.array_equal(acts[0] @ acts[1], acts[1] @ acts[0])
        mod2 = GModule.from_action_dense([a % 2 for a in acts])
        omega2 = heller(GModule.trivial(2), 2)
        from . import gmodules

        iso = None
        homs = gmodules.hom_space(mod2, omega2)
        for bits in range(1, 1 << len(homs)):
            acc = BitMatrix.zeros(5, 5)
            for i in range(len(homs)):
                if (bits >> i) & 1:
                    acc = acc + homs[i]
            if gf2.rank(acc) == 5:
                iso = acc
                break
        assert iso is not None, "mod-2 lattice is not the expected dimension shift"
        cocycle_o, h2 = bar_h2_class(omega2)
        assert h2 == 1
        iso_inv = _gf2_inverse(iso.to_dense())
        ext_class = np.zeros((E, E, 5), dtype=np.uint8)
        for g in range(E):
            for h in range(E):
                ext_class[g, h] = (iso_inv @ cocycle_o[g, h]) % 2
        _family_cache["X2"] = LatticeExtension(
            quotient_rank=2,
            lattice_rank=5,
            action=acts,
            extension_class=ext_class,
            mod2_module=mod2,
            mod2_iso_to_shift=iso,
        )
    return _family_cache["X2"]


# -- group-level checks ----------------------------------------------------------------


def verify_metabelian_identities(table: GroupTable) -> dict:
    """Exhaustive commutator-identity check over a full table.

    (1) [s,[t,g]] [t,[g,s]] [g,[s,t]] = 1 for all triples;
    (2) [s,t]^2 = 1 and [s,t] = [t,s] for all pairs;
    (3) [s^2,t] = [s,[s,t]] = [t,s^2] for all pairs.
    """
    if table.order > 512:
        raise ValueError("exhaustive check capped at order 2^9")
    N = table.order
    mult = table.mult.astype(np.int64)
    inv = table.inv.astype(np.int64)
    idx = np.arange(N)
    comm = mult[mult[inv[:, None], inv[None, :]], mult[idx[:, None], idx[None, :]]]
    report = {"order": N, "pairs": N * N, "triples": N * N * N}
    report["comm_square_violations"] = int(
        np.count_nonzero(mult[comm, comm])
    )
    report["comm_symmetry_violations"] = int(np.count_nonzero(comm != comm.T))
    squares = mult[idx, idx]
    lhs3 = comm[squares[:, None], idx[None, :]]
    mid3 = comm[idx[:, None], comm[idx[:, None], idx[None, :]]]
    rhs3 = comm[idx[None, :], squares[:, None]]
    report["power_comm_violations"] = int(
        np.count_nonzero(lhs3 != mid3) + np.count_nonzero(lhs3 != rhs3)
    )
    jac = 0
    for s in range(N):
        comm_s = comm[s]
        a = comm_s[comm]  # [s, [t,g]] at (t, g)
        b = comm[:, comm[:, s]]  # [t, [g,s]] at (t, g)
        cmat = comm[:, comm_s].T  # [g, [s,t]] at (t, g)
        jac += int(np.count_nonzero(mult[mult[a, b], cmat]))
    report["jacobi_violations"] = jac
    report["ok"] = all(
        report[k] == 0
        for k in (
            "comm_square_violations",
            "comm_symmetry_violations",
            "power_comm_violations",
            "jacobi_violations",
        )
    )
    return report


@dataclass
class ExtensionData:
    """Quotient rank, kernel module, and square/commutator pair data."""

    n: int
    kernel_rank: int
    action: GModule
    pair_data: dict  # (i, j), i <= j -> kernel coordinate vector
    kernel_elements: list[int]
    group: GroupTable | None = None


def _kernel_log(table: GroupTable, kernel: list[int]):
    """Greedy basis of an elementary abelian subgroup plus discrete logs."""
    kbasis: list[int] = []
    logs = {0: np.zeros(0, dtype=np.uint8)}
    for a in kernel:
        if a == 0:
            continue
        if a in logs:
            continue
        new = {}
        vec = np.zeros(len(kbasis) + 1, dtype=np.uint8)
        vec[-1] = 1
        for val, lv in logs.items():
            nv = np.concatenate([lv, [0]]).astype(np.uint8)
            new[val] = nv
            w = table.mul(val, a)
            nw = nv.copy()
            nw[-1] = 1
            new[w] = nw
        logs = new
        kbasis.append(a)
    size = 1 << len(kbasis)
    assert len(logs) == size == len(kernel), "kernel not elementary abelian"
    logs = {k: np.resize(v, len(kbasis)) for k, v in logs.items()}
    return kbasis, logs


def extension_data(sg: StructuredGroup, kernel_elems=None) -> ExtensionData:
    """Extension data of the group over a normal elementary abelian kernel."""
    table = sg.table
    assert table is not None, "extension data needs the table view"
    kernel = sorted(kernel_elems if kernel_elems is not None else sg.kernel_elements)
    kset = set(kernel)
    for a in kernel:
        if table.mul(a, a) != 0:
            raise ValueError("kernel not elementary abelian")
        for g in table.gens:
            if table.conj(a, g) not in kset:
                raise ValueError("kernel not normal")
    quot, belong = table.quotient_table(kernel)
    if any(quot.mul(x, x) != 0 for x in range(quot.order)):
        raise ValueError("quotient not elementary abelian")
    n = (quot.order - 1).bit_length() if quot.order > 1 else 0
    kbasis, klog = _kernel_log(table, kernel)
    kdim = len(kbasis)
    qgens: list[int] = []
    lifts: list[int] = []
    for g in table.gens:
        q = int(belong[g])
        if q and q not in qgens:
            # require independence in the quotient
            reach = quot.closure(qgens)
            if q not in reach:
                qgens.append(q)
                lifts.append(g)
    assert len(lifts) == n, "generators do not lift a quotient basis"
    acts = []
    for g in lifts:
        dense = np.zeros((kdim, kdim), dtype=np.uint8)
        for i, b in enumerate(kbasis):
            dense[:, i] = klog[table.conj(b, g)]
        acts.append(BitMatrix.from_dense(dense))
    action = GModule(n, kdim, acts, check=False)
    pair = {}
    for i in range(n):
        pair[(i, i)] = klog[table.power(lifts[i], 2)]
        for j in range(i + 1, n):
            pair[(i, j)] = klog[table.comm(lifts[i], lifts[j])]
    return ExtensionData(
        n=n,
        kernel_rank=kdim,
        action=action,
        pair_data=pair,
        kernel_elements=kernel,
        group=table,
    )


def sphere_action_check(n: int = 2) -> dict:
    """Monomial sphere representations of the order-128 group.

    Five 4-dimensional +-1 monomial representations, induced from the
    characters of the Frattini subgroup dual to the canonical kernel
    basis; checks every involution acts as -I in at least one.
    """
    if n != 2:
        raise ValueError("only the rank-2 case is supported")
    sg = build_V(2)
    table = sg.table
    kernel = sg.kernel_elements
    kset = set(kernel)
    assert table.frattini() == kernel, "Frattini subgroup differs from the kernel"
    kbasis, klog = _kernel_log(table, kernel)
    kdim = len(kbasis)
    reps: list[int] = []
    coset_of: dict[int, int] = {}
    for g in range(table.order):
        if g in coset_of:
            continue
        i = len(reps)
        reps.append(g)
        for x in kernel:
            coset_of[table.mul(g, x)] = i
    involutions = table.involutions()
    assert all(t in kset for t in involutions), "involution outside the kernel"

    def induced_matrix(char_idx: int, g: int):
        perm = np.zeros(len(reps), dtype=np.int64)
        signs = np.zeros(len(reps), dtype=np.int64)
        for i, r in enumerate(reps):
            t = table.mul(g, r)
            j = coset_of[t]
            a = table.mul(int(table.inv[reps[j]]), t)
            perm[i] = j
            signs[i] = -1 if klog[a][char_idx] else 1
        return perm, signs

    failures = []
    for t in involutions:
        hit = False
        for ci in range(kdim):
            perm, signs = induced_matrix(ci, t)
            if np.all(perm == np.arange(len(reps))) and np.all(signs == -1):
                hit = True
                break
        if not hit:
            failures.append(t)
    return {
        "count": kdim,
        "dimension": len(reps),
        "involutions": len(involutions),
        "failures": failures,
        "ok": not failures,
    }
