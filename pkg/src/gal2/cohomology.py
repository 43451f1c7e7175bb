"""Group cohomology of finite 2-groups via minimal free resolutions.

A resolution step keeps, for each homological degree i, the b_i minimal
generators of the i-th kernel as packed vectors in (kG)^{b_{i-1}}, with
coordinates (block j, group element g) = j*|G| + g.  The full boundary
matrix is expanded on demand: row (j, g) is the translate g . v_j.

Minimality makes dim H^i(G, F_2) = b_i, so Betti numbers come straight
off the construction; boundary-of-boundary and augmentation-ideal
minimality are verified explicitly.

Also here: the quadratic/cubic polynomial classes on elementary abelian
quotients, the degree-(0,1) and (1,1) differentials of a central
extension presented by its square/commutator pair data, and the
surviving corner of the second page computed as an explicit kernel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import gf2
from .gf2 import WORD, BitMatrix
from .pgroups import ExtensionData, GroupTable


class ResourceCap(Exception):
    pass


# -- packed translation helpers -----------------------------------------------------


class _Translator:
    """Block-wise left-translation of packed vectors over (kG)^b."""

    def __init__(self, table: GroupTable):
        self.N = table.order
        assert self.N % WORD == 0 or self.N in (2, 4, 8, 16, 32), "order must be a 2-power"
        # PERM[g, h] = index of g^{-1} h
        inv = table.inv
        self.perm = np.zeros((self.N, self.N), dtype=np.intp)
        for g in range(self.N):
            self.perm[g] = table.mult[int(inv[g])]

    def expand(self, gens: np.ndarray, b_prev: int) -> np.ndarray:
        """All translates of all generators: rows (j, g) = g . v_j.

        gens: packed (b, words) uint64 over b_prev * N bits.
        Returns packed array (b * N, words).
        """
        b = gens.shape[0]
        N = self.N
        width = b_prev * N
        dense = np.unpackbits(gens.view(np.uint8), axis=1, bitorder="little")[:, :width]
        out = np.zeros((b * N, gens.shape[1]), dtype=np.uint64)
        for j in range(b):
            block = dense[j].reshape(b_prev, N)
            allg = block[:, self.perm]  # (b_prev, N_g, N_h)
            allg = np.transpose(allg, (1, 0, 2)).reshape(N, width)
            packed = np.packbits(allg, axis=1, bitorder="little")
            pad = np.zeros((N, gens.shape[1] * 8), dtype=np.uint8)
            pad[:, : packed.shape[1]] = packed
            out[j * N : (j + 1) * N] = pad.view(np.uint64)
        return out

    def translate_rows(self, rows: np.ndarray, g: int, b_prev: int) -> np.ndarray:
        """g . v for every packed row v over (kG)^{ب_prev}."""
        N = self.N
        width = b_prev * N
        dense = np.unpackbits(rows.view(np.uint8), axis=1, bitorder="little")[:, :width]
        dense = dense.reshape(rows.shape[0], b_prev, N)[:, :, self.perm[g]]
        dense = dense.reshape(rows.shape[0], width)
        packed = np.packbits(dense, axis=1, bitorder="little")
        out = np.zeros((rows.shape[0], rows.shape[1] * 8), dtype=np.uint8)
        out[:, : packed.shape[1]] = packed
        return out.view(np.uint64)


def _eliminate_tracked(data: np.ndarray, ncols: int):
    """Forward elimination keeping the original row index of each pivot.

    Returns list of (pivot_row_position, column, original_row_index).
    """
    nrows = data.shape[0]
    perm = np.arange(nrows)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        w, bshift = divmod(c, WORD)
        colbits = (data[r:, w] >> np.uint64(bshift)) & np.uint64(1)
        nz = np.nonzero(colbits)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
            perm[[r, p]] = perm[[p, r]]
        if nz.size > 1:
            rows = r + nz[1:]
            data[rows] ^= data[r]
        pivots.append((r, c, int(perm[r])))
        r += 1
    return pivots


# -- minimal resolutions ----------------------------------------------------------------


@dataclass
class MinimalResolution:
    group: GroupTable
    group_gens: list[int]
    betti: list[int]
    gens: list[np.ndarray]  # degree i >= 1: packed (b_i, words(b_{i-1}*N))

    @property
    def max_degree(self) -> int:
        return len(self.betti) - 1

    def boundary_rows(self, i: int) -> np.ndarray:
        """Expanded boundary at degree i: row (j,g) = coords of g . v_j."""
        tr = _Translator(self.group)
        b_prev = self.betti[i - 1]
        return tr.expand(self.gens[i - 1], b_prev)

    def boundary_matrix(self, i: int) -> BitMatrix:
        rows = self.boundary_rows(i)
        return BitMatrix(rows.shape[0], self.betti[i - 1] * self.group.order, rows)

    def verify(self, spot_check: int = 4) -> dict:
        """Minimality (entries in the augmentation ideal) and d o d = 0."""
        N = self.group.order
        report = {"minimal": True, "composite_zero": True}
        for i, gmat in enumerate(self.gens, start=1):
            b_prev = self.betti[i - 1]
            dense = np.unpackbits(gmat.view(np.uint8), axis=1, bitorder="little")
            dense = dense[:, : b_prev * N].reshape(gmat.shape[0], b_prev, N)
            if np.any(dense.sum(axis=2) % 2):
                report["minimal"] = False
        for i in range(2, len(self.gens) + 1):
            rows = self.boundary_rows(i - 1)
            gmat = self.gens[i - 1]
            width = self.betti[i - 1] * N
            dense = np.unpackbits(gmat.view(np.uint8), axis=1, bitorder="little")[:, :width]
            take = min(spot_check, gmat.shape[0]) if spot_check else gmat.shape[0]
            for r in range(take):
                idx = np.nonzero(dense[r])[0]
                acc = np.bitwise_xor.reduce(rows[idx], axis=0)
                if np.any(acc):
                    report["composite_zero"] = False
        return report


def minimal_resolution(table: GroupTable, max_degree: int) -> MinimalResolution:
    """Minimal free resolution of the trivial module to the given degree."""
    if table.order > 256:
        raise ResourceCap("group order capped at 2^8")
    if max_degree > 10:
        raise ResourceCap("resolution degree capped at 10")
    N = table.order
    tr = _Translator(table)
    # minimal generating set of the group
    frat = table.frattini()
    mingens: list[int] = []
    reach = set(frat)
    while len(reach) < N:
        for g in range(1, N):
            if g not in reach:
                mingens.append(g)
                reach = set(table.closure(list(frat) + mingens))
                break
    words1 = gf2._nwords(N)
    g1 = np.zeros((len(mingens), words1), dtype=np.uint64)
    for j, g in enumerate(mingens):
        for pos in (0, g):
            g1[j, pos // WORD] ^= np.uint64(1) << np.uint64(pos % WORD)
    betti = [1, len(mingens)]
    gens = [g1]
    for i in range(1, max_degree):
        b_i, b_prev = betti[i], betti[i - 1]
        rows = tr.expand(gens[i - 1], b_prev)  # (b_i*N, words(b_prev*N))
        src_dim = b_i * N
        left_cols = b_prev * N
        wl = gf2._nwords(left_cols)
        wr = gf2._nwords(src_dim)
        aug = np.zeros((src_dim, wl + wr), dtype=np.uint64)
        aug[:, :wl] = rows
        for r in range(src_dim):
            aug[r, wl + r // WORD] |= np.uint64(1) << np.uint64(r % WORD)
        rank = len(gf2._eliminate(aug, left_cols))
        kernel = aug[rank:, wl:].copy()  # (dim_K, words(src_dim))
        del aug, rows
        # radical span: (sigma_t + 1) K for the minimal group generators
        rad_blocks = [
            tr.translate_rows(kernel, g, b_i) ^ kernel for g in mingens
        ]
        stacked = np.vstack(rad_blocks + [kernel])
        rad_count = sum(b.shape[0] for b in rad_blocks)
        del rad_blocks
        pivots = _eliminate_tracked(stacked, src_dim)
        selected = [r for (r, c, orig) in pivots if orig >= rad_count]
        new_gens = stacked[selected].copy()
        del stacked
        betti.append(len(selected))
        gens.append(new_gens)
    return MinimalResolution(table, mingens, betti, gens)


def verify_rational_series(ranks, numerator, denominator) -> bool:
    """Does numerator/denominator expand to the given integer sequence?

    Polynomials are coefficient lists, constant term first.
    """
    n = len(ranks)
    den0 = denominator[0]
    assert den0 != 0
    series = []
    for i in range(n):
        acc = numerator[i] if i < len(numerator) else 0
        for j in range(1, min(i, len(denominator) - 1) + 1):
            acc -= denominator[j] * series[i - j]
        if acc % den0:
            return False
        series.append(acc // den0)
    return list(ranks) == series


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# -- restriction to subgroups -------------------------------------------------------------


class _RowSolver:
    """Tracked echelon over the rows of a packed matrix, for linear solves."""

    def __init__(self, rows: np.ndarray, ncols: int):
        self.ech = gf2.Echelon(ncols, track=True)
        for i in range(rows.shape[0]):
            self.ech.add_row(rows[i], i)

    def solve(self, rhs: np.ndarray, dim: int) -> np.ndarray | None:
        """Coefficients x (dense over row indices) with x . rows = rhs."""
        red, tag = self.ech.reduce(rhs)
        if np.any(red):
            return None
        x = np.zeros(dim, dtype=np.uint8)
        for t in tag:
            x[t] ^= 1
        return x


def _pack_bits(dense: np.ndarray, width: int) -> np.ndarray:
    packed = np.packbits(dense[:width], bitorder="little")
    out = np.zeros(gf2._nwords(width) * 8, dtype=np.uint8)
    out[: packed.shape[0]] = packed
    return out.view(np.uint64)


def restriction_matrices(
    res_g: MinimalResolution, subgroup_elems: list[int], degree: int
) -> list[np.ndarray]:
    """Matrices of H^i(G) -> H^i(H) for i <= degree, via chain-map lifting.

    Returns dense uint8 matrices of shape (c_i, b_i).
    """
    table = res_g.group
    N = table.order
    sub_sorted = sorted(subgroup_elems)
    htable, pos = table.subgroup_table(sub_sorted)
    emb = sub_sorted  # h-index -> g-index
    res_h = minimal_resolution(htable, degree)
    tr_g = _Translator(table)
    NH = htable.order
    # f_i(e_q) stored as packed vectors over b_i^G * N bits
    f_prev = [np.zeros(gf2._nwords(N) * 1, dtype=np.uint64)]
    f_prev[0][0] = np.uint64(1)  # f_0(e_0) = identity basis vector
    out = [np.array([[1]], dtype=np.uint8)]
    for i in range(1, degree + 1):
        rows_p = res_g.boundary_rows(i)
        solver = _RowSolver(rows_p, res_g.betti[i - 1] * N)
        ch = res_h.betti[i]
        width_prev_h = res_h.betti[i - 1] * NH
        gens_h = res_h.gens[i - 1]
        dense_h = np.unpackbits(gens_h.view(np.uint8), axis=1, bitorder="little")[
            :, :width_prev_h
        ]
        f_cur = []
        width_prev_g = res_g.betti[i - 1] * N
        for q in range(ch):
            rhs = np.zeros(gf2._nwords(width_prev_g), dtype=np.uint64)
            coords = np.nonzero(dense_h[q])[0]
            for c in coords:
                k, h = divmod(int(c), NH)
                vec = f_prev[k].reshape(1, -1)
                moved = tr_g.translate_rows(vec, emb[h], res_g.betti[i - 1])[0]
                rhs = rhs ^ moved
            x = solver.solve(rhs, res_g.betti[i] * N)
            assert x is not None, "chain map lifting failed"
            f_cur.append(_pack_bits(x, res_g.betti[i] * N))
        # cohomology matrix: block parities of f_i(e_q)
        mat = np.zeros((ch, res_g.betti[i]), dtype=np.uint8)
        for q in range(ch):
            dense = np.unpackbits(f_cur[q].view(np.uint8), bitorder="little")[
                : res_g.betti[i] * N
            ].reshape(res_g.betti[i], N)
            mat[q] = dense.sum(axis=1) % 2
        out.append(mat)
        f_prev = f_cur
    return out


def restriction_ranks(
    res_g: MinimalResolution, subgroups: list[list[int]], degree: int
) -> dict:
    """Rank of the joint restriction H^i(G) -> sum over subgroups, per degree."""
    if degree > 4:
        raise ResourceCap("restriction degree capped at 4")
    mats: dict[int, list[np.ndarray]] = {i: [] for i in range(degree + 1)}
    for sub in subgroups:
        ms = restriction_matrices(res_g, sub, degree)
        for i in range(degree + 1):
            mats[i].append(ms[i])
    report = {"degrees": list(range(degree + 1)), "ranks": [], "dims": [], "full": []}
    for i in range(degree + 1):
        stacked = np.vstack(mats[i])
        rk = gf2.rank(BitMatrix.from_dense(stacked))
        report["ranks"].append(int(rk))
        report["dims"].append(res_g.betti[i])
        report["full"].append(rk == res_g.betti[i])
    return report


# -- polynomial classes on the elementary abelian quotient ------------------------------------


def monomials(n: int, degree: int) -> list[tuple]:
    return list(itertools.combinations_with_replacement(range(n), degree))


@dataclass
class PolyClass:
    """A homogeneous polynomial class on an elementary abelian quotient."""

    n: int
    degree: int
    coeffs: np.ndarray  # over monomials(n, degree)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def monomial_terms(self) -> list[tuple]:
        basis = monomials(self.n, self.degree)
        return [basis[i] for i in np.nonzero(self.coeffs)[0]]

    def __eq__(self, other):
        return (
            isinstance(other, PolyClass)
            and self.n == other.n
            and self.degree == other.degree
            and np.array_equal(self.coeffs, other.coeffs)
        )


@dataclass
class CentralExtension:
    """Pair data of a central extension of E_n by an elementary abelian group.

    pair_matrix has one row per monomial (i, j), i <= j, giving the kernel
    coordinates of the element sigma_i^2 (i = j) or [sigma_i, sigma_j]
    (i < j) -- equivalently, the degree-2 differential in dual form.
    """

    n: int
    phi_rank: int
    pair_matrix: np.ndarray  # (num_pairs, phi_rank) uint8

    @staticmethod
    def universal(n: int) -> "CentralExtension":
        pairs = monomials(n, 2)
        return CentralExtension(n, len(pairs), np.eye(len(pairs), dtype=np.uint8))

    @staticmethod
    def from_extension_data(ed: ExtensionData) -> "CentralExtension":
        pairs = monomials(ed.n, 2)
        mat = np.zeros((len(pairs), ed.kernel_rank), dtype=np.uint8)
        for r, (i, j) in enumerate(pairs):
            mat[r] = ed.pair_data[(i, j)]
        return CentralExtension(ed.n, ed.kernel_rank, mat)

    @staticmethod
    def from_symbol_gram(gram: np.ndarray) -> "CentralExtension":
        """Demuskin-type model: dual classes are the quadratic forms killed
        by the symbol functional q_{ij} -> (b_i, b_j)."""
        gram = np.asarray(gram, dtype=np.uint8) % 2
        n = gram.shape[0]
        pairs = monomials(n, 2)
        functional = np.array([gram[i, j] for (i, j) in pairs], dtype=np.uint8)
        if not functional.any():
            raise ValueError("symbol functional vanishes; not a Demuskin model")
        ker = gf2.kernel_basis(BitMatrix.from_dense(functional.reshape(1, -1)))
        # dual-basis pair data: pair_matrix = transpose of the kernel basis
        basis = ker.to_dense()  # (phi_rank, num_pairs)
        return CentralExtension(n, basis.shape[0], basis.T.copy())


def d2_01(ext: CentralExtension, phi_class: np.ndarray) -> PolyClass:
    """Degree-2 class of a kernel-dual vector: pairings against the pair data."""
    phi_class = np.asarray(phi_class, dtype=np.uint8)
    assert phi_class.shape == (ext.phi_rank,)
    coeffs = (ext.pair_matrix @ phi_class) % 2
    return PolyClass(ext.n, 2, coeffs.astype(np.uint8))


def d2_11(ext: CentralExtension, element: np.ndarray) -> PolyClass:
    """Degree-3 image of an element of H^1 tensor the kernel dual.

    element[i] is the kernel-dual vector tensored with a_i; the image is
    sum_i a_i * d2_01(element[i]).
    """
    element = np.asarray(element, dtype=np.uint8)
    assert element.shape == (ext.n, ext.phi_rank)
    deg3 = monomials(ext.n, 3)
    idx3 = {m: i for i, m in enumerate(deg3)}
    pairs = monomials(ext.n, 2)
    out = np.zeros(len(deg3), dtype=np.uint8)
    for i in range(ext.n):
        q = d2_01(ext, element[i])
        for r in np.nonzero(q.coeffs)[0]:
            (a, b) = pairs[r]
            out[idx3[tuple(sorted((i, a, b)))]] ^= 1
    return PolyClass(ext.n, 3, out)


def einfty11(ext: CentralExtension) -> tuple[int, np.ndarray]:
    """Kernel of the (1,1) differential: (dimension, basis rows).

    Basis rows are flattened (n x phi_rank) source elements.
    """
    n, pr = ext.n, ext.phi_rank
    deg3 = monomials(n, 3)
    src = n * pr
    mat = np.zeros((src, len(deg3)), dtype=np.uint8)
    for i in range(n):
        for z in range(pr):
            element = np.zeros((n, pr), dtype=np.uint8)
            element[i, z] = 1
            mat[i * pr + z] = d2_11(ext, element).coeffs
    m = BitMatrix.from_dense(mat)
    ker = gf2.left_kernel(m)
    return ker.rows, ker.to_dense()
