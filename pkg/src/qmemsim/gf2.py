"""GF(2) linear algebra on int-packed bit rows, plus min-weight coset search.

Rows are Python ints (bit i = column i), which keeps row operations single
XORs regardless of width.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliOperator

# Meet-in-the-middle enumeration is exact and fast up to this basis rank;
# beyond it the search falls back to weight-bounded candidate enumeration.
MITM_MAX_RANK = 30


class BinaryMatrix:
    """Row-major bit matrix over GF(2)."""

    def __init__(self, rows: Iterable[int], ncols: int):
        self.rows = list(rows)
        self.ncols = ncols
        for r in self.rows:
            if not 0 <= r < (1 << ncols):
                raise ValueError("row exceeds column count")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]]) -> "BinaryMatrix":
        ncols = len(rows[0]) if rows else 0
        packed = []
        for row in rows:
            if len(row) != ncols:
                raise ValueError("ragged rows")
            packed.append(sum((b & 1) << i for i, b in enumerate(row)))
        return cls(packed, ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def row_reduce(self) -> tuple[list[int], list[int]]:
        """Return (reduced rows without zeros, pivot column per row)."""
        rows = list(self.rows)
        pivots: list[int] = []
        reduced: list[int] = []
        for col in range(self.ncols):
            pivot_row = None
            for i, r in enumerate(rows):
                if r >> col & 1:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            p = rows.pop(pivot_row)
            rows = [r ^ p if r >> col & 1 else r for r in rows]
            reduced = [r ^ p if r >> col & 1 else r for r in reduced]
            reduced.append(p)
            pivots.append(col)
        return reduced, pivots

    def rank(self) -> int:
        return len(self.row_reduce()[0])

    def nullspace(self) -> list[int]:
        """Basis of {v : row·v = 0 mod 2 for every row}."""
        reduced, pivots = self.row_reduce()
        pivot_set = set(pivots)
        free_cols = [c for c in range(self.ncols) if c not in pivot_set]
        basis = []
        for free in free_cols:
            vec = 1 << free
            for row, piv in zip(reduced, pivots):
                if row >> free & 1:
                    vec |= 1 << piv
            basis.append(vec)
        return basis

    def contains(self, vec: int) -> bool:
        """True iff ``vec`` lies in the row span."""
        reduced, pivots = self.row_reduce()
        return _reduce_against(vec, reduced, pivots) == 0


def _reduce_against(vec: int, reduced: list[int], pivots: list[int]) -> int:
    for row, piv in zip(reduced, pivots):
        if vec >> piv & 1:
            vec ^= row
    return vec


def rank_gf2(m: BinaryMatrix) -> int:
    return m.rank()


def nullspace_gf2(m: BinaryMatrix) -> list[int]:
    return m.nullspace()


class LinearSolver:
    """Factorized solver for parity systems parity(row_i & x) = b_i.

    Factorization happens once; per-call solves are O(rank) XORs, which
    matters when decoding inside sweep loops.
    """

    def __init__(self, rows: Sequence[int], ncols: int):
        self.ncols = ncols
        # Augment each row with its index bit so the RREF tracks which
        # combination of original rows produced each reduced row.
        aug = [r | (1 << (ncols + i)) for i, r in enumerate(rows)]
        self.nrows = len(rows)
        reduced: list[int] = []
        pivots: list[int] = []
        col_mask = (1 << ncols) - 1
        for col in range(ncols):
            pivot_row = None
            for i, r in enumerate(aug):
                if r >> col & 1:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            p = aug.pop(pivot_row)
            aug = [r ^ p if r >> col & 1 else r for r in aug]
            reduced = [r ^ p if r >> col & 1 else r for r in reduced]
            reduced.append(p)
            pivots.append(col)
        self._reduced = reduced
        self._pivots = pivots
        self._col_mask = col_mask
        # Rows left with empty coefficient part encode consistency constraints.
        self._constraints = [r >> ncols for r in aug if r & col_mask == 0]
        self.rank = len(pivots)

    def solve(self, b: int) -> int | None:
        """One solution mask x with parity(row_i & x) = bit i of b, or None."""
        for combo in self._constraints:
            if (b & combo).bit_count() & 1:
                return None
        x = 0
        for row, piv in zip(self._reduced, self._pivots):
            rhs = (b & (row >> self.ncols)).bit_count() & 1
            # Back-substitution: reduced rows may still touch free columns,
            # which we fix to zero, and earlier-solved pivots.
            acc = (x & row & self._col_mask).bit_count() & 1
            if rhs ^ acc:
                x |= 1 << piv
        return x


def _pack_lanes(masks: Sequence[int], nbits: int) -> np.ndarray:
    """Pack int bitmasks into rows of uint64 lanes for vectorized popcounts."""
    nlanes = max(1, (nbits + 63) // 64)
    out = np.zeros((len(masks), nlanes), dtype=np.uint64)
    for i, m in enumerate(masks):
        for lane in range(nlanes):
            out[i, lane] = (m >> (64 * lane)) & 0xFFFFFFFFFFFFFFFF
    return out


def _unpack_lanes(row: np.ndarray) -> int:
    val = 0
    for lane, word in enumerate(row.tolist()):
        val |= int(word) << (64 * lane)
    return val


def _combo_table(lanes: np.ndarray) -> np.ndarray:
    """All 2^k XOR combinations of k lane-rows, indexed by combination bits."""
    k, nlanes = lanes.shape
    table = np.zeros((1, nlanes), dtype=np.uint64)
    for j in range(k):
        table = np.concatenate([table, table ^ lanes[j]], axis=0)
    return table


@dataclass(frozen=True)
class CosetMinWeight:
    weight: int | None
    witness: PauliOperator | None
    exhausted: bool


def coset_min_weight(
    generators: Sequence[PauliOperator],
    offset: PauliOperator,
    weight_cap: int | None = None,
) -> CosetMinWeight:
    """Minimum Pauli weight of offset*g over the group generated by ``generators``.

    Exact whenever the reduced generator rank is at most MITM_MAX_RANK
    (meet-in-the-middle enumeration); otherwise candidates are enumerated in
    increasing weight up to ``weight_cap`` and the result is flagged
    ``exhausted`` when the cap is hit without a find.
    """
    n = offset.n
    for g in generators:
        if g.n != n:
            raise ValueError(f"dimension mismatch: {g.n} != {n}")
    if weight_cap is None:
        weight_cap = offset.weight
    sym = BinaryMatrix([g.symplectic() for g in generators], 2 * n)
    reduced, _ = sym.row_reduce()
    rank = len(reduced)
    if rank <= MITM_MAX_RANK:
        return _min_weight_mitm(n, reduced, offset)
    return _min_weight_by_candidates(n, sym, generators, offset, weight_cap)


def _min_weight_mitm(n: int, basis_rows: list[int], offset: PauliOperator) -> CosetMinWeight:
    if not basis_rows:
        return CosetMinWeight(offset.weight, offset, False)
    x_masks = []
    z_masks = []
    qmask = (1 << n) - 1
    for row in basis_rows:
        x_masks.append(row & qmask)
        z_masks.append(row >> n)
    half = (len(basis_rows) + 1) // 2
    ax = _combo_table(_pack_lanes(x_masks[:half], n))
    az = _combo_table(_pack_lanes(z_masks[:half], n))
    bx = _combo_table(_pack_lanes(x_masks[half:], n))
    bz = _combo_table(_pack_lanes(z_masks[half:], n))
    offx = _pack_lanes([offset.x_bits], n)[0]
    offz = _pack_lanes([offset.z_bits], n)[0]

    best = n + 1
    best_idx = (0, 0)
    for ia in range(ax.shape[0]):
        support = (ax[ia] ^ offx ^ bx) | (az[ia] ^ offz ^ bz)
        weights = np.bitwise_count(support).sum(axis=1)
        ib = int(np.argmin(weights))
        w = int(weights[ib])
        if w < best:
            best = w
            best_idx = (ia, ib)
            if best == 0:
                break
    ia, ib = best_idx
    wx = _unpack_lanes(ax[ia] ^ bx[ib]) ^ offset.x_bits
    wz = _unpack_lanes(az[ia] ^ bz[ib]) ^ offset.z_bits
    return CosetMinWeight(best, PauliOperator(n, wx, wz), False)


def _min_weight_by_candidates(
    n: int,
    sym: BinaryMatrix,
    generators: Sequence[PauliOperator],
    offset: PauliOperator,
    weight_cap: int,
) -> CosetMinWeight:
    reduced, pivots = sym.row_reduce()
    # Pure-type cosets (all generators and the offset share one Pauli type)
    # only ever contain that type, so candidate enumeration can skip the
    # 3^w type assignments.
    pure_x = offset.z_bits == 0 and all(g.z_bits == 0 for g in generators)
    pure_z = offset.x_bits == 0 and all(g.x_bits == 0 for g in generators)
    kinds = ["X"] if pure_x else ["Z"] if pure_z else ["X", "Y", "Z"]

    off_sym = offset.symplectic()
    for w in range(0, weight_cap + 1):
        for support in itertools.combinations(range(n), w):
            for assignment in itertools.product(kinds, repeat=w):
                x = z = 0
                for q, kind in zip(support, assignment):
                    if kind != "Z":
                        x |= 1 << q
                    if kind != "X":
                        z |= 1 << q
                cand = x | (z << n)
                if _reduce_against(cand ^ off_sym, reduced, pivots) == 0:
                    return CosetMinWeight(w, PauliOperator(n, x, z), False)
    return CosetMinWeight(None, None, True)
