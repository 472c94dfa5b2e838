"""Read-out decoders: syndrome in, correction out.

Decoders never see the true error, only its syndrome; the harness composes
the returned correction with the hidden error to evaluate error-corrected
logical observables.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gf2 import LinearSolver
from .models import CodeModel
from .pauli import PauliOperator

GREEDY_PLATEAU_STEPS = 32
GREEDY_BUDGET_FACTOR = 64


class MajorityTieError(ValueError):
    """Raised when the magnetization is exactly zero (possible only for even n)."""


@dataclass(frozen=True)
class Correction:
    pauli: PauliOperator
    cleared: bool
    cost: int
    decoder_id: str


def magnetization(m: CodeModel, error: PauliOperator) -> float:
    """Mean spin value of the configuration reached by applying X flips to all-up."""
    return 1.0 - 2.0 * error.x_bits.bit_count() / m.n


def majority_vote(m: CodeModel, error: PauliOperator) -> int:
    """Read the stored bit from the sign of the magnetization."""
    if not m.classical:
        raise ValueError("majority vote is defined for classical models only")
    mag = magnetization(m, error)
    if mag > 0:
        return 0
    if mag < 0:
        return 1
    raise MajorityTieError(f"magnetization is zero (n={m.n} even)")


# Per-model toggle tables: flipping X (Z) on qubit q toggles the syndrome
# bits of checks whose Z (X) support contains q.
_toggle_cache: dict[int, tuple[list[int], list[int]]] = {}


def qubit_toggle_masks(m: CodeModel) -> tuple[list[int], list[int]]:
    key = id(m)
    cached = _toggle_cache.get(key)
    if cached is not None:
        return cached
    tgl_x = [0] * m.n
    tgl_z = [0] * m.n
    for c, chk in enumerate(m.checks):
        p = chk.pauli
        bit = 1 << c
        zb = p.z_bits
        xb = p.x_bits
        for q in range(m.n):
            if zb >> q & 1:
                tgl_x[q] |= bit
            if xb >> q & 1:
                tgl_z[q] |= bit
    _toggle_cache[key] = (tgl_x, tgl_z)
    return tgl_x, tgl_z


_solver_cache: dict[int, LinearSolver] = {}


def _classical_solver(m: CodeModel) -> LinearSolver:
    key = id(m)
    solver = _solver_cache.get(key)
    if solver is None:
        rows = [c.pauli.z_bits for c in m.checks_of_kind("Z")]
        solver = LinearSolver(rows, m.n)
        _solver_cache[key] = solver
    return solver


def majority_correction(m: CodeModel, syndrome: int,
                        rng: np.random.Generator | None = None) -> Correction:
    """Majority read-out as a syndrome decoder.

    The domain-wall syndrome fixes the spin configuration up to the global
    flip; choosing the lighter of the two is exactly the sign-of-M rule.
    """
    if not m.classical:
        raise ValueError("majority decoder is defined for classical models only")
    solver = _classical_solver(m)
    e0 = solver.solve(syndrome)
    if e0 is None:
        return Correction(PauliOperator.identity(m.n), False, 0, "majority")
    ones = (1 << m.n) - 1
    e1 = e0 ^ ones
    w0 = e0.bit_count()
    w1 = e1.bit_count()
    if w0 == w1:
        # An exact tie is undecidable by design; report a non-clearing result.
        return Correction(PauliOperator.identity(m.n), False, 0, "majority")
    pick = e0 if w0 < w1 else e1
    return Correction(PauliOperator(m.n, pick, 0), True, pick.bit_count(), "majority")


def syndrome_of_pauli(m: CodeModel, x_bits: int, z_bits: int) -> int:
    tgl_x, tgl_z = qubit_toggle_masks(m)
    syn = 0
    mask = x_bits
    while mask:
        low = mask & (-mask)
        syn ^= tgl_x[low.bit_length() - 1]
        mask ^= low
    mask = z_bits
    while mask:
        low = mask & (-mask)
        syn ^= tgl_z[low.bit_length() - 1]
        mask ^= low
    return syn


def ml_bruteforce(m: CodeModel, syndrome: int,
                  rng: np.random.Generator | None = None, *,
                  weight_cap: int | None = None) -> Correction:
    """Minimum-weight Pauli with the given syndrome, by increasing-weight search.

    Ties break deterministically: lowest weight, then lexicographic support,
    then X before Y before Z per qubit.
    """
    if m.n > 20 and weight_cap is None:
        raise ValueError(f"n={m.n} > 20: supply a weight cap")
    cap = weight_cap if weight_cap is not None else m.n
    tgl_x, tgl_z = qubit_toggle_masks(m)
    kinds = ("X",) if m.classical else ("X", "Y", "Z")
    for w in range(cap + 1):
        for support in itertools.combinations(range(m.n), w):
            for assignment in itertools.product(kinds, repeat=w):
                syn = 0
                x = z = 0
                for q, kind in zip(support, assignment):
                    if kind != "Z":
                        x |= 1 << q
                        syn ^= tgl_x[q]
                    if kind != "X":
                        z |= 1 << q
                        syn ^= tgl_z[q]
                if syn == syndrome:
                    return Correction(PauliOperator(m.n, x, z), True, w, "ml")
    return Correction(PauliOperator.identity(m.n), False, 0, "ml")


def greedy_cooling(m: CodeModel, syndrome: int,
                   rng: np.random.Generator | None = None) -> Correction:
    """Steepest-descent single flips with bounded random plateau escapes."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
    tgl_x, tgl_z = qubit_toggle_masks(m)
    moves: list[tuple[int, int]] = []  # (qubit, 0 for X / 1 for Z)
    for q in range(m.n):
        moves.append((q, 0))
        if not m.classical:
            moves.append((q, 1))
    syn = syndrome
    cx = cz = 0
    budget = GREEDY_BUDGET_FACTOR * m.n
    plateau_left = GREEDY_PLATEAU_STEPS
    while syn and budget > 0:
        best_dv = 0
        best_move = None
        neutral: list[tuple[int, int]] = []
        for q, kind in moves:
            tgl = tgl_x[q] if kind == 0 else tgl_z[q]
            dv = tgl.bit_count() - 2 * (syn & tgl).bit_count()
            if dv < best_dv:
                best_dv = dv
                best_move = (q, kind)
            elif dv == 0 and tgl:
                neutral.append((q, kind))
        if best_move is None:
            if plateau_left <= 0 or not neutral:
                break
            best_move = neutral[int(rng.integers(0, len(neutral)))]
            plateau_left -= 1
        else:
            plateau_left = GREEDY_PLATEAU_STEPS
        q, kind = best_move
        if kind == 0:
            syn ^= tgl_x[q]
            cx ^= 1 << q
        else:
            syn ^= tgl_z[q]
            cz ^= 1 << q
        budget -= 1
    pauli = PauliOperator(m.n, cx, cz)
    return Correction(pauli, syn == 0, pauli.weight, "greedy")


# ---------------------------------------------------------------------------
# Defect matching for the planar surface code

def _pairing_cost_plans(defects: list[tuple[int, int]],
                        boundary_costs: Callable[[tuple[int, int]], tuple[int, int]],
                        pair_cost: Callable[[tuple[int, int], tuple[int, int]], int],
                        exhaustive: bool):
    """Return list of ('pair', a, b) / ('boundary', a, side) assignments."""
    if exhaustive:
        best_plan = None
        best_cost = None

        def search(remaining: tuple[int, ...], cost: int, plan: list):
            nonlocal best_plan, best_cost
            if best_cost is not None and cost >= best_cost:
                return
            if not remaining:
                best_cost = cost
                best_plan = list(plan)
                return
            a = remaining[0]
            rest = remaining[1:]
            c_left, c_right = boundary_costs(defects[a])
            for side, c in ((0, c_left), (1, c_right)):
                plan.append(("boundary", a, side))
                search(rest, cost + c, plan)
                plan.pop()
            for idx, b in enumerate(rest):
                plan.append(("pair", a, b))
                search(rest[:idx] + rest[idx + 1:], cost + pair_cost(defects[a], defects[b]),
                       plan)
                plan.pop()

        search(tuple(range(len(defects))), 0, [])
        return best_plan or []
    # Greedy nearest-neighbor for large defect sets.
    plan = []
    remaining = list(range(len(defects)))
    while remaining:
        a = remaining.pop(0)
        c_left, c_right = boundary_costs(defects[a])
        best = ("boundary", a, 0) if c_left <= c_right else ("boundary", a, 1)
        best_cost = min(c_left, c_right)
        for b in remaining:
            c = pair_cost(defects[a], defects[b])
            if c < best_cost:
                best_cost = c
                best = ("pair", a, b)
        plan.append(best)
        if best[0] == "pair":
            remaining.remove(best[2])
    return plan


def match_defects_2d(m: CodeModel, syndrome: int,
                     rng: np.random.Generator | None = None) -> Correction:
    """Pair surface-code defects (or route them to their open boundary) along
    shortest taxicab paths; plaquette defects clear via X flips to the
    left/right columns, star defects via Z flips to the top/bottom rows."""
    if m.family != "surface2d":
        raise ValueError("match_defects_2d requires a surface2d model")
    g = 2 * m.linear_size - 1
    qindex = {coord: i for i, coord in enumerate(m.qubit_coords)}

    plaq_defects = []
    star_defects = []
    for c, chk in enumerate(m.checks):
        if syndrome >> c & 1:
            if chk.kind == "Z":
                plaq_defects.append(chk.location)
            else:
                star_defects.append(chk.location)

    def half_taxicab(a: tuple[int, int], b: tuple[int, int]) -> int:
        return (abs(a[0] - b[0]) + abs(a[1] - b[1])) // 2

    cx = 0
    cz = 0

    def flip(r: int, c: int, kind: str) -> None:
        nonlocal cx, cz
        bit = 1 << qindex[(r, c)]
        if kind == "X":
            cx ^= bit
        else:
            cz ^= bit

    def route(a: tuple[int, int], b: tuple[int, int], kind: str) -> None:
        # Walk rows first, then columns; every intermediate midpoint is a qubit.
        r, c = a
        step = 2 if b[0] > r else -2
        while r != b[0]:
            flip(r + step // 2, c, kind)
            r += step
        step = 2 if b[1] > c else -2
        while c != b[1]:
            flip(r, c + step // 2, kind)
            c += step

    # Plaquette defects live at (even r, odd c); their X-strings terminate on
    # the left/right columns.
    plan = _pairing_cost_plans(
        plaq_defects,
        boundary_costs=lambda d: ((d[1] + 1) // 2, (g - d[1]) // 2),
        pair_cost=half_taxicab,
        exhaustive=len(plaq_defects) <= 10,
    )
    for item in plan:
        if item[0] == "pair":
            route(plaq_defects[item[1]], plaq_defects[item[2]], "X")
        else:
            d = plaq_defects[item[1]]
            target = (d[0], -1) if item[2] == 0 else (d[0], g)
            r, c = d
            step = 2 if target[1] > c else -2
            while 0 <= c + step // 2 < g:
                flip(r, c + step // 2, "X")
                c += step
    # Star defects live at (odd r, even c); their Z-strings terminate on the
    # top/bottom rows.
    plan = _pairing_cost_plans(
        star_defects,
        boundary_costs=lambda d: ((d[0] + 1) // 2, (g - d[0]) // 2),
        pair_cost=half_taxicab,
        exhaustive=len(star_defects) <= 10,
    )
    for item in plan:
        if item[0] == "pair":
            route(star_defects[item[1]], star_defects[item[2]], "Z")
        else:
            d = star_defects[item[1]]
            r, c = d
            step = -2 if item[2] == 0 else 2
            while 0 <= r + step // 2 < g:
                flip(r + step // 2, c, "Z")
                r += step
    pauli = PauliOperator(m.n, cx, cz)
    cleared = syndrome_of_pauli(m, cx, cz) == syndrome
    return Correction(pauli, cleared, pauli.weight, "match2d")


DECODERS: dict[str, Callable[[CodeModel, int, np.random.Generator | None], Correction]] = {
    "majority": majority_correction,
    "ml": ml_bruteforce,
    "greedy": greedy_cooling,
    "match2d": match_defects_2d,
}


def get_decoder(decoder_id: str):
    try:
        return DECODERS[decoder_id]
    except KeyError:
        raise ValueError(f"unknown decoder {decoder_id!r}; known: {sorted(DECODERS)}") from None
