"""Energy barriers between logical sectors.

Barriers are reported in violated-check units (energy / (2*delta)), so they
are coupling-independent. Exact values come from bottleneck Dijkstra over
single-flip configuration space; upper bounds come from flip orderings of a
fixed logical support (optimized exhaustively or by simulated annealing).
"""
from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf2 import BinaryMatrix
from .models import CodeModel
from .pauli import PauliOperator, parity


class StateCapExceeded(RuntimeError):
    """Raised when an exact search would exceed its configured state budget."""


def syndrome_energy(m: CodeModel, error: PauliOperator) -> tuple[int, int]:
    """Syndrome bitmask over checks (bit c set iff check c anticommutes) and count."""
    if error.n != m.n:
        raise ValueError(f"dimension mismatch: {error.n} != {m.n}")
    syndrome = 0
    for c, chk in enumerate(m.checks):
        p = chk.pauli
        if parity(error.x_bits & p.z_bits) ^ parity(error.z_bits & p.x_bits):
            syndrome |= 1 << c
    return syndrome, syndrome.bit_count()


def logical_class(m: CodeModel, error: PauliOperator) -> tuple[int, ...]:
    """Class bits of a syndrome-free error: for each pair, (flips Zbar, flips Xbar)."""
    bits = []
    for pair in m.logicals:
        bits.append(0 if error.commutes(pair.z_op) else 1)
        bits.append(0 if error.commutes(pair.x_op) else 1)
    return tuple(bits)


@dataclass(frozen=True)
class BarrierResult:
    family: str
    linear_size: int
    target: str
    barrier: int
    method: str
    witness: tuple[int, ...]
    error_kind: str
    seed: int | None = None

    def witness_json(self) -> str:
        """The witness as a JSON flip list."""
        import json

        return json.dumps({
            "family": self.family,
            "L": self.linear_size,
            "target": self.target,
            "error_kind": self.error_kind,
            "barrier": self.barrier,
            "flips": list(self.witness),
        }, sort_keys=True)


def _sector_data(m: CodeModel, kind: str) -> tuple[list[int], list[int]]:
    """(detector masks, stabilizer masks) for a pure-type error sector.

    X errors are detected by Z-type checks (via their Z supports) and the
    reachable coset is shifted by X-type check supports; Z errors dually.
    """
    if kind == "X":
        detectors = [c.pauli.z_bits for c in m.checks_of_kind("Z")]
        stabilizers = [c.pauli.x_bits for c in m.checks_of_kind("X")]
    elif kind == "Z":
        detectors = [c.pauli.x_bits for c in m.checks_of_kind("X")]
        stabilizers = [c.pauli.z_bits for c in m.checks_of_kind("Z")]
    else:
        raise ValueError(f"unknown error kind {kind!r}")
    return detectors, stabilizers


def _span(masks: Sequence[int]) -> set[int]:
    out = {0}
    for m in masks:
        out |= {v ^ m for v in out}
    return out


def _violation_table(n: int, detector_masks: Sequence[int]) -> np.ndarray:
    states = np.arange(1 << n, dtype=np.uint64)
    viol = np.zeros(1 << n, dtype=np.uint16)
    for mask in detector_masks:
        viol += (np.bitwise_count(states & np.uint64(mask)) & 1).astype(np.uint16)
    return viol


def _logical_mask(m: CodeModel, kind: str, pair: int) -> int:
    op = m.logical_op(kind, pair)
    if kind == "X":
        if op.z_bits:
            raise ValueError("X logical is not pure X type")
        return op.x_bits
    if op.x_bits:
        raise ValueError("Z logical is not pure Z type")
    return op.z_bits


def exact_barrier(
    m: CodeModel,
    kind: str = "X",
    pair: int = 0,
    *,
    state_cap: int = 1 << 20,
    reverse: bool = False,
) -> BarrierResult:
    """Minimax single-flip path value from the trivial error to the target class.

    ``reverse=True`` searches from the canonical logical representative back
    to the trivial class instead.
    """
    n = m.n
    if (1 << n) > state_cap:
        raise StateCapExceeded(
            f"2^{n} states exceed state_cap={state_cap}; refusing inexact search")
    detectors, stabilizers = _sector_data(m, kind)
    viol = _violation_table(n, detectors)
    lmask = _logical_mask(m, kind, pair)
    stab_span = _span(stabilizers)
    if reverse:
        start = lmask
        targets = frozenset(stab_span)
    else:
        start = 0
        targets = frozenset(lmask ^ g for g in stab_span)

    best_bn = {start: int(viol[start])}
    best_len = {start: 0}
    pred: dict[int, tuple[int, int]] = {}
    heap = [(int(viol[start]), 0, start)]
    end_state = None
    while heap:
        bn, nflips, s = heapq.heappop(heap)
        if (bn, nflips) > (best_bn.get(s, 1 << 30), best_len.get(s, 1 << 30)):
            continue
        if s in targets:
            end_state = s
            break
        for q in range(n):
            t = s ^ (1 << q)
            cand = max(bn, int(viol[t]))
            key = (cand, nflips + 1)
            if key < (best_bn.get(t, 1 << 30), best_len.get(t, 1 << 30)):
                best_bn[t] = cand
                best_len[t] = nflips + 1
                pred[t] = (s, q)
                heapq.heappush(heap, (cand, nflips + 1, t))
    if end_state is None:
        raise RuntimeError("target class unreachable")  # cannot happen: flips span all states
    flips = []
    s = end_state
    while s != start:
        s, q = pred[s]
        flips.append(q)
    flips.reverse()
    target_label = "trivial" if reverse else f"{kind}bar[{pair}]"
    return BarrierResult(
        family=m.family,
        linear_size=m.linear_size,
        target=target_label,
        barrier=best_bn[end_state],
        method="exact_bottleneck",
        witness=tuple(flips),
        error_kind=kind,
    )


def replay_witness(m: CodeModel, result: BarrierResult,
                   start: PauliOperator | None = None) -> tuple[int, PauliOperator]:
    """Re-run a witness flip sequence; return (peak violated count, final error)."""
    err = start if start is not None else PauliOperator.identity(m.n)
    peak = syndrome_energy(m, err)[1]
    for q in result.witness:
        err = err * PauliOperator.single(m.n, q, result.error_kind)
        peak = max(peak, syndrome_energy(m, err)[1])
    return peak, err


# ---------------------------------------------------------------------------
# Ordered-flip barriers (upper bounds by construction)

_ANNEAL_RESTARTS = 16
_ANNEAL_T0 = 2.0
_ANNEAL_TF = 0.05


def _toggle_masks(m: CodeModel, op: PauliOperator) -> dict[int, int]:
    """Per-support-qubit mask over check indices toggled by that qubit's component."""
    masks = {}
    for q in op.support:
        x = op.x_bits >> q & 1
        z = op.z_bits >> q & 1
        mask = 0
        for c, chk in enumerate(m.checks):
            p = chk.pauli
            if (x and p.z_bits >> q & 1) ^ (z and p.x_bits >> q & 1):
                mask |= 1 << c
        masks[q] = mask
    return masks


def _order_peak(toggles: dict[int, int], order: Sequence[int]) -> int:
    syn = 0
    peak = 0
    for q in order:
        syn ^= toggles[q]
        v = syn.bit_count()
        if v > peak:
            peak = v
    return peak


def _resolve_logical(m: CodeModel, logical) -> tuple[PauliOperator, str]:
    if isinstance(logical, tuple):
        kind, pair = logical
        return m.logical_op(kind, pair), f"{kind}bar[{pair}]"
    return logical, "custom"


def ordered_flip_barrier(
    m: CodeModel,
    logical,
    strategy: str = "annealed",
    *,
    order: Sequence[int] | None = None,
    seed: int = 0,
    restarts: int = _ANNEAL_RESTARTS,
) -> BarrierResult:
    """Peak violated count along a one-flip-per-qubit traversal of a logical support.

    ``logical`` is either a (kind, pair) selector or an explicit representative.
    Strategies: ``given_order`` evaluates one ordering, ``exhaustive_orders``
    minimizes exactly over all orderings (support size <= 10), ``annealed``
    minimizes by seeded simulated annealing over orderings.
    """
    op, label = _resolve_logical(m, logical)
    if op.n != m.n:
        raise ValueError("logical dimension mismatch")
    syn, nv = syndrome_energy(m, op)
    if nv != 0:
        raise ValueError("support is not syndrome-free")
    check_rows = [c.pauli.symplectic() for c in m.checks]
    stacked = BinaryMatrix(check_rows, 2 * m.n)
    if stacked.contains(op.symplectic()):
        raise ValueError("support is a stabilizer element, not a logical")
    support = list(op.support)
    toggles = _toggle_masks(m, op)
    if op.z_bits == 0:
        error_kind = "X"
    elif op.x_bits == 0:
        error_kind = "Z"
    else:
        error_kind = "Y"

    if strategy == "given_order":
        if order is None:
            raise ValueError("given_order requires an explicit order")
        if sorted(order) != sorted(support):
            raise ValueError("order must be a permutation of the logical support")
        best_order = list(order)
        best_peak = _order_peak(toggles, best_order)
        method = "ordered_flip"
        used_seed = None
    elif strategy == "exhaustive_orders":
        if len(support) > 10:
            raise ValueError(f"exhaustive search refused for support size {len(support)}")
        best_peak, best_order = _exhaustive_min_peak(toggles, support)
        method = "ordered_flip"
        used_seed = None
    elif strategy == "annealed":
        best_peak, best_order = _annealed_min_peak(toggles, support, seed, restarts)
        method = "annealed_order"
        used_seed = seed
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    return BarrierResult(
        family=m.family,
        linear_size=m.linear_size,
        target=label,
        barrier=best_peak,
        method=method,
        witness=tuple(best_order),
        error_kind=error_kind,
        seed=used_seed,
    )


def _exhaustive_min_peak(toggles: dict[int, int], support: list[int]) -> tuple[int, list[int]]:
    """Exact min over orderings via DP on flipped subsets."""
    w = len(support)
    nsub = 1 << w
    syn = [0] * nsub
    viol = [0] * nsub
    for s in range(1, nsub):
        low = s & (-s)
        idx = low.bit_length() - 1
        syn[s] = syn[s ^ low] ^ toggles[support[idx]]
        viol[s] = syn[s].bit_count()
    full = nsub - 1
    value = [0] * nsub  # min over completion orders of max violated en route
    choice = [0] * nsub
    for s in range(full - 1, -1, -1):
        best = None
        pick = -1
        for i in range(w):
            if s >> i & 1:
                continue
            t = s | (1 << i)
            cand = max(viol[t], value[t])
            if best is None or cand < best:
                best = cand
                pick = i
        value[s] = best
        choice[s] = pick
    order = []
    s = 0
    while s != full:
        i = choice[s]
        order.append(support[i])
        s |= 1 << i
    return value[0], order


def _annealed_min_peak(toggles: dict[int, int], support: list[int], seed: int,
                       restarts: int) -> tuple[int, list[int]]:
    w = len(support)
    best_peak = _order_peak(toggles, support)
    best_order = list(support)
    steps = max(300, 40 * w)
    cooling = (_ANNEAL_TF / _ANNEAL_T0) ** (1.0 / max(1, steps - 1))
    for restart in range(restarts):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, restart])))
        current = list(support)
        rng.shuffle(current)
        cur_peak = _order_peak(toggles, current)
        temperature = _ANNEAL_T0
        for _ in range(steps):
            i, j = rng.integers(0, w, size=2)
            if i == j:
                temperature *= cooling
                continue
            current[i], current[j] = current[j], current[i]
            new_peak = _order_peak(toggles, current)
            delta = new_peak - cur_peak
            if delta <= 0 or rng.random() < np.exp(-delta / temperature):
                cur_peak = new_peak
            else:
                current[i], current[j] = current[j], current[i]
            if cur_peak < best_peak:
                best_peak = cur_peak
                best_order = list(current)
            temperature *= cooling
    return best_peak, best_order


# ---------------------------------------------------------------------------
# Scans over sizes

@dataclass(frozen=True)
class BarrierScanRow:
    family: str
    linear_size: int
    target: str
    method: str
    barrier: int | None
    seed: int | None
    witness_length: int
    refused: str | None = None


def barrier_scan(
    family: str,
    sizes: Sequence[int],
    kind: str = "X",
    pair: int = 0,
    method: str = "exact",
    *,
    seed: int = 0,
    state_cap: int = 1 << 20,
    gauge_only: bool = False,
) -> list[BarrierScanRow]:
    from .models import build_model

    rows = []
    for L in sizes:
        m = build_model(family, L, gauge_only=gauge_only)
        try:
            if method == "exact":
                res = exact_barrier(m, kind, pair, state_cap=state_cap)
            elif method == "annealed":
                res = ordered_flip_barrier(m, (kind, pair), "annealed", seed=seed)
            elif method == "exhaustive":
                res = ordered_flip_barrier(m, (kind, pair), "exhaustive_orders")
            else:
                raise ValueError(f"unknown scan method {method!r}")
        except (StateCapExceeded, ValueError) as exc:
            rows.append(BarrierScanRow(family, L, f"{kind}bar[{pair}]", method,
                                       None, seed, 0, refused=str(exc)))
            continue
        rows.append(BarrierScanRow(family, L, res.target, res.method, res.barrier,
                                   res.seed, len(res.witness)))
    return rows


def scan_is_monotone(rows: Sequence[BarrierScanRow]) -> dict[str, bool]:
    values = [r.barrier for r in rows if r.barrier is not None]
    nondecreasing = all(a <= b for a, b in zip(values, values[1:]))
    constant = all(v == values[0] for v in values) if values else True
    return {"nondecreasing": nondecreasing, "constant": constant}


def write_barrier_csv(rows: Sequence[BarrierScanRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "L", "target", "method", "barrier", "seed",
                         "witness_length"])
        for r in rows:
            writer.writerow([r.family, r.linear_size, r.target, r.method,
                             "" if r.barrier is None else r.barrier,
                             "" if r.seed is None else r.seed, r.witness_length])
