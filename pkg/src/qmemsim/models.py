"""Memory-model constructors: Ising chains/grids, planar surface code, 3D toric code.

All models live in one container: typed parity checks with geometry, a
coupling scale, and logical operator pairs. Coordinates use a doubled
integer grid so qubits, bonds, and checks all land on lattice points:
qubits sit at even or mixed-parity points, check centers at the remaining
points.

Planar surface code layout on a (2L-1) x (2L-1) grid:
  qubits       at (r, c) with r + c even
  Z plaquettes at (even r, odd c)   -- truncated to 3 qubits on top/bottom rows
  X stars      at (odd r, even c)   -- truncated to 3 qubits on left/right columns
  Zbar = Z string down column c=0, Xbar = X string along row r=0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .gf2 import BinaryMatrix, CosetMinWeight, coset_min_weight
from .pauli import PauliOperator

FAMILIES = ("ising1d", "ising2d", "surface2d", "toric3d")


@dataclass(frozen=True)
class Check:
    pauli: PauliOperator
    kind: str  # "Z" or "X"
    location: tuple[int, ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.pauli.support


@dataclass(frozen=True)
class LogicalPair:
    x_op: PauliOperator
    z_op: PauliOperator


@dataclass(frozen=True, eq=False)
class CodeModel:
    family: str
    n: int
    checks: tuple[Check, ...]
    delta: float
    logicals: tuple[LogicalPair, ...]
    classical: bool
    gauge_only: bool
    dimension: int
    linear_size: int
    qubit_coords: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.logicals)

    def checks_of_kind(self, kind: str) -> list[Check]:
        return [c for c in self.checks if c.kind == kind]

    def logical_op(self, kind: str, pair: int = 0) -> PauliOperator:
        lp = self.logicals[pair]
        return lp.x_op if kind == "X" else lp.z_op

    def check_matrix(self) -> BinaryMatrix:
        """Stacked symplectic rows of all checks."""
        return BinaryMatrix([c.pauli.symplectic() for c in self.checks], 2 * self.n)

    def __repr__(self) -> str:
        return (
            f"CodeModel({self.family}, L={self.linear_size}, n={self.n}, "
            f"k={self.k}, checks={len(self.checks)})"
        )


def build_model(
    family: str,
    size: int,
    *,
    boundary: str | None = None,
    gauge_only: bool = False,
    delta: float = 1.0,
) -> CodeModel:
    if size < 2:
        raise ValueError(f"size must be >= 2, got {size}")
    if gauge_only and family != "toric3d":
        raise ValueError("gauge_only is only defined for toric3d")
    if family == "ising1d":
        _require_boundary(family, boundary, "open")
        return _build_ising1d(size, delta)
    if family == "ising2d":
        _require_boundary(family, boundary, "open")
        return _build_ising2d(size, delta)
    if family == "surface2d":
        _require_boundary(family, boundary, "open")
        return _build_surface2d(size, delta)
    if family == "toric3d":
        _require_boundary(family, boundary, "periodic")
        return _build_toric3d(size, delta, gauge_only)
    raise ValueError(f"unknown family {family!r}")


def _require_boundary(family: str, boundary: str | None, expected: str) -> None:
    if boundary is not None and boundary != expected:
        raise ValueError(f"{family} only supports {expected!r} boundary, got {boundary!r}")


def _build_ising1d(n: int, delta: float) -> CodeModel:
    checks = tuple(
        Check(PauliOperator.from_support(n, (i, i + 1), "Z"), "Z", (2 * i + 1,))
        for i in range(n - 1)
    )
    logicals = (
        LogicalPair(
            x_op=PauliOperator.from_support(n, range(n), "X"),
            z_op=PauliOperator.single(n, 0, "Z"),
        ),
    )
    coords = tuple((2 * i,) for i in range(n))
    return CodeModel("ising1d", n, checks, delta, logicals, True, False, 1, n, coords)


def _build_ising2d(L: int, delta: float) -> CodeModel:
    n = L * L

    def q(r: int, c: int) -> int:
        return r * L + c

    checks = []
    for r in range(L):
        for c in range(L):
            if c + 1 < L:
                checks.append(
                    Check(PauliOperator.from_support(n, (q(r, c), q(r, c + 1)), "Z"),
                          "Z", (2 * r, 2 * c + 1))
                )
            if r + 1 < L:
                checks.append(
                    Check(PauliOperator.from_support(n, (q(r, c), q(r + 1, c)), "Z"),
                          "Z", (2 * r + 1, 2 * c))
                )
    logicals = (
        LogicalPair(
            x_op=PauliOperator.from_support(n, range(n), "X"),
            z_op=PauliOperator.single(n, 0, "Z"),
        ),
    )
    coords = tuple((2 * r, 2 * c) for r in range(L) for c in range(L))
    return CodeModel("ising2d", n, tuple(checks), delta, logicals, True, False, 2, L, coords)


def _build_surface2d(L: int, delta: float) -> CodeModel:
    g = 2 * L - 1
    qindex: dict[tuple[int, int], int] = {}
    for r in range(g):
        for c in range(g):
            if (r + c) % 2 == 0:
                qindex[(r, c)] = len(qindex)
    n = len(qindex)  # L^2 + (L-1)^2

    def adjacent(r: int, c: int) -> list[int]:
        out = []
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (rr, cc) in qindex:
                out.append(qindex[(rr, cc)])
        return out

    checks = []
    for r in range(g):
        for c in range(g):
            if r % 2 == 0 and c % 2 == 1:
                checks.append(
                    Check(PauliOperator.from_support(n, adjacent(r, c), "Z"), "Z", (r, c))
                )
            elif r % 2 == 1 and c % 2 == 0:
                checks.append(
                    Check(PauliOperator.from_support(n, adjacent(r, c), "X"), "X", (r, c))
                )
    zbar = PauliOperator.from_support(n, (qindex[(r, 0)] for r in range(0, g, 2)), "Z")
    xbar = PauliOperator.from_support(n, (qindex[(0, c)] for c in range(0, g, 2)), "X")
    logicals = (LogicalPair(x_op=xbar, z_op=zbar),)
    coords = [None] * n
    for (r, c), i in qindex.items():
        coords[i] = (r, c)
    return CodeModel("surface2d", n, tuple(checks), delta, logicals, False, False, 2, L,
                     tuple(coords))


def _build_toric3d(L: int, delta: float, gauge_only: bool) -> CodeModel:
    n = 3 * L ** 3

    def vidx(x: int, y: int, z: int) -> int:
        return (x % L) + L * (y % L) + L * L * (z % L)

    def edge(x: int, y: int, z: int, d: int) -> int:
        return 3 * vidx(x, y, z) + d

    units = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    checks = []
    for x in range(L):
        for y in range(L):
            for z in range(L):
                # Plaquette Z checks, one per orientation pair.
                for d1 in range(3):
                    for d2 in range(d1 + 1, 3):
                        u1, u2 = units[d1], units[d2]
                        qs = (
                            edge(x, y, z, d1),
                            edge(x, y, z, d2),
                            edge(x + u1[0], y + u1[1], z + u1[2], d2),
                            edge(x + u2[0], y + u2[1], z + u2[2], d1),
                        )
                        loc = (2 * x + u1[0] + u2[0], 2 * y + u1[1] + u2[1],
                               2 * z + u1[2] + u2[2])
                        checks.append(
                            Check(PauliOperator.from_support(n, qs, "Z"), "Z", loc)
                        )
                if not gauge_only:
                    # Star X check on the 6 edges meeting this vertex.
                    qs = []
                    for d in range(3):
                        u = units[d]
                        qs.append(edge(x, y, z, d))
                        qs.append(edge(x - u[0], y - u[1], z - u[2], d))
                    checks.append(
                        Check(PauliOperator.from_support(n, qs, "X"), "X",
                              (2 * x, 2 * y, 2 * z))
                    )
    logicals = []
    for d in range(3):
        u = units[d]
        line = [edge(k * u[0], k * u[1], k * u[2], d) for k in range(L)]
        membrane = []
        for a in range(L):
            for b in range(L):
                v = [0, 0, 0]
                axes = [ax for ax in range(3) if ax != d]
                v[axes[0]] = a
                v[axes[1]] = b
                membrane.append(edge(v[0], v[1], v[2], d))
        logicals.append(
            LogicalPair(
                x_op=PauliOperator.from_support(n, membrane, "X"),
                z_op=PauliOperator.from_support(n, line, "Z"),
            )
        )
    coords = [None] * n
    for x in range(L):
        for y in range(L):
            for z in range(L):
                for d in range(3):
                    u = units[d]
                    coords[edge(x, y, z, d)] = (2 * x + u[0], 2 * y + u[1], 2 * z + u[2])
    return CodeModel("toric3d", n, tuple(checks), delta, tuple(logicals), False,
                     gauge_only, 3, L, tuple(coords))


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    invariant: str | None = None
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_model(m: CodeModel) -> ValidationReport:
    """Audit every structural invariant; report the first violation found."""
    for i, chk in enumerate(m.checks):
        if chk.pauli.n != m.n:
            return ValidationReport(False, "check dimension", f"check {i}")
    for i, chk_a in enumerate(m.checks):
        for j in range(i + 1, len(m.checks)):
            if not chk_a.pauli.commutes(m.checks[j].pauli):
                return ValidationReport(False, "checks commute", f"checks {i} and {j}")
    for p, pair in enumerate(m.logicals):
        for kind, op in (("X", pair.x_op), ("Z", pair.z_op)):
            for i, chk in enumerate(m.checks):
                if not op.commutes(chk.pauli):
                    return ValidationReport(
                        False, "logicals commute with checks",
                        f"{kind}bar[{p}] vs check {i}")
    check_rows = [c.pauli.symplectic() for c in m.checks]
    base_rank = BinaryMatrix(check_rows, 2 * m.n).rank()
    for p, pair in enumerate(m.logicals):
        for kind, op in (("X", pair.x_op), ("Z", pair.z_op)):
            stacked = BinaryMatrix(check_rows + [op.symplectic()], 2 * m.n)
            if stacked.rank() == base_rank:
                return ValidationReport(
                    False, "logical outside check group", f"{kind}bar[{p}]")
    for p, pair in enumerate(m.logicals):
        if pair.x_op.commutes(pair.z_op):
            return ValidationReport(False, "pair anticommutes", f"pair {p}")
        for q in range(p + 1, len(m.logicals)):
            other = m.logicals[q]
            for a_kind, a in (("X", pair.x_op), ("Z", pair.z_op)):
                for b_kind, b in (("X", other.x_op), ("Z", other.z_op)):
                    if not a.commutes(b):
                        return ValidationReport(
                            False, "cross-pair commutes",
                            f"{a_kind}bar[{p}] vs {b_kind}bar[{q}]")
    k_free = m.n - base_rank
    if m.gauge_only:
        # Gauge-only models have extensive degeneracy; the stored pairs are
        # the topological subset, so only an upper-bound check applies.
        if len(m.logicals) > k_free:
            return ValidationReport(
                False, "k matches rank", f"{len(m.logicals)} pairs > n - rank = {k_free}")
    elif len(m.logicals) != k_free:
        return ValidationReport(
            False, "k matches rank", f"{len(m.logicals)} pairs != n - rank = {k_free}")
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# Distance and logical support dimensions

@dataclass(frozen=True)
class DistanceResult:
    distance: int | None
    exact: bool
    per_logical: tuple[tuple[str, int | None], ...]

    @property
    def exhausted(self) -> bool:
        return self.distance is None


def _same_type_generators(m: CodeModel, op: PauliOperator) -> list[PauliOperator]:
    # Multiplying a pure-type logical by the opposite-type subgroup only ever
    # adds support, so the min-weight search may stay within one type.
    if op.x_bits == 0:
        return [c.pauli for c in m.checks_of_kind("Z")]
    if op.z_bits == 0:
        return [c.pauli for c in m.checks_of_kind("X")]
    return [c.pauli for c in m.checks]


def min_logical_weight(m: CodeModel, kind: str, pair: int = 0,
                       weight_cap: int | None = None) -> CosetMinWeight:
    op = m.logical_op(kind, pair)
    return coset_min_weight(_same_type_generators(m, op), op, weight_cap)


def code_distance(m: CodeModel, weight_cap: int | None = None) -> DistanceResult:
    if m.n > 30 and weight_cap is None:
        raise ValueError(f"n={m.n} > 30: exact search refused without a weight cap")
    found: list[int] = []
    bounds: list[int] = []  # exclusive lower bounds from exhausted searches
    detail = []
    for p in range(len(m.logicals)):
        for kind in ("X", "Z"):
            res = min_logical_weight(m, kind, p, weight_cap)
            detail.append((f"{kind}bar[{p}]", res.weight))
            if res.weight is not None:
                found.append(res.weight)
            else:
                bounds.append((weight_cap if weight_cap is not None else m.n) + 1)
    if not found:
        return DistanceResult(None, False, tuple(detail))
    d = min(found)
    exact = all(b > d for b in bounds)
    return DistanceResult(d, exact, tuple(detail))


@dataclass(frozen=True)
class SupportDims:
    per_pair: tuple[tuple[int, int], ...]  # (d_X, d_Z) per logical pair
    sizes: tuple[int, int]
    weights: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def min_sum_pair(self) -> tuple[int, int]:
        return min(self.per_pair, key=lambda dz: dz[0] + dz[1])


def _weight_exponent(w1: int, w2: int, l1: int, l2: int) -> int:
    if w1 == w2:
        return 0
    exponent = math.log(w2 / w1) / math.log(l2 / l1)
    nearest = round(exponent)
    if abs(exponent - nearest) > 0.25 or nearest < 0:
        raise ValueError(
            f"weights ({w1}, {w2}) at sizes ({l1}, {l2}) do not classify cleanly "
            f"(exponent {exponent:.3f})")
    return nearest


def support_dims(m: CodeModel, companion_size: int | None = None) -> SupportDims:
    """Classify minimal logical supports by weight scaling across two sizes.

    Weight ~ const -> 0-dimensional, ~L -> 1, ~L^2 -> 2.
    """
    l1 = m.linear_size
    l2 = companion_size if companion_size is not None else l1 + 1
    if l2 == l1:
        raise ValueError("need two distinct sizes to classify support dimensions")
    other = build_model(m.family, l2, gauge_only=m.gauge_only, delta=m.delta)
    dims = []
    weights = []
    for p in range(len(m.logicals)):
        per_kind = {}
        per_kind_w = {}
        for kind in ("X", "Z"):
            r1 = min_logical_weight(m, kind, p)
            r2 = min_logical_weight(other, kind, p)
            if r1.weight is None or r2.weight is None:
                raise ValueError(f"min-weight search exhausted for {kind}bar[{p}]")
            per_kind[kind] = _weight_exponent(r1.weight, r2.weight, l1, l2)
            per_kind_w[kind] = (r1.weight, r2.weight)
        dims.append((per_kind["X"], per_kind["Z"]))
        weights.append((per_kind_w["X"], per_kind_w["Z"]))
    return SupportDims(tuple(dims), (l1, l2), tuple(weights))


# ---------------------------------------------------------------------------
# JSON round trip

_JSON_FORMAT = "qmemsim-code-model"
_JSON_VERSION = 1


def to_json_dict(m: CodeModel) -> dict:
    return {
        "format": _JSON_FORMAT,
        "version": _JSON_VERSION,
        "family": m.family,
        "linear_size": m.linear_size,
        "n": m.n,
        "delta": m.delta,
        "classical": m.classical,
        "gauge_only": m.gauge_only,
        "dimension": m.dimension,
        "qubit_coords": [list(c) for c in m.qubit_coords],
        "checks": [
            {"type": c.kind, "qubits": list(c.qubits), "location": list(c.location)}
            for c in m.checks
        ],
        "logicals": [
            {"x": p.x_op.to_string(), "z": p.z_op.to_string()} for p in m.logicals
        ],
    }


def from_json_dict(doc: dict) -> CodeModel:
    if doc.get("format") != _JSON_FORMAT:
        raise ValueError("not a code-model document")
    if doc.get("version") != _JSON_VERSION:
        raise ValueError(f"unsupported version {doc.get('version')!r}")
    n = doc["n"]
    checks = tuple(
        Check(PauliOperator.from_support(n, c["qubits"], c["type"]), c["type"],
              tuple(c["location"]))
        for c in doc["checks"]
    )
    logicals = tuple(
        LogicalPair(x_op=PauliOperator.from_string(p["x"]),
                    z_op=PauliOperator.from_string(p["z"]))
        for p in doc["logicals"]
    )
    return CodeModel(
        family=doc["family"],
        n=n,
        checks=checks,
        delta=doc["delta"],
        logicals=logicals,
        classical=doc["classical"],
        gauge_only=doc["gauge_only"],
        dimension=doc["dimension"],
        linear_size=doc["linear_size"],
        qubit_coords=tuple(tuple(c) for c in doc["qubit_coords"]),
    )


def save_model(m: CodeModel, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(m), fh, indent=2, sort_keys=True)


def load_model(path: str) -> CodeModel:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
