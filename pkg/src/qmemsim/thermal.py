"""Single-flip Metropolis dynamics over error configurations.

Dynamics act on the error frame relative to a fixed ground state; for the
Ising families the error picture and the spin picture coincide via the
all-up reference. Energy above ground is 2*delta*(violated checks), so the
acceptance rule is min(1, exp(-beta*2*delta*dv)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decoders import Correction, get_decoder, qubit_toggle_masks
from .models import CodeModel
from .pauli import PauliOperator


class ThermalState:
    """Mutable error configuration with cached syndrome and energy.

    Confined to one worker at a time; copies are cheap (plain ints).
    """

    __slots__ = ("model", "beta", "x_bits", "z_bits", "syndrome", "violated",
                 "sweep_count")

    def __init__(self, model: CodeModel, beta: float, x_bits: int = 0, z_bits: int = 0,
                 sweep_count: int = 0):
        self.model = model
        self.beta = beta
        self.x_bits = x_bits
        self.z_bits = z_bits
        from .decoders import syndrome_of_pauli

        self.syndrome = syndrome_of_pauli(model, x_bits, z_bits)
        self.violated = self.syndrome.bit_count()
        self.sweep_count = sweep_count

    @classmethod
    def initial(cls, model: CodeModel, beta: float) -> "ThermalState":
        return cls(model, beta)

    @property
    def error(self) -> PauliOperator:
        return PauliOperator(self.model.n, self.x_bits, self.z_bits)

    def copy(self) -> "ThermalState":
        s = ThermalState.__new__(ThermalState)
        s.model = self.model
        s.beta = self.beta
        s.x_bits = self.x_bits
        s.z_bits = self.z_bits
        s.syndrome = self.syndrome
        s.violated = self.violated
        s.sweep_count = self.sweep_count
        return s

    def cache_coherent(self) -> bool:
        from .decoders import syndrome_of_pauli

        syn = syndrome_of_pauli(self.model, self.x_bits, self.z_bits)
        return syn == self.syndrome and syn.bit_count() == self.violated


def acceptance_probability(beta: float, delta: float, dv: int) -> float:
    """Metropolis acceptance for a proposal changing the violated count by dv."""
    de = 2.0 * delta * dv
    return 1.0 if de <= 0 else math.exp(-beta * de)


_accept_table_cache: dict[tuple[float, float], dict[int, float]] = {}


def _accept_table(beta: float, delta: float, max_dv: int) -> dict[int, float]:
    key = (beta, delta)
    table = _accept_table_cache.get(key)
    if table is None or len(table) <= max_dv:
        table = {dv: acceptance_probability(beta, delta, dv) for dv in range(max_dv + 1)}
        _accept_table_cache[key] = table
    return table


def metropolis_sweep(state: ThermalState, rng: np.random.Generator,
                     sweeps: int = 1) -> ThermalState:
    """Run n proposal steps per sweep, mutating ``state`` in place.

    Proposals draw a uniform qubit plus (for quantum models) a uniform flip
    type; per sweep the draw order is qubits, types, uniforms, which pins the
    trajectory for a given seed.
    """
    m = state.model
    n = m.n
    tgl_x, tgl_z = qubit_toggle_masks(m)
    pop_x = [t.bit_count() for t in tgl_x]
    pop_z = [t.bit_count() for t in tgl_z]
    max_dv = max(pop_x + pop_z)
    accept = _accept_table(state.beta, m.delta, max_dv)
    classical = m.classical

    syn = state.syndrome
    viol = state.violated
    x_bits = state.x_bits
    z_bits = state.z_bits
    for _ in range(sweeps):
        qs = rng.integers(0, n, size=n).tolist()
        kinds = None if classical else rng.integers(0, 2, size=n).tolist()
        us = rng.random(size=n).tolist()
        for i in range(n):
            q = qs[i]
            if classical or kinds[i] == 0:
                tgl = tgl_x[q]
                dv = pop_x[q] - 2 * (syn & tgl).bit_count()
                if dv <= 0 or us[i] < accept[dv]:
                    syn ^= tgl
                    viol += dv
                    x_bits ^= 1 << q
            else:
                tgl = tgl_z[q]
                dv = pop_z[q] - 2 * (syn & tgl).bit_count()
                if dv <= 0 or us[i] < accept[dv]:
                    syn ^= tgl
                    viol += dv
                    z_bits ^= 1 << q
        state.sweep_count += 1
    state.syndrome = syn
    state.violated = viol
    state.x_bits = x_bits
    state.z_bits = z_bits
    return state


# ---------------------------------------------------------------------------
# Sampler validation against exact Gibbs enumeration

@dataclass(frozen=True)
class EquilibriumCheck:
    estimate: float
    stderr: float
    exact: float
    sweeps: int
    burn_in: int


def exact_mean_violated(m: CodeModel, beta: float) -> float:
    """Gibbs expectation of the violated-check count by full enumeration.

    X and Z error sectors decouple for CSS checks, so each is a 2^n sum.
    Classical models only have an X sector.
    """
    if m.n > 12:
        raise ValueError(f"n={m.n} > 12: exact enumeration refused")
    states = np.arange(1 << m.n, dtype=np.uint64)

    def sector_mean(detector_masks: list[int]) -> float:
        if not detector_masks:
            return 0.0
        viol = np.zeros(1 << m.n, dtype=np.float64)
        for mask in detector_masks:
            viol += (np.bitwise_count(states & np.uint64(mask)) & 1).astype(np.float64)
        weights = np.exp(-beta * 2.0 * m.delta * viol)
        return float((viol * weights).sum() / weights.sum())

    mean = sector_mean([c.pauli.z_bits for c in m.checks_of_kind("Z")])
    if not m.classical:
        mean += sector_mean([c.pauli.x_bits for c in m.checks_of_kind("X")])
    return mean


def equilibrium_energy_check(m: CodeModel, beta: float, sweeps: int, burn_in: int,
                             rng: np.random.Generator, batches: int = 32) -> EquilibriumCheck:
    """Time-averaged violated count vs exact Gibbs expectation.

    The standard error uses batch means to absorb autocorrelation.
    """
    exact = exact_mean_violated(m, beta)
    state = ThermalState.initial(m, beta)
    metropolis_sweep(state, rng, burn_in)
    samples = np.empty(sweeps, dtype=np.float64)
    for i in range(sweeps):
        metropolis_sweep(state, rng)
        samples[i] = state.violated
    estimate = float(samples.mean())
    usable = (sweeps // batches) * batches
    batch_means = samples[:usable].reshape(batches, -1).mean(axis=1)
    stderr = float(batch_means.std(ddof=1) / math.sqrt(batches))
    return EquilibriumCheck(estimate, stderr, exact, sweeps, burn_in)


# ---------------------------------------------------------------------------
# Observables and the lifetime protocol

@dataclass(frozen=True)
class Observables:
    magnetization: float | None
    ec_values: dict[str, int]
    abstained: tuple[str, ...]


def default_tracked(m: CodeModel) -> tuple[str, ...]:
    if m.classical:
        return ("bit_ec",)
    return ("Xbar_ec", "Zbar_ec")


def _tracked_operator(m: CodeModel, name: str) -> PauliOperator:
    # bit_ec is the classical read-out: the Zbar value after majority decoding.
    if name == "bit_ec":
        return m.logicals[0].z_op
    base, _, idx = name.partition("[")
    pair = int(idx.rstrip("]")) if idx else 0
    if base == "Xbar_ec":
        return m.logicals[pair].x_op
    if base == "Zbar_ec":
        return m.logicals[pair].z_op
    raise ValueError(f"unknown tracked observable {name!r}")


def _ec_value(corrected_x: int, corrected_z: int, op: PauliOperator) -> int:
    anti = ((corrected_x & op.z_bits).bit_count() ^ (corrected_z & op.x_bits).bit_count()) & 1
    return -1 if anti else 1


def measure_observables(state: ThermalState, decoder_id: str | None = None,
                        tracked: Sequence[str] | None = None,
                        rng: np.random.Generator | None = None) -> Observables:
    """Magnetization (classical models) and decoder-corrected logical values.

    An observable's value is +1 iff the corrected error still commutes with
    it. A non-clearing correction abstains for every tracked observable.
    """
    m = state.model
    mag = 1.0 - 2.0 * state.x_bits.bit_count() / m.n if m.classical else None
    if tracked is None:
        tracked = default_tracked(m)
    if not tracked:
        return Observables(mag, {}, ())
    if decoder_id is None:
        decoder_id = "majority" if m.classical else "greedy"
    if state.syndrome == 0:
        correction = Correction(PauliOperator.identity(m.n), True, 0, decoder_id)
    else:
        correction = get_decoder(decoder_id)(m, state.syndrome, rng)
    if not correction.cleared:
        return Observables(mag, {}, tuple(tracked))
    cx = state.x_bits ^ correction.pauli.x_bits
    cz = state.z_bits ^ correction.pauli.z_bits
    values = {name: _ec_value(cx, cz, _tracked_operator(m, name)) for name in tracked}
    return Observables(mag, values, ())


@dataclass(frozen=True)
class LifetimeRecord:
    family: str
    linear_size: int
    beta: float
    decoder_id: str
    check_interval: int
    t_max: int
    tracked: tuple[str, ...]
    failure_sweep: dict[str, int | None]
    abstentions: int
    seed_label: str | None = None

    def censored(self, name: str) -> bool:
        return self.failure_sweep[name] is None

    def lifetime(self, name: str) -> int:
        t = self.failure_sweep[name]
        return self.t_max if t is None else t


def write_trajectory_csv(rows: Sequence[dict], path: str) -> None:
    """Dump trajectory snapshots (sweep, violated, M, ec values) as CSV."""
    import csv

    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def lifetime_trial(m: CodeModel, beta: float, decoder_id: str, t_max: int,
                   check_interval: int, tracked: Sequence[str] | None,
                   rng: np.random.Generator,
                   trajectory: list | None = None,
                   seed_label: str | None = None) -> LifetimeRecord:
    """Evolve from the trivial error; record each observable's first failure.

    Every ``check_interval`` sweeps the decoder runs on a snapshot copy; the
    dynamics always continue on the uncorrected state. Abstentions skip the
    snapshot and are counted.
    """
    if t_max < check_interval:
        raise ValueError("t_max must be at least check_interval")
    if tracked is None:
        tracked = default_tracked(m)
    state = ThermalState.initial(m, beta)
    failure: dict[str, int | None] = {name: None for name in tracked}
    abstentions = 0
    pending = set(tracked)
    for t in range(check_interval, t_max + 1, check_interval):
        metropolis_sweep(state, rng, check_interval)
        obs = measure_observables(state, decoder_id, tuple(pending), rng)
        if obs.abstained:
            abstentions += 1
        else:
            for name, value in obs.ec_values.items():
                if value == -1:
                    failure[name] = t
                    pending.discard(name)
        if trajectory is not None:
            trajectory.append({
                "sweep": t,
                "violated": state.violated,
                "magnetization": obs.magnetization,
                **{f"ec_{k}": v for k, v in obs.ec_values.items()},
            })
        if not pending:
            break
    return LifetimeRecord(
        family=m.family,
        linear_size=m.linear_size,
        beta=beta,
        decoder_id=decoder_id,
        check_interval=check_interval,
        t_max=t_max,
        tracked=tuple(tracked),
        failure_sweep=failure,
        abstentions=abstentions,
        seed_label=seed_label,
    )
