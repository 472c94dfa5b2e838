import math
import statistics

import numpy as np
import pytest

from qmemsim.barriers import syndrome_energy
from qmemsim.decoders import qubit_toggle_masks
from qmemsim.models import build_model
from qmemsim.pauli import PauliOperator
from qmemsim.thermal import (
    ThermalState,
    acceptance_probability,
    default_tracked,
    equilibrium_energy_check,
    exact_mean_violated,
    lifetime_trial,
    measure_observables,
    metropolis_sweep,
)


def rng_with(*seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed))))


def test_acceptance_rule_limits():
    # beta -> infinity: any uphill proposal is suppressed to zero.
    assert acceptance_probability(1e3, 1.0, 1) == pytest.approx(0.0, abs=1e-300)
    # beta = 0: everything is accepted.
    for dv in (-2, 0, 3):
        assert acceptance_probability(0.0, 1.0, dv) == 1.0
    assert acceptance_probability(2.0, 1.0, -1) == 1.0


def test_step_level_detailed_balance():
    # With uniform proposals, the acceptance ratio alone must reproduce the
    # Boltzmann factor between any two states one flip apart.
    beta, delta = 1.3, 1.0
    for dv in (1, 2, 3, 5):
        forward = acceptance_probability(beta, delta, dv)
        backward = acceptance_probability(beta, delta, -dv)
        assert forward / backward == pytest.approx(math.exp(-beta * 2 * delta * dv))


def test_bulk_flip_toggles_two_syndrome_bits():
    m = build_model("surface2d", 3)
    tgl_x, _ = qubit_toggle_masks(m)
    bulk = m.qubit_coords.index((1, 1))
    assert tgl_x[bulk].bit_count() == 2


def test_cache_coherence_after_sweeps():
    for family, L, beta in (("surface2d", 3, 0.7), ("toric3d", 2, 0.9),
                            ("ising2d", 3, 0.4)):
        state = ThermalState.initial(build_model(family, L), beta)
        metropolis_sweep(state, rng_with(2, L), sweeps=25)
        assert state.cache_coherent()
        syn, nv = syndrome_energy(state.model, state.error)
        assert (syn, nv) == (state.syndrome, state.violated)


def test_trajectories_are_deterministic():
    m = build_model("surface2d", 3)
    runs = []
    for _ in range(2):
        state = ThermalState.initial(m, 1.1)
        metropolis_sweep(state, rng_with(42), sweeps=50)
        runs.append((state.x_bits, state.z_bits, state.violated))
    assert runs[0] == runs[1]


def test_classical_states_never_gain_z_errors():
    state = ThermalState.initial(build_model("ising2d", 4), 0.3)
    metropolis_sweep(state, rng_with(9), sweeps=60)
    assert state.z_bits == 0
    assert state.x_bits != 0  # hot enough that flips certainly happened


def test_equilibrium_matches_enumeration():
    chk = equilibrium_energy_check(build_model("ising1d", 8), 1.0,
                                   sweeps=40_000, burn_in=1_000, rng=rng_with(4))
    assert abs(chk.estimate - chk.exact) <= 3 * chk.stderr
    # Independent closed form for the open chain: bonds are independent
    # two-level systems with energy 2*delta.
    p = math.exp(-2.0) / (1 + math.exp(-2.0))
    assert chk.exact == pytest.approx(7 * p, rel=1e-12)


def test_equilibrium_infinite_temperature_mean():
    m = build_model("surface2d", 2)
    assert exact_mean_violated(m, 0.0) == pytest.approx(len(m.checks) / 2)
    chk = equilibrium_energy_check(m, 0.0, sweeps=20_000, burn_in=500, rng=rng_with(6))
    assert abs(chk.estimate - chk.exact) <= 3 * chk.stderr


def test_equilibrium_ground_state_dominance():
    chk = equilibrium_energy_check(build_model("ising1d", 8), 20.0,
                                   sweeps=5_000, burn_in=500, rng=rng_with(8))
    assert chk.exact < 1e-10
    assert chk.estimate == 0.0


def test_equilibrium_refuses_large_models():
    with pytest.raises(ValueError):
        exact_mean_violated(build_model("surface2d", 3), 1.0)


def test_measure_observables_trivial_error():
    m = build_model("ising2d", 3)
    obs = measure_observables(ThermalState.initial(m, 1.0), "majority")
    assert obs.magnetization == 1.0
    assert obs.ec_values == {"bit_ec": 1}


def test_measure_observables_logical_flip():
    m = build_model("surface2d", 3)
    state = ThermalState.initial(m, 1.0)
    xbar = m.logicals[0].x_op
    state.x_bits = xbar.x_bits
    state.syndrome, state.violated = syndrome_energy(m, xbar)
    obs = measure_observables(state, "match2d", ("Xbar_ec", "Zbar_ec"))
    assert obs.ec_values == {"Xbar_ec": 1, "Zbar_ec": -1}


def test_measure_observables_majority_tolerates_minority_flips():
    m = build_model("ising2d", 3)
    state = ThermalState.initial(m, 1.0)
    err = PauliOperator.from_support(m.n, (0, 4), "X")
    state.x_bits = err.x_bits
    state.syndrome, state.violated = syndrome_energy(m, err)
    obs = measure_observables(state, "majority")
    assert obs.ec_values == {"bit_ec": 1}


def test_default_tracked_by_family():
    assert default_tracked(build_model("ising1d", 5)) == ("bit_ec",)
    assert default_tracked(build_model("surface2d", 2)) == ("Xbar_ec", "Zbar_ec")


def test_lifetime_trial_hot_surface_fails_fast():
    m = build_model("surface2d", 3)
    failures = []
    for k in range(8):
        rec = lifetime_trial(m, 0.0, "match2d", t_max=400, check_interval=1,
                             tracked=None, rng=rng_with(21, k))
        assert set(rec.failure_sweep) == {"Xbar_ec", "Zbar_ec"}
        failures.append(max(rec.lifetime(n) for n in rec.tracked))
    # At infinite temperature the state scrambles within a few sweeps.
    assert statistics.median(failures) <= 20


@pytest.mark.slow
def test_lifetime_grows_with_size_for_cold_ising2d():
    medians = {}
    for L in (5, 9):
        m = build_model("ising2d", L)
        lifetimes = []
        for k in range(20):
            rec = lifetime_trial(m, 0.55, "majority", t_max=4000, check_interval=1,
                                 tracked=None, rng=rng_with(17, L, k))
            lifetimes.append(rec.lifetime("bit_ec"))
        medians[L] = statistics.median(lifetimes)
    assert medians[9] > medians[5]


@pytest.mark.slow
def test_lifetime_asymmetry_toric3d():
    m = build_model("toric3d", 3)
    x_fail, z_fail = [], []
    for k in range(10):
        rec = lifetime_trial(m, 2.0, "greedy", t_max=6000, check_interval=10,
                             tracked=("Xbar_ec", "Zbar_ec"), rng=rng_with(13, k))
        x_fail.append(rec.lifetime("Xbar_ec"))
        z_fail.append(rec.lifetime("Zbar_ec"))
    assert statistics.median(z_fail) > statistics.median(x_fail)


def test_lifetime_trial_validates_interval():
    m = build_model("ising1d", 5)
    with pytest.raises(ValueError):
        lifetime_trial(m, 1.0, "majority", t_max=5, check_interval=10,
                       tracked=None, rng=rng_with(0))


def test_lifetime_trajectory_logging():
    m = build_model("surface2d", 2)
    rows = []
    lifetime_trial(m, 0.5, "match2d", t_max=30, check_interval=5, tracked=None,
                   rng=rng_with(3), trajectory=rows)
    assert rows and all(r["sweep"] % 5 == 0 for r in rows)
    assert {"sweep", "violated", "magnetization"} <= set(rows[0])


def test_trajectory_csv_export(tmp_path):
    from qmemsim.thermal import write_trajectory_csv

    m = build_model("surface2d", 2)
    rows = []
    lifetime_trial(m, 0.5, "match2d", t_max=20, check_interval=5, tracked=None,
                   rng=rng_with(3), trajectory=rows)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(rows, str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("sweep,violated,magnetization")
    assert len(lines) == len(rows) + 1
