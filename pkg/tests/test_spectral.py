import numpy as np
import pytest

from qmemsim.models import build_model
from qmemsim.spectral import (
    dense_hamiltonian,
    ground_splitting,
    hamiltonian_operator,
)


def test_two_site_chain_diagonal():
    h = dense_hamiltonian(build_model("ising1d", 2))
    assert np.allclose(np.diag(h), [-1.0, 1.0, 1.0, -1.0])
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


def test_unperturbed_ground_energy_is_minus_check_count():
    for family, L in (("ising1d", 6), ("ising2d", 3), ("surface2d", 2)):
        m = build_model(family, L)
        rep = ground_splitting(m)
        assert rep.eigenvalues[0] == pytest.approx(-m.delta * len(m.checks))


def test_hermiticity():
    m = build_model("surface2d", 2)
    for direction, eps in ((None, 0.0), ("Z", 0.1), ("X", 0.07)):
        h = dense_hamiltonian(m, direction, eps)
        assert np.array_equal(h, h.T)


def test_surface_l2_unperturbed_spectrum():
    rep = ground_splitting(build_model("surface2d", 2))
    assert rep.splitting == pytest.approx(0.0, abs=1e-12)
    assert rep.gap == pytest.approx(2.0)
    assert rep.ground_degeneracy == 2


def test_ground_degeneracy_is_two_to_the_k():
    for family, L in (("ising1d", 5), ("ising1d", 8), ("ising2d", 3),
                      ("surface2d", 2), ("surface2d", 3)):
        m = build_model(family, L)
        rep = ground_splitting(m)
        assert rep.ground_degeneracy == 2 ** m.k, (family, L)
        assert rep.splitting == pytest.approx(0.0, abs=1e-10)


def test_splitting_decreases_with_size_under_z_field():
    reps = {L: ground_splitting(build_model("surface2d", L), "Z", 0.1)
            for L in (2, 3)}
    assert reps[2].splitting > 0
    assert reps[3].splitting > 0
    assert reps[3].splitting < reps[2].splitting
    assert all(r < 1e-8 for r in reps[3].residuals)


def test_dense_and_iterative_paths_agree():
    m = build_model("ising1d", 6)
    dense = ground_splitting(m, "X", 0.1, method="dense")
    iterative = ground_splitting(m, "X", 0.1, method="iterative")
    assert dense.splitting > 0
    assert abs(dense.splitting - iterative.splitting) < 1e-10
    for a, b in zip(dense.eigenvalues, iterative.eigenvalues):
        assert abs(a - b) < 1e-10


def test_matrix_free_matches_dense_application():
    rng = np.random.default_rng(3)
    for family, L, direction, eps in (("surface2d", 2, "Z", 0.1),
                                      ("ising1d", 5, "X", 0.2)):
        m = build_model(family, L)
        h = dense_hamiltonian(m, direction, eps)
        op = hamiltonian_operator(m, direction, eps)
        for _ in range(5):
            v = rng.standard_normal(h.shape[0])
            dense_out = h @ v
            free_out = op.matvec(v)
            scale = max(1.0, np.linalg.norm(dense_out))
            assert np.linalg.norm(dense_out - free_out) / scale < 1e-12


def test_splitting_monotone_in_epsilon_surface_l2():
    # Empirical regression on a sampled grid, not a theorem.
    m = build_model("surface2d", 2)
    values = [ground_splitting(m, "Z", eps).splitting
              for eps in (0.0, 0.05, 0.1, 0.15, 0.2)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_size_refusal():
    with pytest.raises(ValueError):
        ground_splitting(build_model("toric3d", 2))
    with pytest.raises(ValueError):
        dense_hamiltonian(build_model("toric3d", 2))


def test_report_serializes():
    rep = ground_splitting(build_model("surface2d", 2), "Z", 0.1)
    doc = rep.to_json_dict()
    assert doc["family"] == "surface2d" and doc["epsilon"] == 0.1
    assert len(doc["eigenvalues"]) >= 4
