"""Dense tensor-product oracle: transfer family, symmetries, spectra."""

from __future__ import annotations

import numpy as np
import pytest

from sovxxx.chain import fixture_params
from sovxxx.dense import (
    basis_rotation,
    default_eval_point,
    diagonalize_transfer,
    global_flip,
    hamiltonian_limit_check,
    monodromy,
    quantum_det_check,
    site_sigma,
    total_sx,
    transfer_antiperiodic,
    transfer_twisted,
)
from sovxxx.polynomials import lagrange_interpolate

from conftest import cached_params


def _norm(mat):
    return max(float(np.max(np.abs(mat))), 1e-300)


@pytest.mark.parametrize("n_sites", [2, 3, 4, 5])
def test_transfer_family_commutes(n_sites):
    params = cached_params(n_sites, 0)
    rng = np.random.Generator(np.random.Philox(key=301 + n_sites))
    for _ in range(5):
        z1 = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        z2 = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        t1 = transfer_antiperiodic(params, z1)
        t2 = transfer_antiperiodic(params, z2)
        comm = t1 @ t2 - t2 @ t1
        assert np.max(np.abs(comm)) <= 1e-10 * _norm(t1) * _norm(t2)


@pytest.mark.parametrize("n_sites", [3, 4])
def test_transfer_entries_have_degree_below_site_count(n_sites):
    params = cached_params(n_sites, 0)
    nodes = [default_eval_point(params, k) + 0.21j * k for k in range(n_sites)]
    held_out = default_eval_point(params, n_sites) + 1.3 - 0.7j
    mats = [transfer_antiperiodic(params, z) for z in nodes]
    target = transfer_antiperiodic(params, held_out)
    dim = 2**n_sites
    rebuilt = np.zeros_like(target)
    for i in range(dim):
        for j in range(dim):
            poly = lagrange_interpolate(nodes, [m[i, j] for m in mats])
            rebuilt[i, j] = poly(held_out)
    assert np.max(np.abs(rebuilt - target)) <= 1e-9 * _norm(target)


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_quantum_determinant_factorizes(n_sites):
    params = cached_params(n_sites, 0)
    rng = np.random.Generator(np.random.Philox(key=311 + n_sites))
    for _ in range(4):
        lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        assert quantum_det_check(params, lam) <= 1e-10


@pytest.mark.parametrize("n_sites", [2, 4])
def test_spin_flip_symmetries(n_sites):
    params = cached_params(n_sites, 0)
    lam = default_eval_point(params, 1)
    flip = global_flip(params)
    anti = transfer_antiperiodic(params, lam)
    twisted = transfer_twisted(params, lam)
    assert np.max(np.abs(flip @ anti @ flip - anti)) <= 1e-10 * _norm(anti)
    assert np.max(np.abs(flip @ twisted @ flip + twisted)) <= 1e-10 * _norm(twisted)


@pytest.mark.parametrize("n_sites", [2, 3, 5])
def test_rotation_similarity_between_twists(n_sites):
    params = cached_params(n_sites, 0)
    rot = basis_rotation(params)
    assert np.max(np.abs(rot @ rot.T - np.eye(2**n_sites))) <= 1e-12
    lam = default_eval_point(params, 0)
    anti = transfer_antiperiodic(params, lam)
    twisted = transfer_twisted(params, lam)
    assert np.max(np.abs(rot @ anti @ rot.T - twisted)) <= 1e-10 * _norm(twisted)


def test_monodromy_blocks_assemble_the_transfer():
    params = cached_params(3, 0)
    lam = 0.37 - 0.58j
    blocks = monodromy(params, lam)
    anti = transfer_antiperiodic(params, lam)
    twisted = transfer_twisted(params, lam)
    assert np.max(np.abs(blocks[0][1] + blocks[1][0] - anti)) <= 1e-12 * _norm(anti)
    assert (
        np.max(np.abs(blocks[0][0] - blocks[1][1] - twisted))
        <= 1e-12 * _norm(twisted)
    )


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_eigen_decomposition_is_biorthonormal(n_sites):
    params = cached_params(n_sites, 0)
    triples = diagonalize_transfer(params)
    assert len(triples) == 2**n_sites
    lam0 = default_eval_point(params, 0)
    mat = transfer_antiperiodic(params, lam0)
    for k, (_, right, left) in enumerate(triples):
        # eigenvectors are shared by the whole commuting family, so the
        # pair must diagonalize the transfer at any probe point
        val_at = left @ (mat @ right)
        assert np.linalg.norm(mat @ right - val_at * right) <= 1e-8 * _norm(
            mat
        ) * np.linalg.norm(right)
        for j, (_, right_j, _) in enumerate(triples):
            want = 1.0 if j == k else 0.0
            assert abs(left @ right_j - want) <= 1e-9


def test_hamiltonian_forms_agree_in_homogeneous_limit():
    assert hamiltonian_limit_check(2, 0.0) <= 1e-9
    assert hamiltonian_limit_check(3, 0.0) <= 1e-9


def test_hamiltonian_forms_deviation_decays_linearly():
    values = [hamiltonian_limit_check(3, eps) for eps in (1e-2, 1e-3, 1e-4)]
    assert values[1] <= 0.2 * values[0]
    assert values[2] <= 0.2 * values[1]


def test_local_operators_and_total_sx():
    params = fixture_params(1)
    minus = site_sigma(params, 1, "-")
    assert np.allclose(minus, [[0, 0], [1, 0]])
    plus = site_sigma(params, 1, "+")
    assert np.allclose(plus, [[0, 1], [0, 0]])
    z = site_sigma(params, 1, "z")
    assert np.allclose(z, [[1, 0], [0, -1]])
    sx = total_sx(cached_params(2, 0))
    assert np.allclose(sx, sx.T)
    assert np.allclose(np.sort(np.linalg.eigvalsh(sx)), [-2.0, 0.0, 0.0, 2.0])
