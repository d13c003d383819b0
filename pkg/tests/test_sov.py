"""Separated basis, separate states, and their dense realizations."""

from __future__ import annotations

import numpy as np
import pytest

from sovxxx.dense import basis_rotation, flipped_reference_state, monodromy
from sovxxx.sov import (
    SeparateStateSpec,
    bilinear,
    diagonal_eigenvalue,
    occupation_patterns,
    pattern_index,
    separate_state_aba,
    separate_state_dense,
    sov_basis_state,
    sov_gram_check,
    spec_alternating_one,
    spec_constant_one,
    spec_from_roots,
)

from conftest import cached_params, separated_cloud


@pytest.mark.parametrize("n_sites", [2, 3, 4, 5])
def test_gram_and_identity_decomposition(n_sites):
    report = sov_gram_check(cached_params(n_sites, 0))
    assert report["gram"] <= 1e-9
    assert report["identity"] <= 1e-9


@pytest.mark.parametrize("n_sites", [2, 3])
def test_diagonal_eigenrelation_both_sides(n_sites):
    params = cached_params(n_sites, 0)
    rng = np.random.Generator(np.random.Philox(key=401))
    for _ in range(2):
        lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        dmat = monodromy(params, lam)[1][1]
        for h in occupation_patterns(n_sites):
            val = diagonal_eigenvalue(params, h, lam)
            right = sov_basis_state(params, h, "right")
            left = sov_basis_state(params, h, "left")
            scale = max(abs(val), 1.0) * float(np.max(np.abs(right)))
            assert np.max(np.abs(dmat @ right - val * right)) <= 1e-10 * scale
            scale_l = max(abs(val), 1.0) * float(np.max(np.abs(left)))
            assert np.max(np.abs(left @ dmat - val * left)) <= 1e-10 * scale_l


def test_pattern_enumeration_and_index_are_inverse():
    pats = list(occupation_patterns(3))
    assert len(pats) == 8
    for k, h in enumerate(pats):
        assert pattern_index(h) == k


@pytest.mark.parametrize("n_sites", [3, 4])
def test_polynomial_spec_representations_agree(n_sites):
    params = cached_params(n_sites, 0)
    rng = np.random.Generator(np.random.Philox(key=402 + n_sites))
    for _ in range(10):
        m = int(rng.integers(0, n_sites + 1))
        roots = separated_cloud(rng, m, params.eta, avoid=params.xi)
        for side in ("left", "right"):
            spec = spec_from_roots(params, roots, side)
            dense = separate_state_dense(params, spec)
            aba = separate_state_aba(params, roots, side=side)
            scale = float(np.max(np.abs(dense)))
            assert np.max(np.abs(dense - aba)) <= 1e-10 * max(scale, 1e-300)


def test_complementary_operator_construction_matches_direct(spectrum_of):
    params = cached_params(3, 0)
    for rec in spectrum_of(3, 0):
        direct = separate_state_dense(
            params, spec_from_roots(params, rec.bethe_roots, "right")
        )
        alt = separate_state_aba(
            params,
            rec.q_minus_roots,
            base="one_alt",
            companion_roots=rec.bethe_roots,
        )
        scale = float(np.max(np.abs(direct)))
        assert np.max(np.abs(direct - alt)) <= 1e-10 * scale


def test_specs_are_projective_in_per_site_scalings():
    params = cached_params(3, 0)
    rng = np.random.Generator(np.random.Philox(key=403))
    top = rng.uniform(0.5, 1.5, 3) + 1j * rng.uniform(-1, 1, 3)
    bot = rng.uniform(0.5, 1.5, 3) + 1j * rng.uniform(-1, 1, 3)
    factors = rng.uniform(0.5, 2.0, 3) + 1j * rng.uniform(-0.5, 0.5, 3)
    base = SeparateStateSpec("right", tuple(top), tuple(bot), None)
    scaled = SeparateStateSpec(
        "right", tuple(top * factors), tuple(bot * factors), None
    )
    v1 = separate_state_dense(params, base)
    v2 = separate_state_dense(params, scaled)
    expected = complex(np.prod(factors))
    assert np.max(np.abs(v2 - expected * v1)) <= 1e-12 * float(np.max(np.abs(v2)))


@pytest.mark.parametrize("n_sites", [1, 2, 3, 5])
def test_constant_one_state_is_spin_flip_product(n_sites):
    for seed in (0, 1):
        params = cached_params(n_sites, seed)
        vec = separate_state_dense(params, spec_constant_one(params, "right"))
        cell = np.array([1.0, -1.0], dtype=complex)
        expected = cell
        for _ in range(n_sites - 1):
            expected = np.kron(expected, cell)
        assert np.max(np.abs(vec - expected)) <= 1e-13
        # same product state through the twist rotation of the reference
        rot = basis_rotation(params)
        alt = (-np.sqrt(2.0)) ** n_sites * (
            rot.T @ flipped_reference_state(params)
        )
        assert np.max(np.abs(vec - alt)) <= 1e-12


def test_alternating_one_state_at_two_sites():
    params = cached_params(2, 0)
    vec = separate_state_dense(params, spec_alternating_one(params, "right"))
    expected = np.kron([1.0, 1.0], [1.0, 1.0]).astype(complex)
    scale = vec[0] / expected[0]
    assert abs(scale) > 0
    assert np.max(np.abs(vec - scale * expected)) <= 1e-11 * abs(scale)


def test_bilinear_is_plain_dot_without_conjugation():
    left = np.array([1.0 + 2.0j, -1.0j])
    right = np.array([0.5, 2.0 - 1.0j])
    value = bilinear(left, right)
    assert value == pytest.approx((1.0 + 2.0j) * 0.5 + (-1.0j) * (2.0 - 1.0j))
