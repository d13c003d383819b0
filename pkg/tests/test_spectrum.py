"""Transfer spectrum through the discrete T-Q system."""

from __future__ import annotations

import numpy as np
import pytest

from sovxxx.chain import a_of, d_of, fixture_params
from sovxxx.dense import transfer_antiperiodic
from sovxxx.errors import PoleCollisionError
from sovxxx.sov import bilinear, separate_state_dense, spec_from_roots
from sovxxx.spectrum import (
    bethe_residuals,
    full_spectrum,
    pairing_indices,
    probe_points,
    solve_q_from_tau,
    tq_functional_residual,
)

from conftest import cached_params, cached_spectrum


def test_single_site_fixture_is_closed_form():
    records = full_spectrum(fixture_params(1), 0)
    assert len(records) == 2
    taus = sorted(rec.tau(0.0).real for rec in records)
    assert taus == pytest.approx([-1.0, 1.0], abs=1e-12)
    for rec in records:
        monic = rec.q_tau.coeffs / rec.q_tau.coeffs[-1]
        if rec.tau(0.0).real > 0:
            assert monic == pytest.approx([0.5, 1.0], abs=1e-10)
            assert rec.bethe_roots == pytest.approx([-0.5], abs=1e-10)
        else:
            assert monic == pytest.approx([1.0], abs=1e-10)
            assert rec.n_roots == 0


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_record_counts_and_distinctness(n_sites):
    records = cached_spectrum(n_sites, 0)
    assert len(records) == 2**n_sites
    probe = 0.319 - 0.777j
    values = np.array([rec.tau(probe) for rec in records])
    gaps = np.abs(values[:, None] - values[None, :]) + np.eye(values.size)
    assert np.min(gaps) > 1e-6


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_functional_residual_on_fresh_points(n_sites):
    params = cached_params(n_sites, 0)
    rng = np.random.Generator(np.random.Philox(key=501 + n_sites))
    pts = rng.uniform(-1.5, 1.5, (50, 2))
    points = pts[:, 0] + 1j * pts[:, 1]
    for rec in cached_spectrum(n_sites, 0):
        assert tq_functional_residual(params, rec.tau, rec.q_tau, points) <= 1e-8


@pytest.mark.parametrize("n_sites", [2, 3])
def test_separate_state_is_dense_eigenvector(n_sites):
    params = cached_params(n_sites, 0)
    lam = 0.41 + 0.23j
    mat = transfer_antiperiodic(params, lam)
    for rec in cached_spectrum(n_sites, 0):
        vec = separate_state_dense(
            params, spec_from_roots(params, rec.bethe_roots, "right")
        )
        tau_val = rec.tau(lam)
        num = np.linalg.norm(mat @ vec - tau_val * vec)
        assert num <= 1e-8 * max(abs(tau_val), 1.0) * np.linalg.norm(vec)


@pytest.mark.parametrize("n_sites", [2, 3])
def test_distinct_eigenstates_pair_to_zero(n_sites):
    params = cached_params(n_sites, 0)
    records = cached_spectrum(n_sites, 0)
    states = {}
    for k, rec in enumerate(records):
        states[k] = (
            separate_state_dense(
                params, spec_from_roots(params, rec.bethe_roots, "left")
            ),
            separate_state_dense(
                params, spec_from_roots(params, rec.bethe_roots, "right")
            ),
        )
    for i in range(len(records)):
        for j in range(len(records)):
            if i == j:
                continue
            left, _ = states[i]
            _, right = states[j]
            norms = np.linalg.norm(left) * np.linalg.norm(right)
            assert abs(bilinear(left, right)) <= 1e-8 * norms


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_negation_pairing_is_exact_involution(n_sites):
    records = cached_spectrum(n_sites, 0)
    partner = pairing_indices(records)
    probe = 1.234 - 0.567j
    for i, rec in enumerate(records):
        j = partner[i]
        assert partner[j] == i
        assert abs(records[j].tau(probe) + rec.tau(probe)) <= 1e-9 * max(
            1.0, abs(rec.tau(probe))
        )


def test_stored_residuals_meet_module_gates():
    for n_sites in (2, 3, 4):
        for rec in cached_spectrum(n_sites, 0):
            assert rec.residuals["discrete_system"] <= 1e-9
            assert rec.residuals["functional_tq"] <= 1e-8
            assert rec.residuals["bethe"] <= 1e-7
            assert rec.residuals["wronskian"] <= 1e-8
            assert rec.residuals["eigenstate"] <= 1e-8


def test_q_solution_is_independent_of_auxiliary_node():
    params = cached_params(3, 0)
    for rec in cached_spectrum(3, 0)[:3]:
        for seed in (5, 17):
            again = solve_q_from_tau(params, rec.tau, seed=seed)
            assert again.degree == rec.q_tau.degree
            scale = float(np.max(np.abs(rec.q_tau.coeffs)))
            assert np.max(np.abs(again.coeffs - rec.q_tau.coeffs)) <= 1e-9 * scale


def test_bethe_residuals_flag_off_shell_sets():
    params = cached_params(3, 0)
    rec = next(r for r in cached_spectrum(3, 0) if r.n_roots >= 1)
    good = bethe_residuals(params, rec.bethe_roots)
    assert np.max(good) <= 1e-7
    bad = bethe_residuals(params, rec.bethe_roots + 0.1)
    assert np.max(bad) > 1e-3


def test_bethe_residuals_reject_lattice_collisions():
    params = cached_params(3, 0)
    with pytest.raises(PoleCollisionError):
        bethe_residuals(params, np.array([params.xi[0]]))


def test_probe_points_deterministic_and_away_from_lattice():
    params = cached_params(4, 0)
    first = probe_points(params, 9)
    second = probe_points(params, 9)
    assert np.array_equal(first, second)
    for z in first:
        assert abs(a_of(params, z)) > 1e-8
        assert abs(d_of(params, z)) > 1e-8
