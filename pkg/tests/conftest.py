"""Shared caches so expensive spectra are computed once per session."""

from __future__ import annotations

import numpy as np
import pytest

from sovxxx.chain import sample_generic_params
from sovxxx.spectrum import full_spectrum

_PARAMS: dict = {}
_SPECTRA: dict = {}


def cached_params(n_sites: int, seed: int = 0):
    key = (n_sites, seed)
    if key not in _PARAMS:
        _PARAMS[key] = sample_generic_params(n_sites, seed, None)
    return _PARAMS[key]


def cached_spectrum(n_sites: int, seed: int = 0):
    key = (n_sites, seed)
    if key not in _SPECTRA:
        _SPECTRA[key] = full_spectrum(cached_params(n_sites, seed), seed)
    return _SPECTRA[key]


@pytest.fixture(scope="session")
def params_of():
    return cached_params


@pytest.fixture(scope="session")
def spectrum_of():
    return cached_spectrum


def separated_cloud(rng, count, eta, avoid=(), min_sep=0.25, box=1.7):
    """Deterministic rejection draw keeping every pair of points (and
    every eta-shifted pair) at least min_sep apart."""
    shifts = (0.0, complex(eta), -complex(eta))
    anchors = [complex(w) for w in avoid]
    out: list[complex] = []
    for _ in range(6000):
        if len(out) == count:
            break
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(z - w + s) >= min_sep for w in anchors + out for s in shifts):
            out.append(z)
    assert len(out) == count, "rejection sampling exhausted"
    return np.array(out, dtype=complex)
