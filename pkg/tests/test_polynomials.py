"""Polynomial container, interpolation, and root extraction."""

from __future__ import annotations

import numpy as np
import pytest

from sovxxx.polynomials import (
    ComplexPoly,
    effective_degree,
    lagrange_interpolate,
    poly_add,
    poly_from_roots,
    poly_mul,
    poly_roots,
    truncate_to_degree,
)

from conftest import separated_cloud


def test_root_roundtrip_up_to_degree_twelve():
    rng = np.random.Generator(np.random.Philox(key=101))
    for size in (1, 2, 3, 5, 8, 12):
        roots = separated_cloud(rng, size, 0.0, min_sep=0.12, box=1.4)
        recovered = poly_roots(poly_from_roots(roots))
        assert recovered.size == size
        for r in roots:
            assert np.min(np.abs(recovered - r)) <= 1e-8


def test_lagrange_interpolation_reproduces_coefficients():
    rng = np.random.Generator(np.random.Philox(key=102))
    for degree in (0, 1, 3, 6, 9):
        coeffs = rng.uniform(-1, 1, degree + 1) + 1j * rng.uniform(-1, 1, degree + 1)
        coeffs[-1] += 2.0  # keep the top coefficient away from the trim window
        poly = ComplexPoly(coeffs)
        nodes = separated_cloud(rng, degree + 1, 0.0, min_sep=0.15, box=1.5)
        rebuilt = lagrange_interpolate(nodes, [poly(z) for z in nodes])
        assert rebuilt.degree == degree
        scale = float(np.max(np.abs(coeffs)))
        assert np.max(np.abs(rebuilt.coeffs - coeffs)) <= 1e-10 * scale


def test_evaluation_is_linear():
    rng = np.random.Generator(np.random.Philox(key=103))
    p = ComplexPoly(rng.uniform(-1, 1, 5) + 1j * rng.uniform(-1, 1, 5))
    q = ComplexPoly(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
    both = poly_add(p, q)
    for _ in range(20):
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        lhs = both(z)
        rhs = p(z) + q(z)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_product_evaluates_to_product_of_values():
    p = poly_from_roots([0.5, -1.25j])
    q = poly_from_roots([1.0 + 1.0j])
    prod = poly_mul(p, q)
    for z in (0.3, -1.1 + 0.4j, 2.0j):
        assert abs(prod(z) - p(z) * q(z)) <= 1e-12 * max(1.0, abs(prod(z)))


def test_trailing_noise_is_trimmed():
    poly = ComplexPoly([1.0, 2.0, 1e-16])
    assert poly.degree == 1


def test_effective_degree_and_truncation():
    poly = ComplexPoly([1.0, 1.0, 1e-9])
    assert poly.degree == 2
    assert effective_degree(poly, tol=1e-8) == 1
    cut = truncate_to_degree(poly, 1)
    assert cut.degree == 1
    assert cut(0.5) == pytest.approx(1.5, abs=1e-12)


def test_empty_and_constant_behaviour():
    const = ComplexPoly([3.5])
    assert const.degree == 0
    assert const(123.0) == 3.5
    assert poly_from_roots([]).degree == 0
    assert poly_from_roots([])(7.0 + 1j) == 1.0
