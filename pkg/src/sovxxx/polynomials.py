"""Complex polynomials with ascending coefficients.

Thin, deliberately small layer over ``numpy.polynomial.polynomial``:
construction from roots, Horner evaluation, Lagrange interpolation and
companion-matrix root extraction, plus the trimming policy used by the
linear solves elsewhere in the package (trailing coefficients below a
relative threshold are numerical noise from near-singular systems and
are dropped).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateNodesError

# Relative magnitude below which trailing coefficients are treated as noise.
TRIM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    """A polynomial with complex coefficients, lowest order first.

    ``coeffs[k]`` multiplies ``z**k``.  Trailing coefficients whose
    modulus is below ``TRIM_TOL`` times the largest modulus are removed
    on construction.  The zero polynomial is stored as a single zero
    coefficient and reports ``degree == -1``.
    """

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self) -> None:
        raw = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel()
        scale = np.max(np.abs(raw)) if raw.size else 0.0
        if scale == 0.0:
            trimmed = np.zeros(1, dtype=complex)
        else:
            keep = np.nonzero(np.abs(raw) > TRIM_TOL * scale)[0]
            if keep.size == 0:
                trimmed = np.zeros(1, dtype=complex)
            else:
                trimmed = raw[: keep[-1] + 1].copy()
        trimmed.setflags(write=False)
        object.__setattr__(self, "coeffs", trimmed)

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else self.coeffs.size - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def derivative(self) -> "ComplexPoly":
        if self.degree < 1:
            return ComplexPoly(np.zeros(1, dtype=complex))
        return ComplexPoly(npoly.polyder(self.coeffs))

    def scaled(self, factor: complex) -> "ComplexPoly":
        return ComplexPoly(self.coeffs * factor)

    def monic(self) -> "ComplexPoly":
        if self.is_zero:
            raise ValueError("the zero polynomial has no monic normalization")
        return ComplexPoly(self.coeffs / self.coeffs[-1])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ComplexPoly({np.array2string(self.coeffs, precision=6)})"


def poly_from_roots(roots) -> ComplexPoly:
    """Monic polynomial with the given roots; an empty set gives 1."""
    roots = np.asarray(roots, dtype=complex).ravel()
    if roots.size == 0:
        return ComplexPoly(np.ones(1, dtype=complex))
    return ComplexPoly(npoly.polyfromroots(roots))


def poly_eval(poly: ComplexPoly, z):
    """Evaluate ``poly`` at a scalar or array argument."""
    return poly(z)


def poly_mul(p: ComplexPoly, q: ComplexPoly) -> ComplexPoly:
    return ComplexPoly(npoly.polymul(p.coeffs, q.coeffs))


def poly_add(p: ComplexPoly, q: ComplexPoly) -> ComplexPoly:
    return ComplexPoly(npoly.polyadd(p.coeffs, q.coeffs))


def lagrange_interpolate(nodes, values) -> ComplexPoly:
    """The unique polynomial of degree < len(nodes) through the given points.

    Built from cardinal polynomials, which is exact (up to roundoff) for
    the small node counts used here.  Nodes closer than ``1e-8`` relative
    to their overall scale cannot be separated and raise
    ``DegenerateNodesError``.
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    values = np.asarray(values, dtype=complex).ravel()
    if nodes.size != values.size:
        raise ValueError("nodes and values must have equal length")
    if nodes.size == 0:
        raise ValueError("need at least one interpolation node")
    scale = max(1.0, float(np.max(np.abs(nodes))))
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, np.inf)
    if np.min(np.abs(diff)) <= 1e-8 * scale:
        raise DegenerateNodesError(
            "interpolation nodes are too close to separate polynomial values"
        )
    acc = np.zeros(nodes.size, dtype=complex)
    for b in range(nodes.size):
        others = np.delete(nodes, b)
        cardinal = npoly.polyfromroots(others) if others.size else np.ones(1, dtype=complex)
        denom = np.prod(nodes[b] - others) if others.size else 1.0
        term = cardinal * (values[b] / denom)
        acc[: term.size] += term
    return ComplexPoly(acc)


def poly_roots(poly: ComplexPoly) -> np.ndarray:
    """All roots via the companion matrix, validated by re-expansion.

    The monic re-expansion of the computed roots must reproduce the
    input coefficients to relative 1e-8, otherwise the root set is not
    trustworthy and a ``RuntimeError`` is raised.
    """
    if poly.is_zero:
        raise ValueError("the zero polynomial does not have a root set")
    if poly.degree == 0:
        return np.zeros(0, dtype=complex)
    roots = np.asarray(npoly.polyroots(poly.coeffs), dtype=complex)
    rebuilt = npoly.polyfromroots(roots) * poly.leading
    scale = np.max(np.abs(poly.coeffs))
    err = np.max(np.abs(rebuilt - poly.coeffs)) / scale
    if err > 1e-8:
        raise RuntimeError(
            f"companion-matrix roots failed the re-expansion check (residual {err:.3e})"
        )
    return roots


def effective_degree(poly: ComplexPoly, tol: float = 1e-8) -> int:
    """Largest index whose coefficient exceeds ``tol`` relative to the maximum.

    Used to strip noise-level leading coefficients produced by linear
    solves before declaring the degree of a computed polynomial.
    """
    mags = np.abs(poly.coeffs)
    scale = float(np.max(mags))
    if scale == 0.0:
        return -1
    idx = np.nonzero(mags > tol * scale)[0]
    return int(idx[-1]) if idx.size else -1


def truncate_to_degree(poly: ComplexPoly, degree: int) -> ComplexPoly:
    """Drop all coefficients above ``degree`` (validated noise removal)."""
    if degree < 0:
        return ComplexPoly(np.zeros(1, dtype=complex))
    return ComplexPoly(poly.coeffs[: degree + 1])
