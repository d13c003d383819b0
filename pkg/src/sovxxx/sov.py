"""Separated basis and separate states in the dense representation.

The lower-left monodromy entry evaluated at the inhomogeneities builds,
out of the all-up reference state, a basis labelled by occupation
patterns ``h`` in {0,1}^N on which the lower-right entry acts
diagonally.  Left and right versions are constructed independently (the
transfer matrix is not symmetric, and all pairings here are bilinear —
no complex conjugation anywhere).  On top of the basis sit the separate
states: states whose basis weights factorize into per-site values of a
single function, which is the structure that turns scalar products into
determinants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian

import numpy as np

from .chain import (
    ChainParams,
    a_of,
    d_of,
    require_generic,
    shifted_xi,
    vandermonde,
)
from .dense import monodromy, reference_state
from .polynomials import ComplexPoly, poly_from_roots

_BASIS_CACHE: dict[tuple, np.ndarray] = {}


def occupation_patterns(n_sites: int):
    """All occupation patterns as tuples, site 1 first, in integer order
    of the bitmask with site 1 as the most significant bit."""
    return _cartesian((0, 1), repeat=n_sites)


def pattern_index(h) -> int:
    idx = 0
    for bit in h:
        idx = (idx << 1) | int(bit)
    return idx


def _fingerprint(params: ChainParams) -> tuple:
    return (params.n_sites, params.eta, params.xi.tobytes())


def sov_basis(params: ChainParams, side: str) -> np.ndarray:
    """All 2^N separated-basis vectors, indexed by the occupation bitmask.

    Right vectors are columns of the sparse ladder construction applied
    to the all-up state; left vectors are rows built the same way from
    the upper-right entries, i.e. genuinely independent of the right
    family.  Both include the overall inverse Vandermonde normalization
    in the inhomogeneities.
    """
    if side not in ("left", "right"):
        raise ValueError('side must be "left" or "right"')
    require_generic(params)
    key = (_fingerprint(params), side)
    cached = _BASIS_CACHE.get(key)
    if cached is not None:
        return cached
    n = params.n_sites
    dim = params.dim
    xi = params.xi
    eta = params.eta
    inv_v = 1.0 / vandermonde(xi)
    # single-site ladder factors, one per site
    ladders = []
    for a in range(n):
        blocks = monodromy(params, xi[a])
        if side == "right":
            ladders.append(blocks[0][1] / a_of(params, xi[a]))
        else:
            ladders.append(blocks[1][0] / d_of(params, xi[a] - eta))
    # incremental build over bitmask order: each pattern extends the
    # pattern with its last occupied site cleared
    basis = np.zeros((2**n, dim), dtype=complex)
    basis[0] = reference_state(params)
    for idx in range(1, 2**n):
        site_bit = idx & (-idx)
        a = n - site_bit.bit_length()  # 0-based site of the lowest set bit
        parent = idx ^ site_bit
        if side == "right":
            basis[idx] = ladders[a] @ basis[parent]
        else:
            basis[idx] = basis[parent] @ ladders[a]
    basis *= inv_v
    basis.setflags(write=False)
    _BASIS_CACHE[key] = basis
    return basis


def sov_basis_state(params: ChainParams, h, side: str) -> np.ndarray:
    """One separated-basis vector for occupation pattern ``h``."""
    h = tuple(int(b) for b in h)
    if len(h) != params.n_sites:
        raise ValueError("occupation pattern must have one entry per site")
    return sov_basis(params, side)[pattern_index(h)].copy()


def diagonal_eigenvalue(params: ChainParams, h, lam) -> complex:
    """Eigenvalue of the lower-right monodromy entry on basis vector h:
    product of (lam - xi_n + h_n eta)."""
    h = np.asarray(tuple(h))
    lam = np.asarray(lam, dtype=complex)
    return np.prod(lam[..., None] - params.xi + h * params.eta, axis=-1)


def sov_gram_check(params: ChainParams) -> dict[str, float]:
    """Residuals of the Gram structure of the separated basis.

    The left/right Gram matrix is diagonal with explicitly known inverse
    Vandermonde weights carrying an occupation-parity sign, and the
    weighted sum of outer products resolves the identity.  Returns the
    maximum normalized Gram residual and the identity-decomposition
    residual.
    """
    n = params.n_sites
    right = sov_basis(params, "right")
    left = sov_basis(params, "left")
    gram = left @ right.T
    v_xi = vandermonde(params.xi)
    gram_res = 0.0
    recon = np.zeros((params.dim, params.dim), dtype=complex)
    for h in occupation_patterns(n):
        idx = pattern_index(h)
        parity = (-1) ** sum(h)
        weight = v_xi * vandermonde(shifted_xi(params, np.asarray(h), direction=-1))
        # normalized row: G[idx, :] * parity * weight should be the unit row
        row = gram[idx] * parity * weight
        target = np.zeros(2**n)
        target[idx] = 1.0
        gram_res = max(gram_res, float(np.max(np.abs(row - target))))
        recon += parity * weight * np.outer(right[idx], left[idx])
    identity_res = float(np.max(np.abs(recon - np.eye(params.dim))))
    return {"gram": gram_res, "identity": identity_res}


@dataclass(frozen=True, eq=False)
class SeparateStateSpec:
    """Defining data of a separate state: the per-site values of its
    weight function on the inhomogeneity lattice, plus optional roots
    when the function is a known polynomial."""

    side: str
    values_at_xi: np.ndarray
    values_at_xi_minus_eta: np.ndarray
    roots: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.side not in ("left", "right"):
            raise ValueError('side must be "left" or "right"')
        for name in ("values_at_xi", "values_at_xi_minus_eta"):
            arr = np.asarray(getattr(self, name), dtype=complex).ravel().copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.values_at_xi.size != self.values_at_xi_minus_eta.size:
            raise ValueError("value arrays must have equal length")
        if self.roots is not None:
            roots = np.asarray(self.roots, dtype=complex).ravel().copy()
            roots.setflags(write=False)
            object.__setattr__(self, "roots", roots)

    def to_json(self) -> dict:
        out = {
            "side": self.side,
            "xi_values": [[z.real, z.imag] for z in self.values_at_xi],
            "shifted_values": [[z.real, z.imag] for z in self.values_at_xi_minus_eta],
        }
        if self.roots is not None:
            out["roots"] = [[z.real, z.imag] for z in self.roots]
        return out

    @staticmethod
    def from_json(data: dict) -> "SeparateStateSpec":
        roots = None
        if "roots" in data and data["roots"] is not None:
            roots = np.array([complex(re, im) for re, im in data["roots"]])
        return SeparateStateSpec(
            side=data["side"],
            values_at_xi=np.array([complex(re, im) for re, im in data["xi_values"]]),
            values_at_xi_minus_eta=np.array(
                [complex(re, im) for re, im in data["shifted_values"]]
            ),
            roots=roots,
        )


def spec_from_roots(params: ChainParams, roots, side: str) -> SeparateStateSpec:
    """Separate-state data for the monic polynomial with the given roots."""
    poly = poly_from_roots(roots)
    return SeparateStateSpec(
        side=side,
        values_at_xi=np.asarray(poly(params.xi), dtype=complex),
        values_at_xi_minus_eta=np.asarray(poly(params.xi - params.eta), dtype=complex),
        roots=np.asarray(roots, dtype=complex),
    )


def spec_constant_one(params: ChainParams, side: str) -> SeparateStateSpec:
    """The separate state of the constant function 1."""
    ones = np.ones(params.n_sites, dtype=complex)
    return SeparateStateSpec(side=side, values_at_xi=ones, values_at_xi_minus_eta=ones)


def spec_alternating_one(params: ChainParams, side: str) -> SeparateStateSpec:
    """The separate state taking value +1 on the inhomogeneities and -1 on
    their down-shifts."""
    ones = np.ones(params.n_sites, dtype=complex)
    return SeparateStateSpec(
        side=side, values_at_xi=ones, values_at_xi_minus_eta=-ones
    )


def _kahan_weighted_sum(weights, vectors: np.ndarray) -> np.ndarray:
    """Compensated accumulation of sum_k weights[k] * vectors[k]."""
    total = np.zeros(vectors.shape[1], dtype=complex)
    comp = np.zeros_like(total)
    for w, vec in zip(weights, vectors):
        term = w * vec - comp
        new_total = total + term
        comp = (new_total - total) - term
        total = new_total
    return total


def separate_state_dense(params: ChainParams, sspec: SeparateStateSpec) -> np.ndarray:
    """Dense vector of a separate state from its per-site weight values.

    Left states weight basis row ``h`` by the product over sites of the
    function at the h-shifted inhomogeneity times the shifted-set
    Vandermonde.  Right states use the same structure with the value at
    the down-shifted point dressed by the local ratio a(xi)/d(xi-eta) on
    occupied sites; that dressing is what makes the right family
    biorthogonal to the left one with factorized weights.  The 2^N-term
    accumulation is compensated to keep cancellation error at bay.
    """
    n = params.n_sites
    if sspec.values_at_xi.size != n:
        raise ValueError("separate-state values must cover every site")
    basis = sov_basis(params, sspec.side)
    xi = params.xi
    eta = params.eta
    site_w0 = sspec.values_at_xi
    if sspec.side == "left":
        site_w1 = sspec.values_at_xi_minus_eta
    else:
        dressing = a_of(params, xi) / d_of(params, xi - eta)
        site_w1 = dressing * sspec.values_at_xi_minus_eta
    weights = []
    for h in occupation_patterns(n):
        arr = np.asarray(h)
        w = np.prod(np.where(arr == 1, site_w1, site_w0))
        w *= vandermonde(shifted_xi(params, arr, direction=-1))
        weights.append(w)
    return _kahan_weighted_sum(weights, basis)


def separate_state_aba(
    params: ChainParams,
    roots,
    base: str = "one",
    side: str = "right",
    companion_roots=None,
) -> np.ndarray:
    """Separate state of a polynomial built operatorially: the ordered
    product of lower-right monodromy entries at the roots applied to the
    constant-one separate state, with sign (-1)^(R N).

    With ``base="one_alt"`` the complementary construction is used: the
    entries act at ``roots`` (the complementary root set) on the
    alternating-one state, and the prefactor carries the ratio of d
    values between ``companion_roots`` (the polynomial's own roots) and
    ``roots``, with sign (-1)^(N len(companion_roots)).
    """
    roots = np.asarray(roots, dtype=complex).ravel()
    n = params.n_sites
    if base == "one":
        base_spec = spec_constant_one(params, side)
        sign = (-1.0) ** (roots.size * n)
        prefactor = 1.0 + 0.0j
    elif base == "one_alt":
        if side != "right":
            raise ValueError("the alternating-base construction is right-sided")
        if companion_roots is None:
            raise ValueError("the alternating-base construction needs companion_roots")
        companion = np.asarray(companion_roots, dtype=complex).ravel()
        base_spec = spec_alternating_one(params, side)
        sign = (-1.0) ** (companion.size * n)
        prefactor = np.prod(d_of(params, companion)) / np.prod(d_of(params, roots))
    else:
        raise ValueError('base must be "one" or "one_alt"')
    state = separate_state_dense(params, base_spec)
    if side == "right":
        for lam in roots:
            state = monodromy(params, lam)[1][1] @ state
    else:
        for lam in roots:
            state = state @ monodromy(params, lam)[1][1]
    return sign * prefactor * state


def bilinear(left_row: np.ndarray, right_col: np.ndarray) -> complex:
    """The bilinear pairing used everywhere: plain contraction, no
    conjugation."""
    return complex(np.dot(left_row, right_col))
