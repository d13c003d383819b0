"""Chain parameters and the basic site polynomials.

A chain is specified by the number of sites, a crossing parameter
``eta`` and one inhomogeneity ``xi_n`` per site.  The separated-basis
construction needs the inhomogeneities pairwise separated both directly
and after shifts by one unit of ``eta``; ``sample_generic_params`` draws
such sets reproducibly, and ``require_generic`` enforces the separation
where it is structurally needed.  The eigenvalue polynomials of the
diagonal monodromy entries and their one-site-split variants live here
as plain product formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingFailureError

# Default separation margin, as a fraction of |eta|.
DEFAULT_MARGIN_FRACTION = 0.3

_MAX_SAMPLING_ATTEMPTS = 1000


@dataclass(frozen=True, eq=False)
class ChainParams:
    """Inhomogeneous chain data: site count, crossing parameter, impurities.

    ``margin`` records the separation scale the parameter set was built
    for; constructions that rely on separation call ``require_generic``
    rather than trusting the stored value, so near-degenerate families
    (used in homogeneous-limit studies) can still be represented.
    """

    n_sites: int
    eta: complex
    xi: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    margin: float = 0.0

    def __post_init__(self) -> None:
        xi = np.asarray(self.xi, dtype=complex).ravel().copy()
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", complex(self.eta))
        if self.n_sites < 1:
            raise ValueError("a chain needs at least one site")
        if xi.size != self.n_sites:
            raise ValueError("xi must provide one inhomogeneity per site")
        if self.eta == 0:
            raise ValueError("the crossing parameter must be nonzero")

    @property
    def dim(self) -> int:
        return 2**self.n_sites


def separation_deficit(params: ChainParams) -> float:
    """Smallest of the quantities the genericity condition bounds below.

    Checks ``|eta|`` and ``|xi_a - xi_b - h*eta|`` for ``a != b`` and
    shifts ``h`` in {-1, 0, 1}.
    """
    vals = [abs(params.eta)]
    xi = params.xi
    n = params.n_sites
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            for h in (-1, 0, 1):
                vals.append(abs(xi[a] - xi[b] - h * params.eta))
    return min(vals)


def is_generic(params: ChainParams, margin: float | None = None) -> bool:
    m = params.margin if margin is None else margin
    if m <= 0:
        raise ValueError("genericity needs a positive margin")
    return separation_deficit(params) >= m


def require_generic(params: ChainParams, margin: float | None = None) -> None:
    m = params.margin if margin is None else margin
    if m <= 0 or separation_deficit(params) < m:
        raise ValueError(
            "inhomogeneities are not separated enough for the separated-basis "
            f"construction (deficit {separation_deficit(params):.3e}, margin {m:.3e})"
        )


def sample_generic_params(
    n_sites: int, seed: int, margin: float | None = None
) -> ChainParams:
    """Draw a well-separated parameter set, deterministically per seed.

    Uses the counter-based Philox generator so runs are reproducible
    across platforms.  The crossing parameter is drawn first (redrawn
    until its modulus is at least 0.5), then whole inhomogeneity vectors
    are drawn with nonzero imaginary parts and rejected until the
    separation condition holds.  A thousand failed attempts raise
    ``SamplingFailureError``.
    """
    if n_sites < 1:
        raise ValueError("a chain needs at least one site")
    rng = np.random.Generator(np.random.Philox(key=seed))
    while True:
        eta = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
        if abs(eta) >= 0.5:
            break
    delta = DEFAULT_MARGIN_FRACTION * abs(eta) if margin is None else float(margin)
    if delta <= 0:
        raise ValueError("margin must be positive")
    span = 2.5 * abs(eta) * max(1.0, n_sites / 4.0)
    for _ in range(_MAX_SAMPLING_ATTEMPTS):
        draw = rng.uniform(-span, span, size=(n_sites, 2))
        xi = draw[:, 0] + 1j * draw[:, 1]
        if np.min(np.abs(xi.imag)) < 1e-3 * abs(eta):
            continue
        candidate = ChainParams(n_sites=n_sites, eta=eta, xi=xi, margin=delta)
        if separation_deficit(candidate) >= delta:
            return candidate
    raise SamplingFailureError(
        f"could not draw {n_sites} separated inhomogeneities with margin {delta:.3e}"
    )


def fixture_params(n_sites: int) -> ChainParams:
    """Small real-parameter chains whose algebra works out in closed form.

    One site: eta = 1, xi = (0,).  Two sites: eta = 1, xi = (0, 2).
    These are the hand-checkable reference points used throughout the
    test suite.
    """
    if n_sites == 1:
        return ChainParams(n_sites=1, eta=1.0, xi=np.array([0.0]), margin=1.0)
    if n_sites == 2:
        return ChainParams(n_sites=2, eta=1.0, xi=np.array([0.0, 2.0]), margin=1.0)
    raise ValueError("closed-form fixtures exist for one and two sites only")


def a_of(params: ChainParams, lam):
    """Eigenvalue polynomial of the upper diagonal monodromy entry on the
    reference state: product of (lam - xi_n + eta)."""
    lam = np.asarray(lam, dtype=complex)
    return np.prod(lam[..., None] - params.xi + params.eta, axis=-1)


def d_of(params: ChainParams, lam):
    """Eigenvalue polynomial of the lower diagonal monodromy entry on the
    reference state: product of (lam - xi_n)."""
    lam = np.asarray(lam, dtype=complex)
    return np.prod(lam[..., None] - params.xi, axis=-1)


def a_site_split(params: ChainParams, site: int, lam):
    """Product of (lam - xi_j + eta) for j <= site times (lam - xi_j) beyond.

    ``site`` is 1-based; ``site == n_sites`` reduces to ``a_of``.
    """
    _check_site(params, site)
    lam = np.asarray(lam, dtype=complex)
    xi = params.xi
    left = np.prod(lam[..., None] - xi[:site] + params.eta, axis=-1)
    right = np.prod(lam[..., None] - xi[site:], axis=-1)
    return left * right


def d_site_split(params: ChainParams, site: int, lam):
    """Product of (lam - xi_j) for j <= site times (lam - xi_j + eta) beyond.

    ``site`` is 1-based; ``site == n_sites`` reduces to ``d_of``.
    """
    _check_site(params, site)
    lam = np.asarray(lam, dtype=complex)
    xi = params.xi
    left = np.prod(lam[..., None] - xi[:site], axis=-1)
    right = np.prod(lam[..., None] - xi[site:] + params.eta, axis=-1)
    return left * right


def _check_site(params: ChainParams, site: int) -> None:
    if not 1 <= site <= params.n_sites:
        raise ValueError(f"site index {site} outside 1..{params.n_sites}")


def log_derivative_a(params: ChainParams, lam) -> complex:
    """d/dlam log a(lam): sum of 1/(lam - xi_n + eta)."""
    lam = np.asarray(lam, dtype=complex)
    return np.sum(1.0 / (lam[..., None] - params.xi + params.eta), axis=-1)


def log_derivative_d(params: ChainParams, lam) -> complex:
    """d/dlam log d(lam): sum of 1/(lam - xi_n)."""
    lam = np.asarray(lam, dtype=complex)
    return np.sum(1.0 / (lam[..., None] - params.xi), axis=-1)


def vandermonde(values) -> complex:
    """Ordered Vandermonde product over pairs b < a of (v_a - v_b).

    Empty and singleton tuples give 1.  The ordering convention matters:
    all separated-basis weights in this package use the product in the
    natural site order of the argument.
    """
    values = np.asarray(values, dtype=complex).ravel()
    out = 1.0 + 0.0j
    for a in range(1, values.size):
        out *= np.prod(values[a] - values[:a])
    return complex(out)


def shifted_xi(params: ChainParams, h, direction: int = -1) -> np.ndarray:
    """The inhomogeneities with each occupied slot shifted by ``direction*eta``."""
    h = np.asarray(h)
    return params.xi + direction * params.eta * h


def vandermonde_shift_check(params: ChainParams, h) -> tuple[complex, complex]:
    """Both sides of the occupied-slot Vandermonde shift identity.

    For occupation pattern ``h`` the product over occupied slots n of
    prod_{m != n} (xi_n - xi_m + eta)/(xi_n - xi_m - eta), multiplied by
    the Vandermonde of the down-shifted set, equals the Vandermonde of
    the up-shifted set.  Returns (lhs, rhs) for the caller to compare.
    """
    h = np.asarray(h).ravel()
    if h.size != params.n_sites:
        raise ValueError("occupation pattern must have one entry per site")
    xi = params.xi
    eta = params.eta
    ratio = 1.0 + 0.0j
    for n in range(params.n_sites):
        if not h[n]:
            continue
        others = np.delete(xi, n)
        ratio *= np.prod((xi[n] - others + eta) / (xi[n] - others - eta))
    lhs = ratio * vandermonde(shifted_xi(params, h, direction=-1))
    rhs = vandermonde(shifted_xi(params, h, direction=+1))
    return complex(lhs), complex(rhs)


def params_to_json(params: ChainParams) -> dict:
    """JSON-ready description of a parameter set (floats as [re, im] pairs)."""
    return {
        "n_sites": params.n_sites,
        "eta": [params.eta.real, params.eta.imag],
        "xi": [[z.real, z.imag] for z in params.xi],
        "margin": params.margin,
    }


def params_from_json(data: dict) -> ChainParams:
    eta = complex(data["eta"][0], data["eta"][1])
    xi = np.array([complex(re, im) for re, im in data["xi"]], dtype=complex)
    return ChainParams(
        n_sites=int(data["n_sites"]), eta=eta, xi=xi, margin=float(data["margin"])
    )
