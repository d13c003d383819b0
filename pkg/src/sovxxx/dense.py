"""Exact dense tensor-product representation of the twisted chain.

Everything downstream is validated against this module: it builds the
rational 4x4 two-spin scattering matrix, multiplies it into the 2x2
auxiliary-space monodromy whose entries act on the full 2^N quantum
space, forms the spin-flip-twisted transfer matrix (off-diagonal entry
sum) and its companion twisted by the diagonal Pauli matrix, and
diagonalizes the former with biorthogonal left/right eigenvector pairs.
Dense linear algebra keeps every object explicit; the intended regime
is at most eight sites.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainParams, a_of, d_of
from .errors import PairingError

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
# Rotation mapping the x Pauli matrix to the z one by conjugation.
U_ROTATION = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2.0)
for _m in (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS, U_ROTATION):
    _m.setflags(write=False)

_ENTRY_INDEX = {"A": (0, 0), "B": (0, 1), "C": (1, 0), "D": (1, 1)}


def build_r_matrix(lam: complex, eta: complex) -> np.ndarray:
    """The rational two-spin scattering matrix on a pair of spaces.

    Acts on (auxiliary tensor local); equals lam times the identity plus
    eta times the permutation operator.
    """
    lam = complex(lam)
    eta = complex(eta)
    return np.array(
        [
            [lam + eta, 0, 0, 0],
            [0, lam, eta, 0],
            [0, eta, lam, 0],
            [0, 0, 0, lam + eta],
        ],
        dtype=complex,
    )


def _r_local_blocks(mu: complex, eta: complex) -> list[list[np.ndarray]]:
    """2x2 auxiliary-space blocks of the scattering matrix, each a local
    2x2 operator: block[i][j] = mu*delta_ij*Id + eta*E_ji."""
    blocks = [[None, None], [None, None]]
    for i in range(2):
        for j in range(2):
            blk = mu * IDENTITY_2.copy() if i == j else np.zeros((2, 2), dtype=complex)
            blk = np.array(blk, dtype=complex)
            blk[j, i] += eta
            blocks[i][j] = blk
    return blocks


def site_operator(n_sites: int, site: int, local: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator at a 1-based site; site 1 is the first factor."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site index {site} outside 1..{n_sites}")
    op = np.ones((1, 1), dtype=complex)
    for n in range(1, n_sites + 1):
        op = np.kron(op, local if n == site else IDENTITY_2)
    return op


def monodromy(params: ChainParams, lam: complex) -> list[list[np.ndarray]]:
    """The 2x2 auxiliary-space monodromy, entries acting on the chain.

    Ordered product of site scattering matrices with the highest site
    leftmost, built one site at a time so the cost stays linear in the
    chain length times the dense dimension.
    Returns ``[[A, B], [C, D]]``.
    """
    blocks = [
        [np.eye(1, dtype=complex) * (1 if i == j else 0) for j in range(2)]
        for i in range(2)
    ]
    for n in range(params.n_sites):
        r = _r_local_blocks(lam - params.xi[n], params.eta)
        dim = blocks[0][0].shape[0] * 2
        new = [[np.zeros((dim, dim), dtype=complex) for _ in range(2)] for _ in range(2)]
        for i in range(2):
            for k in range(2):
                for j in range(2):
                    new[i][k] += np.kron(blocks[j][k], r[i][j])
        blocks = new
    return blocks


def monodromy_with_derivative(
    params: ChainParams, lam: complex
) -> tuple[list[list[np.ndarray]], list[list[np.ndarray]]]:
    """Monodromy blocks together with their derivatives in the spectral
    parameter, via the product rule applied factor by factor."""
    blocks = [
        [np.eye(1, dtype=complex) * (1 if i == j else 0) for j in range(2)]
        for i in range(2)
    ]
    dblocks = [[np.zeros((1, 1), dtype=complex) for _ in range(2)] for _ in range(2)]
    for n in range(params.n_sites):
        r = _r_local_blocks(lam - params.xi[n], params.eta)
        dim = blocks[0][0].shape[0] * 2
        new = [[np.zeros((dim, dim), dtype=complex) for _ in range(2)] for _ in range(2)]
        dnew = [[np.zeros((dim, dim), dtype=complex) for _ in range(2)] for _ in range(2)]
        for i in range(2):
            for k in range(2):
                for j in range(2):
                    new[i][k] += np.kron(blocks[j][k], r[i][j])
                    dnew[i][k] += np.kron(dblocks[j][k], r[i][j])
                    if i == j:
                        # derivative of the scattering factor is the identity block
                        dnew[i][k] += np.kron(blocks[j][k], IDENTITY_2)
        blocks, dblocks = new, dnew
    return blocks, dblocks


def monodromy_entry(params: ChainParams, which: str, lam: complex) -> np.ndarray:
    """One monodromy entry, ``which`` in {"A", "B", "C", "D"}."""
    try:
        i, j = _ENTRY_INDEX[which]
    except KeyError:
        raise ValueError('monodromy entry must be one of "A", "B", "C", "D"') from None
    return monodromy(params, lam)[i][j]


def transfer_antiperiodic(params: ChainParams, lam: complex) -> np.ndarray:
    """Spin-flip-twisted transfer matrix: sum of off-diagonal entries."""
    blocks = monodromy(params, lam)
    return blocks[0][1] + blocks[1][0]


def transfer_twisted(params: ChainParams, lam: complex) -> np.ndarray:
    """Companion transfer matrix twisted by the diagonal Pauli matrix:
    difference of diagonal entries."""
    blocks = monodromy(params, lam)
    return blocks[0][0] - blocks[1][1]


def transfer_with_derivative(
    params: ChainParams, lam: complex
) -> tuple[np.ndarray, np.ndarray]:
    blocks, dblocks = monodromy_with_derivative(params, lam)
    return blocks[0][1] + blocks[1][0], dblocks[0][1] + dblocks[1][0]


def reference_state(params: ChainParams) -> np.ndarray:
    """All spins up."""
    vec = np.zeros(params.dim, dtype=complex)
    vec[0] = 1.0
    return vec


def flipped_reference_state(params: ChainParams) -> np.ndarray:
    """All spins down."""
    vec = np.zeros(params.dim, dtype=complex)
    vec[-1] = 1.0
    return vec


def quantum_det_check(params: ChainParams, lam: complex) -> float:
    """Relative residual of the quantum determinant identity.

    The combination B(lam) C(lam-eta) - A(lam) D(lam-eta) must be
    proportional to the identity with factor -a(lam) d(lam-eta).
    """
    top = monodromy(params, lam)
    bot = monodromy(params, lam - params.eta)
    lhs = top[0][1] @ bot[1][0] - top[0][0] @ bot[1][1]
    target = -a_of(params, lam) * d_of(params, lam - params.eta)
    res = lhs - target * np.eye(params.dim)
    scale = max(
        np.linalg.norm(top[0][1] @ bot[1][0]),
        np.linalg.norm(top[0][0] @ bot[1][1]),
        abs(target),
        1e-300,
    )
    return float(np.linalg.norm(res) / scale)


def total_sx(params: ChainParams) -> np.ndarray:
    """Sum over sites of the x Pauli matrix: the conserved magnetization
    direction of the twisted chain."""
    out = np.zeros((params.dim, params.dim), dtype=complex)
    for n in range(1, params.n_sites + 1):
        out += site_operator(params.n_sites, n, SIGMA_X)
    return out


def global_flip(params: ChainParams) -> np.ndarray:
    """Product over sites of the x Pauli matrix (an involution)."""
    out = np.ones((1, 1), dtype=complex)
    for _ in range(params.n_sites):
        out = np.kron(out, SIGMA_X)
    return out


def basis_rotation(params: ChainParams) -> np.ndarray:
    """Sitewise rotation conjugating the antiperiodic transfer matrix into
    its diagonally twisted companion."""
    out = np.ones((1, 1), dtype=complex)
    for _ in range(params.n_sites):
        out = np.kron(out, U_ROTATION)
    return out


def site_sigma(params: ChainParams, site: int, kind: str) -> np.ndarray:
    """Local Pauli/ladder operator at a 1-based site.

    ``kind`` is one of "x", "y", "z", "+", "-".
    """
    local = {
        "x": SIGMA_X,
        "y": SIGMA_Y,
        "z": SIGMA_Z,
        "+": SIGMA_PLUS,
        "-": SIGMA_MINUS,
    }[kind]
    return site_operator(params.n_sites, site, local)


def global_operators(params: ChainParams) -> dict[str, np.ndarray]:
    """The conserved and symmetry operators used by the checks."""
    return {
        "total_sx": total_sx(params),
        "global_flip": global_flip(params),
        "basis_rotation": basis_rotation(params),
    }


_LAM0_DIRECTIONS = (
    0.37 + 0.41j,
    -0.29 + 0.53j,
    0.61 - 0.47j,
    -0.55 - 0.39j,
    0.13 + 0.71j,
    0.47 + 0.19j,
)


def default_eval_point(params: ChainParams, index: int = 0) -> complex:
    """Deterministic generic evaluation points away from the spectrum of
    inhomogeneities, scaled to the parameter spread."""
    center = complex(np.mean(params.xi))
    spread = max(1.0, float(np.max(np.abs(params.xi - center))) + abs(params.eta))
    return center + spread * _LAM0_DIRECTIONS[index % len(_LAM0_DIRECTIONS)]


def diagonalize_transfer(
    params: ChainParams, lam0: complex | None = None
) -> list[tuple[complex, np.ndarray, np.ndarray]]:
    """Eigenvalues of the antiperiodic transfer matrix at one point, with
    biorthogonal right and left eigenvectors.

    The transfer matrix family commutes with itself, so a single generic
    evaluation point determines the common eigenvectors.  Left rows come
    from the inverse of the right eigenvector matrix, which makes the
    pairing biorthonormal by construction.  A near-degenerate spectrum
    at the chosen point triggers a retry at the next deterministic
    candidate; running out of candidates raises ``PairingError``.
    """
    candidates = (
        [lam0]
        if lam0 is not None
        else [default_eval_point(params, i) for i in range(len(_LAM0_DIRECTIONS))]
    )
    last_gap = np.inf
    for cand in candidates:
        tmat = transfer_antiperiodic(params, cand)
        vals, right = np.linalg.eig(tmat)
        scale = float(np.max(np.abs(vals)))
        diff = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(diff, np.inf)
        last_gap = float(np.min(diff))
        if last_gap < 1e-6 * scale:
            continue
        left = np.linalg.inv(right)
        resid = np.linalg.norm(tmat @ right - right * vals[None, :])
        if resid > 1e-9 * np.linalg.norm(tmat) * np.sqrt(params.dim):
            continue
        order = np.lexsort((vals.imag, vals.real))
        return [(complex(vals[i]), right[:, i].copy(), left[i, :].copy()) for i in order]
    raise PairingError(
        "transfer spectrum stayed near-degenerate at every candidate point "
        f"(last gap {last_gap:.3e})"
    )


def hamiltonian_pauli(n_sites: int) -> np.ndarray:
    """Nearest-neighbour Heisenberg Hamiltonian closed by a spin flip.

    Sum over bonds of the three Pauli exchange terms minus one, with the
    site past the end identified with the first site conjugated by its
    own x Pauli matrix.
    """
    if n_sites < 1:
        raise ValueError("a chain needs at least one site")
    dim = 2**n_sites
    ham = np.zeros((dim, dim), dtype=complex)
    for n in range(1, n_sites + 1):
        for local in (SIGMA_X, SIGMA_Y, SIGMA_Z):
            left = site_operator(n_sites, n, local)
            if n < n_sites:
                right = site_operator(n_sites, n + 1, local)
            else:
                right = site_operator(n_sites, 1, SIGMA_X @ local @ SIGMA_X)
            ham += left @ right
        ham -= np.eye(dim)
    return ham


def hamiltonian_from_transfer(params: ChainParams) -> np.ndarray:
    """Logarithmic derivative of the antiperiodic transfer matrix at the
    origin, normalized to the Pauli Hamiltonian convention:
    2 eta T(0)^{-1} T'(0) - 2 N."""
    tmat, dtmat = transfer_with_derivative(params, 0.0)
    return 2.0 * params.eta * np.linalg.solve(tmat, dtmat) - 2.0 * params.n_sites * np.eye(
        params.dim
    )


def hamiltonian_limit_check(n_sites: int, eps: float) -> float:
    """Relative deviation between the Pauli Hamiltonian and the transfer
    logarithmic derivative for the near-homogeneous family xi_n = eps*n.

    At eps = 0 the two agree exactly; for small eps the deviation decays
    linearly.  This is the one place a fully homogeneous parameter set is
    meaningful, so no separation condition is enforced here.
    """
    xi = eps * np.arange(1, n_sites + 1, dtype=float)
    params = ChainParams(n_sites=n_sites, eta=1.0, xi=xi, margin=0.0)
    h_pauli = hamiltonian_pauli(n_sites)
    h_transfer = hamiltonian_from_transfer(params)
    dev = np.linalg.norm(h_transfer - h_pauli)
    return float(dev / max(1.0, np.linalg.norm(h_pauli)))
