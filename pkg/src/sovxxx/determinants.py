"""Determinant building blocks: dressed Vandermonde functionals and the
domain-wall / scalar-product determinants built from them.

The objects here are plain functions of point sets; no dense vectors
appear.  The central structure is a determinant of the form
``det[x_a^(b-1) - f(x_a) (x_a +- eta)^(b-1)] / V(x)``, a Vandermonde
dressed by per-point weight values, together with the two-pole kernel
determinants (Izergin and Slavnov types) that reduce to it.  Weight
functions always enter as value lists evaluated by the caller, never as
callbacks, so the identities can be tested point set by point set.

Entries of the Slavnov-type matrices have removable singularities when
a column point collides with an on-shell row point; those entries are
evaluated through their closed-form limits, which is what makes norms
(coinciding point sets) directly computable.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainParams, a_of, d_of, vandermonde
from .errors import LimitFailureError, NotOnShellError, PoleCollisionError

# relative pole guard used throughout
_POLE_TOL = 1e-8
# below this relative separation two points are treated as intentionally
# equal and limit formulas are used
_COINCIDE_TOL = 1e-12


def _scale_of(*arrays) -> float:
    vals = [1.0]
    for arr in arrays:
        arr = np.asarray(arr)
        if arr.size:
            vals.append(float(np.max(np.abs(arr))))
    return max(vals)


def two_pole_kernel(x: complex, eta: complex, mu: complex = 1.0) -> complex:
    """The kernel mu/x - 1/(x + eta); for mu = 1 this is
    eta/(x (x + eta))."""
    return mu / x - 1.0 / (x + eta)


def shift_ratio(points, eta: complex, y: complex, sign: int) -> complex:
    """Product over the set of (y - x + sign*eta)/(y - x); empty set gives 1.

    Evaluation on top of a set point is a pole and raises
    ``PoleCollisionError``.
    """
    points = np.asarray(points, dtype=complex).ravel()
    if points.size == 0:
        return 1.0 + 0.0j
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    scale = _scale_of(points, [eta, y])
    diffs = y - points
    if np.min(np.abs(diffs)) < _POLE_TOL * scale:
        raise PoleCollisionError("shift-ratio product evaluated on a set point")
    return complex(np.prod((diffs + sign * eta) / diffs))


def balanced_shift_ratio(points, eta: complex, y: complex) -> complex:
    """Product over the set of (y - x + eta)/(y - x - eta).

    This is the pole-cancelled ratio of the two shift-ratio products; it
    stays regular on the set itself, where the self factor contributes
    -1.
    """
    points = np.asarray(points, dtype=complex).ravel()
    if points.size == 0:
        return 1.0 + 0.0j
    scale = _scale_of(points, [eta, y])
    down = y - points - eta
    if np.min(np.abs(down)) < _POLE_TOL * scale:
        raise PoleCollisionError("balanced shift ratio evaluated on a shifted point")
    return complex(np.prod((y - points + eta) / down))


def dressed_vandermonde(points, eta: complex, f_values, sign: int) -> complex:
    """det[x_a^(b-1) - f(x_a) (x_a + sign*eta)^(b-1)] / V(x).

    ``f_values`` lists the weight at each point.  The empty set gives 1;
    identically zero weights give 1 for any set.
    """
    points = np.asarray(points, dtype=complex).ravel()
    f_values = np.asarray(f_values, dtype=complex).ravel()
    if points.size != f_values.size:
        raise ValueError("need exactly one weight value per point")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    m = points.size
    if m == 0:
        return 1.0 + 0.0j
    # factoring the plain power matrix out of the determinant leaves
    # det(I - diag(f) G) with G holding Lagrange cardinal values at the
    # shifted points; every entry is a product of point differences, so
    # no high powers or Vandermonde quotients are ever formed
    shifted = points + sign * eta
    num = shifted[:, None] - points[None, :]
    den = points[:, None] - points[None, :]
    if m > 1 and np.min(np.abs(den + np.eye(m))) == 0:
        raise PoleCollisionError("dressed Vandermonde over coinciding points")
    gmat = np.empty((m, m), dtype=complex)
    for b in range(m):
        keep = np.arange(m) != b
        gmat[:, b] = np.prod(num[:, keep], axis=1) / np.prod(den[b, keep])
    return complex(np.linalg.det(np.eye(m) - f_values[:, None] * gmat))


def izergin_determinant(mu: complex, xs, ys, eta: complex) -> complex:
    """Two-pole-kernel determinant over equal-size point sets.

    Product of all (x_a - y_b + eta) over the Vandermonde of the x set
    and the reversed-order Vandermonde of the y set, times
    det[mu/(x_a - y_b) - 1/(x_a - y_b + eta)].
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys = np.asarray(ys, dtype=complex).ravel()
    if xs.size != ys.size:
        raise ValueError("the two point sets must have equal size")
    n = xs.size
    if n == 0:
        return 1.0 + 0.0j
    scale = _scale_of(xs, ys, [eta])
    diffs = xs[:, None] - ys[None, :]
    if np.min(np.abs(diffs)) < _POLE_TOL * scale:
        raise PoleCollisionError("kernel pole: point sets overlap")
    if np.min(np.abs(diffs + eta)) < _POLE_TOL * scale:
        raise PoleCollisionError("kernel pole: point sets overlap after shift")
    kernel = mu / diffs - 1.0 / (diffs + eta)
    pref = complex(np.prod(diffs + eta))
    denom = vandermonde(xs) * vandermonde(ys[::-1])
    if denom == 0:
        raise PoleCollisionError("Vandermonde degenerates: coinciding points")
    return complex(pref * np.linalg.det(kernel) / denom)


def izergin_determinant_clustered(mu: complex, xs, ys, eta: complex) -> complex:
    """Two-pole-kernel determinant, stable when the second set clusters.

    Same value as ``izergin_determinant``, evaluated through the
    divided-difference factorization in the second point set.  Both pole
    families of the kernel have closed-form divided differences (inverse
    products over the cluster points), so the Vandermonde of the second
    set cancels algebraically instead of numerically and the evaluation
    keeps full precision even when those points nearly coincide — the
    regime where the plain determinant loses one Vandermonde order of
    accuracy per cluster point.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys = np.asarray(ys, dtype=complex).ravel()
    if xs.size != ys.size:
        raise ValueError("the two point sets must have equal size")
    n = xs.size
    if n == 0:
        return 1.0 + 0.0j
    scale = _scale_of(xs, ys, [eta])
    diffs = xs[:, None] - ys[None, :]
    if np.min(np.abs(diffs)) < _POLE_TOL * scale:
        raise PoleCollisionError("kernel pole: point sets overlap")
    if np.min(np.abs(diffs + eta)) < _POLE_TOL * scale:
        raise PoleCollisionError("kernel pole: point sets overlap after shift")
    # column k holds the order-k divided difference over ys[:k+1]
    plain = np.cumprod(diffs, axis=1)
    shifted = np.cumprod(diffs + eta, axis=1)
    dd = mu / plain - 1.0 / shifted
    pref = complex(np.prod(diffs + eta))
    sign = (-1.0) ** (n * (n - 1) // 2)
    denom = vandermonde(xs)
    if denom == 0:
        raise PoleCollisionError("Vandermonde degenerates: coinciding points")
    return complex(sign * pref * np.linalg.det(dd) / denom)


def mu_bethe_residuals(params: ChainParams, mu: complex, roots) -> np.ndarray:
    """Per-root residuals of the twist-mu Bethe system
    mu a(x)/d(x) = - prod (x - x_m + eta)/(x - x_m - eta) (self factor -1)."""
    roots = np.asarray(roots, dtype=complex).ravel()
    if roots.size == 0:
        return np.zeros(0)
    res = np.zeros(roots.size)
    scale = _scale_of(roots, params.xi, [params.eta])
    for m, x in enumerate(roots):
        if np.min(np.abs(x - params.xi)) < _POLE_TOL * scale:
            raise PoleCollisionError("Bethe root collides with an inhomogeneity")
        lhs = mu * a_of(params, x) / d_of(params, x)
        rhs = -balanced_shift_ratio(roots, params.eta, x)
        res[m] = abs(lhs / rhs - 1.0)
    return res


def _require_on_shell(params: ChainParams, mu: complex, xs, tol: float = 1e-7) -> None:
    res = mu_bethe_residuals(params, mu, xs)
    if res.size and np.max(res) > tol:
        raise NotOnShellError(
            f"row points violate the twist-{mu} Bethe system "
            f"(worst residual {np.max(res):.3e})"
        )


def _slavnov_entry(
    params: ChainParams, mu: complex, xs, x_j: complex, y_k: complex
) -> complex:
    """One Slavnov-matrix entry, with the removable singularity at
    y_k -> x_j evaluated in closed form.

    Generic entry: mu E+(y_k; xi) t(x_j - y_k) - rho(y_k) t(y_k - x_j),
    with rho the balanced shift ratio over the row set.  On shell the
    two pole terms cancel as y_k approaches x_j, leaving
    -g'(x_j) - rho'(x_j) - 2 g(x_j)/eta with g = mu E+(.; xi).
    """
    eta = params.eta
    scale = _scale_of(xs, params.xi, [eta, x_j, y_k])
    u = y_k - x_j
    if abs(u) >= _POLE_TOL * scale:
        g = mu * shift_ratio(params.xi, eta, y_k, +1)
        rho = balanced_shift_ratio(xs, eta, y_k)
        return g * two_pole_kernel(x_j - y_k, eta) - rho * two_pole_kernel(
            y_k - x_j, eta
        )
    if abs(u) > _COINCIDE_TOL * scale:
        raise PoleCollisionError(
            "column point ambiguously close to a row point "
            "(neither separated nor coincident)"
        )
    g = mu * shift_ratio(params.xi, eta, x_j, +1)
    g_prime = g * complex(
        np.sum(1.0 / (x_j - params.xi + eta) - 1.0 / (x_j - params.xi))
    )
    rho = balanced_shift_ratio(xs, eta, x_j)
    xs_arr = np.asarray(xs, dtype=complex).ravel()
    rho_prime = rho * complex(
        np.sum(1.0 / (x_j - xs_arr + eta) - 1.0 / (x_j - xs_arr - eta))
    )
    return -g_prime - rho_prime - 2.0 * g / eta


def slavnov_determinant(params: ChainParams, mu: complex, xs, ys) -> complex:
    """On-shell scalar-product determinant over equal-size point sets.

    Rows are indexed by the on-shell set, columns by the free set.  Row
    points must satisfy the twist-mu Bethe system; coinciding row and
    column points are handled through the closed-form limit entries, so
    the fully coinciding case (a norm) works directly.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys = np.asarray(ys, dtype=complex).ravel()
    if xs.size != ys.size:
        raise ValueError("the two point sets must have equal size")
    m = xs.size
    if m == 0:
        return 1.0 + 0.0j
    _require_on_shell(params, mu, xs)
    eta = params.eta
    mat = np.zeros((m, m), dtype=complex)
    for j in range(m):
        for k in range(m):
            mat[j, k] = _slavnov_entry(params, mu, xs, xs[j], ys[k])
    pref = complex(np.prod(xs[:, None] - ys[None, :] + eta))
    denom = vandermonde(xs) * vandermonde(ys[::-1])
    if denom == 0:
        raise PoleCollisionError("Vandermonde degenerates: coinciding points")
    return complex(pref * np.linalg.det(mat) / denom)


def gen_slavnov_determinant(params: ChainParams, mu: complex, xs, ys) -> complex:
    """Rectangular extension of the on-shell determinant.

    The free set may exceed the on-shell set by ``s`` points; the matrix
    gains ``s`` rows of moment type: mu E+(y_k; xi) y_k^(p) minus the
    balanced shift ratio times (y_k + eta)^(p) for p = 0..s-1.  With
    equal sizes this reduces exactly to ``slavnov_determinant``.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys = np.asarray(ys, dtype=complex).ravel()
    m = xs.size
    s = ys.size - m
    if s < 0:
        raise ValueError("the free set cannot be smaller than the on-shell set")
    if s == 0:
        return slavnov_determinant(params, mu, xs, ys)
    if ys.size == 0:
        return 1.0 + 0.0j
    _require_on_shell(params, mu, xs)
    eta = params.eta
    size = m + s
    mat = np.zeros((size, size), dtype=complex)
    for j in range(m):
        for k in range(size):
            mat[j, k] = _slavnov_entry(params, mu, xs, xs[j], ys[k])
    for j in range(m, size):
        p = j - m
        for k in range(size):
            g = mu * shift_ratio(params.xi, eta, ys[k], +1)
            rho = balanced_shift_ratio(xs, eta, ys[k])
            mat[j, k] = g * ys[k] ** p - rho * (ys[k] + eta) ** p
    if m:
        pref = complex(np.prod(xs[:, None] - ys[None, :] + eta))
    else:
        pref = 1.0 + 0.0j
    denom = vandermonde(xs) * vandermonde(ys[::-1])
    if denom == 0:
        raise PoleCollisionError("Vandermonde degenerates: coinciding points")
    return complex(pref * np.linalg.det(mat) / denom)


def gen_slavnov_sign(m: int, s: int) -> int:
    """Sign relating the rectangular determinant to the corresponding
    dressed Vandermonde functional: (-1)^m * (-1)^(s(s+1)/2)."""
    return (-1) ** (m + (s * (s + 1)) // 2)


def lattice_column_determinant(
    params: ChainParams, mu: complex, xs, ys_free, site: int
) -> complex:
    """Limit of d(y) times the rectangular on-shell determinant as one
    free point y approaches the lattice node of ``site``.

    Appending a lattice node to the free set makes one column of the
    rectangular determinant blow up (the dressing has a pole there)
    while the accompanying d-product vanishes; the product of the two
    has a finite limit.  This evaluates that limit directly: the node's
    column is replaced by its pole residue -- two-pole-kernel entries
    against the on-shell rows, bare node powers in the moment rows --
    and the whole thing is scaled by mu times the eta-shifted lattice
    product at the node.  The remaining free points may still coincide
    with on-shell rows; those entries go through the usual closed-form
    limits.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys_free = np.asarray(ys_free, dtype=complex).ravel()
    if not 1 <= site <= params.n_sites:
        raise ValueError("site index out of range")
    node = params.xi[site - 1]
    ys = np.concatenate([ys_free, [node]])
    m = xs.size
    s = ys.size - m
    if s < 0:
        raise ValueError("the free set cannot be smaller than the on-shell set")
    if m:
        _require_on_shell(params, mu, xs)
    eta = params.eta
    size = ys.size
    mat = np.zeros((size, size), dtype=complex)
    for j in range(m):
        for k in range(size - 1):
            mat[j, k] = _slavnov_entry(params, mu, xs, xs[j], ys[k])
        mat[j, size - 1] = two_pole_kernel(xs[j] - node, eta)
    for j in range(m, size):
        p = j - m
        for k in range(size - 1):
            g = mu * shift_ratio(params.xi, eta, ys[k], +1)
            rho = balanced_shift_ratio(xs, eta, ys[k])
            mat[j, k] = g * ys[k] ** p - rho * (ys[k] + eta) ** p
        mat[j, size - 1] = node**p
    pref = complex(np.prod(xs[:, None] - ys[None, :] + eta)) if m else 1.0 + 0.0j
    denom = vandermonde(xs) * vandermonde(ys[::-1])
    if denom == 0:
        raise PoleCollisionError(
            "lattice-column determinant over coinciding points"
        )
    residue = complex(np.prod(node - params.xi + eta))
    return complex(mu * residue * pref * np.linalg.det(mat) / denom)


def dressed_vandermonde_unbalanced_check(
    mu: complex, xs, ys, eta: complex
) -> tuple[complex, complex]:
    """Both sides of the unequal-size functional relation.

    lhs: the plus functional over the y set weighted by mu times the
    minus shift-ratio product of the x set; rhs: (1 - mu)^(|y| - |x|)
    times the minus functional over the x set weighted by mu times the
    plus shift-ratio product of the y set.  Callers compare the two.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    ys = np.asarray(ys, dtype=complex).ravel()
    f_on_y = np.array([mu * shift_ratio(xs, eta, y, -1) for y in ys])
    lhs = dressed_vandermonde(ys, eta, f_on_y, +1)
    f_on_x = np.array([mu * shift_ratio(ys, eta, x, +1) for x in xs])
    rhs_core = dressed_vandermonde(xs, eta, f_on_x, -1)
    power = ys.size - xs.size
    if power < 0 and mu == 1.0:
        raise ValueError("the shrinking direction needs a twist different from 1")
    rhs = (1.0 - mu) ** power * rhs_core
    return complex(lhs), complex(rhs)


def richardson_limit(evaluator, schedule=None) -> tuple[complex, float]:
    """Polynomial extrapolation of ``evaluator(eps)`` to eps = 0.

    Neville's scheme on a geometric schedule; returns the extrapolated
    value and an error estimate (the size of the final correction).
    Corrections that grow instead of shrinking raise
    ``LimitFailureError``.
    """
    if schedule is None:
        schedule = [1e-2 * 0.5**k for k in range(6)]
    schedule = np.asarray(schedule, dtype=float)
    if schedule.size < 2:
        raise ValueError("extrapolation needs at least two scale points")
    vals = np.array([evaluator(float(e)) for e in schedule], dtype=complex)
    table = vals.copy()
    best = table[-1]
    corrections = []
    for level in range(1, schedule.size):
        new = np.zeros(schedule.size - level, dtype=complex)
        for i in range(new.size):
            e0, e1 = schedule[i], schedule[i + level]
            new[i] = (e0 * table[i + 1] - e1 * table[i]) / (e0 - e1)
        corrections.append(abs(new[-1] - best))
        best = new[-1]
        table = new
    rounding_floor = 1e-14 * (abs(best) + 1.0)
    if (
        len(corrections) >= 2
        and corrections[-1] > rounding_floor
        and corrections[-1] > 10.0 * (corrections[0] + 1e-300)
    ):
        raise LimitFailureError(
            "extrapolation corrections grew instead of converging"
        )
    return complex(best), float(corrections[-1])
