"""Exception types shared across the package.

Numerical routines in this package fail loudly rather than returning
garbage: clustered interpolation nodes, evaluation on top of a pole,
non-converging limits and off-shell inputs each get a dedicated error so
callers (and tests) can tell the failure modes apart.
"""

from __future__ import annotations


class DegenerateNodesError(ValueError):
    """Interpolation nodes too close to separate polynomial values."""


class PoleCollisionError(ValueError):
    """An evaluation point fell on (or numerically near) a pole."""


class SamplingFailureError(RuntimeError):
    """Rejection sampling could not produce a well-separated parameter set."""


class NotOnShellError(ValueError):
    """Roots passed to an on-shell determinant formula violate the Bethe system."""


class PairingError(RuntimeError):
    """Left/right eigenvector pairing or eigenvalue pairing failed."""


class LimitFailureError(RuntimeError):
    """Richardson extrapolation of a coinciding-point limit did not converge."""


class SpectrumError(RuntimeError):
    """The extracted transfer-matrix spectrum violates a structural property."""
