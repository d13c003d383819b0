"""Separation-of-variables toolkit for the antiperiodic spin-1/2 XXX chain.

The package builds the quantum inverse scattering objects of a finite
inhomogeneous XXX chain closed by a spin-flip twist, constructs the
separated (quantum-determinant) basis, extracts the transfer-matrix
spectrum through a discrete T-Q system, and evaluates scalar products,
norms and local form factors in determinant form.  Every formula is
cross-checked against an exact dense tensor-product representation,
which is cheap for the short chains (up to eight sites) this package
targets.
"""

from __future__ import annotations

__version__ = "0.1.0"
