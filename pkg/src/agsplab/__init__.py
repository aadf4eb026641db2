"""agsplab: a numerical laboratory for approximate ground-space projections
on gapped frustration-free spin chains.

The package builds small projector chains, diagonalizes them exactly, and
certifies — at desk scale — the operator machinery behind entanglement-area
bounds: layer projectors and their detectability-lemma shrink factor,
Chebyshev window polynomials, diluted projectors and their Schmidt-rank
growth, overlap amplification, explicit entropy and tail bounds,
coarse-graining, min-entangling counting arithmetic, parameter plans, and
matrix-product-state truncation.
"""

from . import (
    agsp,
    chebyshev,
    combinatorics,
    detectability,
    hamiltonian,
    mps,
    params,
    schmidt,
)

__version__ = "0.1.0"

__all__ = [
    "agsp",
    "chebyshev",
    "combinatorics",
    "detectability",
    "hamiltonian",
    "mps",
    "params",
    "schmidt",
    "__version__",
]
