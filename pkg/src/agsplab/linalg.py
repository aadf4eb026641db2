"""Dense linear-algebra helpers shared across the package.

Everything here operates on explicit numpy arrays for chains whose full
Hilbert space fits in memory (the configurable cap is enforced by the model
builders, not here).  Operators built from real models are kept in float64
to halve memory and matmul cost; complex inputs stay complex.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dagger",
    "embed_pair_term",
    "embed_window_term",
    "operator_norm",
    "frobenius_norm",
    "as_working_dtype",
    "matmul_chain",
    "kernel_projector",
    "range_projector",
    "fix_phase",
]


def dagger(a):
    return a.conj().T


ITERATIVE_NORM_DIM = 3500


def operator_norm(a) -> float:
    """Spectral norm (largest singular value).

    Dense SVD up to ITERATIVE_NORM_DIM, Lanczos (ARPACK) beyond: at the
    6561-dimensional top of our range a full SVD costs minutes while the
    leading singular value needs only a few dozen matvecs.
    """
    if min(a.shape) <= ITERATIVE_NORM_DIM:
        return float(np.linalg.norm(a, 2))
    return top_singular_value(a)


def top_singular_value(a) -> float:
    from scipy.sparse.linalg import svds

    return float(svds(a, k=1, return_singular_vectors=False, tol=0)[0])


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(a))


def as_working_dtype(*arrays):
    """Downcast to float64 when every input has exactly zero imaginary part.

    Returns the arrays (views where possible) plus the common dtype.  Real
    models dominate this package; running their matmuls in float64 is ~4x
    cheaper than complex128 and bit-compatible for the checks we do.
    """
    if all(not np.iscomplexobj(a) or not a.imag.any() for a in arrays):
        out = tuple(a.real if np.iscomplexobj(a) else a for a in arrays)
        return (*out, np.float64)
    out = tuple(a.astype(np.complex128, copy=False) for a in arrays)
    return (*out, np.complex128)


def embed_pair_term(op, bond: int, n: int, d: int):
    """Embed a two-site operator acting on particles (bond, bond+1), 1-based.

    The operator must be d^2 x d^2; the result is d^n x d^n.
    """
    dim_left = d ** (bond - 1)
    dim_right = d ** (n - bond - 1)
    out = op
    if dim_left > 1:
        out = np.kron(np.eye(dim_left, dtype=op.dtype), out)
    if dim_right > 1:
        out = np.kron(out, np.eye(dim_right, dtype=op.dtype))
    return out


def embed_window_term(op, first_site: int, width: int, n: int, d: int):
    """Embed an operator on `width` consecutive particles starting at
    `first_site` (1-based) into the full chain."""
    dim_left = d ** (first_site - 1)
    dim_right = d ** (n - first_site - width + 1)
    out = op
    if dim_left > 1:
        out = np.kron(np.eye(dim_left, dtype=op.dtype), out)
    if dim_right > 1:
        out = np.kron(out, np.eye(dim_right, dtype=op.dtype))
    return out


def matmul_chain(mats):
    """Left-to-right product of a nonempty list of square matrices."""
    mats = list(mats)
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


def kernel_projector(a, tol: float = 1e-10):
    """Projector onto the kernel of a Hermitian PSD matrix.

    Eigenvalues below ``tol * max(eigenvalue, 1)`` count as zero.
    """
    vals, vecs = np.linalg.eigh(a)
    scale = max(float(vals[-1]), 1.0)
    null = vecs[:, vals < tol * scale]
    return null @ dagger(null), null.shape[1]


def range_projector(vectors, tol: float = 1e-10):
    """Projector onto the span of the given column vectors (d x k array)."""
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], vectors.shape[0]), dtype=vectors.dtype)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    keep = u[:, s > tol * s[0]]
    return keep @ dagger(keep)


def fix_phase(v):
    """Deterministic global phase: largest-magnitude entry made real positive."""
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)
