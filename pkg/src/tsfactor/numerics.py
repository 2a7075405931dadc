"""Dense linear algebra used throughout the package.

Everything here is a pure function of its arguments. Eigenvectors come back
with a fixed sign convention so that estimated loadings are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NonFinite, NonSquare, NotSymmetric, ShapeMismatch, SingularGram


@dataclass(frozen=True)
class SymEigen:
    """Eigen-decomposition of a real symmetric matrix.

    ``values`` are sorted in descending order and ``vectors[:, j]`` is the
    unit eigenvector paired with ``values[j]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)
        self.vectors.setflags(write=False)


def orient_columns(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each is >= 0.

    Ties on magnitude go to the lowest row index.
    """
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _check_square_finite(S: np.ndarray, name: str = "matrix") -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonFinite(f"{name} has non-finite entries")
    return S


def sym_eig(S, clamp_negative: bool = False) -> SymEigen:
    """Full eigen-decomposition of a symmetric matrix.

    Parameters
    ----------
    S : (n, n) array_like
        Symmetric matrix. It is symmetrized as ``(S + S.T) / 2`` first.
    clamp_negative : bool
        Replace negative eigenvalues by 0. Use only for matrices that are
        positive semidefinite by construction, where negatives are roundoff.

    Returns
    -------
    SymEigen
        Eigenvalues in descending order; each eigenvector oriented so its
        largest-magnitude entry is nonnegative.
    """
    S = _check_square_finite(S)
    scale = np.max(np.abs(S), initial=0.0)
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-8 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-8 relative")
    S = 0.5 * (S + S.T)
    values, vectors = np.linalg.eigh(S)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = orient_columns(vectors[:, order])
    if clamp_negative:
        values = np.maximum(values, 0.0)
    return SymEigen(values=np.ascontiguousarray(values), vectors=np.ascontiguousarray(vectors))


def solve_gram(G, B, ridge: float = 0.0) -> np.ndarray:
    """Solve ``(G + ridge * I) X = B`` for symmetric positive definite ``G``.

    Uses a Cholesky factorization. Raises :class:`SingularGram` when a pivot
    (squared diagonal of the Cholesky factor) drops below
    ``1e-12 * (trace(G) / m + ridge)``, or when the factorization fails.
    """
    G = _check_square_finite(G, "Gram matrix")
    B = np.asarray(B, dtype=float)
    vector_rhs = B.ndim == 1
    if vector_rhs:
        B = B[:, None]
    if B.ndim != 2 or B.shape[0] != G.shape[0]:
        raise ShapeMismatch(f"right-hand side has shape {B.shape}, Gram is {G.shape}")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    m = G.shape[0]
    H = 0.5 * (G + G.T) + ridge * np.eye(m)
    threshold = 1e-12 * (np.trace(G) / m + ridge)
    try:
        factor, lower = linalg.cho_factor(H, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularGram("Gram matrix is not positive definite (collinear regressors?)") from exc
    pivots = np.diag(factor) ** 2
    if pivots.min() <= threshold:
        raise SingularGram(
            f"smallest Cholesky pivot {pivots.min():.3e} below {threshold:.3e} "
            "(collinear regressors?)"
        )
    X = linalg.cho_solve((factor, lower), B, check_finite=False)
    return X[:, 0] if vector_rhs else X


def orthonormalize(B) -> np.ndarray:
    """Orthonormal basis (thin QR) for the column space of ``B``.

    Columns are oriented with the same sign rule as :func:`sym_eig`.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    q, r = np.linalg.qr(B, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise ShapeMismatch("columns are linearly dependent; cannot orthonormalize")
    return orient_columns(q)


def is_half_orthogonal(H, tol: float = 1e-6) -> bool:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[1] > H.shape[0]:
        return False
    gram = H.T @ H
    return bool(np.max(np.abs(gram - np.eye(H.shape[1])), initial=0.0) <= tol)
