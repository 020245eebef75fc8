"""Schmidt decomposition of pure bipartite vectors via the coefficient matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sepeig.linalg import PureBipartiteState, _phase_fix

RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_q coefficients[q] * left_vectors[q] (x) right_vectors[q]``.

    ``coefficients`` are the non-negative singular values of the coefficient
    matrix in non-increasing order. Rows of ``right_vectors`` are
    phase-fixed (first non-negligible entry real and positive); rows of
    ``left_vectors`` absorb the compensating phase, so the sum reconstructs
    ``psi`` exactly rather than only up to a phase per term.
    """

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients > RANK_TOL))

    def reconstruct(self) -> np.ndarray:
        return np.einsum("q,qi,qj->ij", self.coefficients, self.left_vectors, self.right_vectors).reshape(-1)


def _svd(psi: PureBipartiteState):
    if not isinstance(psi, PureBipartiteState):
        raise TypeError(f"expected PureBipartiteState, got {type(psi).__name__}")
    m = psi.coefficient_matrix
    if not np.any(m):
        raise ValueError("null state")
    return np.linalg.svd(m, full_matrices=True)


def _fix_pairs(u: np.ndarray, vh: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Phase-fix the first ``k`` right vectors and push the phase onto the left ones."""
    left = u.T.copy()
    right = vh.copy()
    for q in range(right.shape[0]):
        fixed = _phase_fix(right[q].copy())
        nz = np.flatnonzero(np.abs(right[q]) > 1e-12)
        if q < k and nz.size:
            # fixed = right * phase  =>  left must carry conj(phase)
            phase = fixed[nz[0]] / right[q, nz[0]]
            left[q] = left[q] * phase.conjugate()
        right[q] = fixed
    for p in range(k, left.shape[0]):
        left[p] = _phase_fix(left[p].copy())
    return left, right


def schmidt(psi: PureBipartiteState) -> SchmidtDecomposition:
    """Singular-value route to the Schmidt form of ``psi``.

    Parameters
    ----------
    psi : PureBipartiteState
        Unit vector on ``H_A (x) H_B``.

    Returns
    -------
    SchmidtDecomposition
        ``min(d_a, d_b)`` terms; trailing coefficients may be zero. Under
        degenerate coefficients any orthonormal basis of the degenerate
        subspace is a valid answer.
    """
    u, s, vh = _svd(psi)
    k = s.shape[0]
    left, right = _fix_pairs(u, vh, k)
    return SchmidtDecomposition(s.copy(), left[:k], right[:k])


def full_local_bases(psi: PureBipartiteState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(coefficients, left_basis, right_basis)`` with complete local bases.

    ``left_basis`` has ``d_a`` rows and ``right_basis`` has ``d_b`` rows; the
    first ``min(d_a, d_b)`` rows of each form the Schmidt pairs.
    """
    u, s, vh = _svd(psi)
    left, right = _fix_pairs(u, vh, s.shape[0])
    return s.copy(), left, right


def schmidt_rank(psi: PureBipartiteState) -> int:
    """Number of Schmidt coefficients above ``1e-9``; 1 exactly for product states."""
    return schmidt(psi).rank
