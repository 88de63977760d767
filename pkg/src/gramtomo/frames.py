"""Finite-frame machinery: dual frames, operator frames, linear inversion.

The effect vectors {|y_i>} form a frame for the Gram support; the
canonical dual frame |y~_i> = G^+ |y_i> reconstructs any vector in the
span through psi = sum_i <y~_i|psi> |y_i>. In operator space the frame
operator S(A) = sum_i Tr(Pi_i A) Pi_i plays the same role: its
pseudo-inverse yields dual effects Pi~_i = S^(-1)(Pi_i) and the linear
inversion estimate rho = sum_i p_i Pi~_i, which is Hermitian but NOT
positivity-constrained. Operator-space computations are vectorized over an
orthonormal Hermitian basis (identity plus generalized Gell-Mann), turning
S into a real-symmetric d^2 x d^2 matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyMeasurementError, InvalidInputError, NumericalConsistencyError
from .povm import (GramAnalysis, PovmSet, gram_matrix_operator_space,
                   gram_matrix_state_space)


class PartialInversionWarning(UserWarning):
    """Linear inversion over a rank-deficient operator frame.

    The result is the projection onto the operator-space support; the
    instance carries the support projector (in vectorized coordinates) as
    the attribute support_projector.
    """

    def __init__(self, message: str, support_projector: np.ndarray):
        super().__init__(message)
        self.support_projector = support_projector


@dataclass(frozen=True)
class DualFrame:
    """Canonical dual vectors |y~_i> = G^+ |y_i| on the Gram support."""

    vectors: np.ndarray
    support_rank: int
    threshold: float


@dataclass(eq=False)
class OperatorFrame:
    """Vectorized operator frame of a rank-1 POVM.

    coefficients[i, a] = Tr(Pi_i B_a) over the orthonormal Hermitian basis
    B_a; s_matrix = coefficients^T coefficients represents S; the N x N
    matrix coefficients coefficients^T equals the operator-space Gram
    matrix Q, which is the vectorization cross-check used in tests.
    """

    basis: np.ndarray
    coefficients: np.ndarray
    s_matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    threshold: float
    dual_effects: np.ndarray


@lru_cache(maxsize=16)
def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal Hermitian basis: identity, diagonal traceless, off-diagonal pairs.

    Tr(B_a B_b) = delta_ab; every Hermitian matrix has real coordinates in
    this basis.
    """
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    mats = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for k in range(1, dim):
        v = np.zeros(dim)
        v[:k] = 1.0
        v[k] = -float(k)
        mats.append(np.diag(v.astype(complex)) / np.sqrt(k * (k + 1)))
    for m in range(dim):
        for n in range(m + 1, dim):
            E = np.zeros((dim, dim), dtype=complex)
            E[m, n] = 1.0
            mats.append((E + E.T) / np.sqrt(2.0))
            mats.append((1j * E - 1j * E.T) / np.sqrt(2.0))
    out = np.array(mats)
    out.setflags(write=False)
    return out


def dual_frame(povm: PovmSet, analysis: GramAnalysis) -> DualFrame:
    """Dual vectors through the pseudo-inverse of the Gram operator."""
    if analysis.rank == 0:
        raise EmptyMeasurementError("Gram operator has zero support")
    Us = analysis.support_vectors
    ws = analysis.support_eigenvalues
    duals = (povm.vectors @ Us.conj() / ws) @ Us.T
    return DualFrame(vectors=duals, support_rank=analysis.rank,
                     threshold=analysis.threshold)


def frame_reconstruct(psi: np.ndarray, povm: PovmSet, dual: DualFrame) -> np.ndarray:
    """sum_i <y~_i|psi> |y_i>, the projection of psi onto the frame span."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (povm.dim,):
        raise InvalidInputError("state dimension does not match the POVM")
    coeff = dual.vectors.conj() @ psi
    return povm.vectors.T @ coeff


def operator_frame_apply(A: np.ndarray, povm: PovmSet) -> np.ndarray:
    """S(A) = sum_i <y_i|A|y_i> |y_i><y_i|."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (povm.dim, povm.dim):
        raise InvalidInputError("operator dimension does not match the POVM")
    Y = povm.vectors
    vals = np.einsum("ij,ij->i", Y.conj() @ A, Y)
    return (vals[:, None] * Y).T @ Y.conj()


def operator_frame(povm: PovmSet, threshold: float = 1e-12) -> OperatorFrame:
    """Build the vectorized operator frame with its pseudo-inverse data.

    threshold is relative to the largest S eigenvalue, matching the
    state-space support convention.
    """
    B = hermitian_basis(povm.dim)
    Y = povm.vectors
    # T[i, a] = <y_i|B_a|y_i>, real because both factors are Hermitian
    T = np.empty((povm.n_outcomes, B.shape[0]))
    for a in range(B.shape[0]):
        T[:, a] = np.einsum("ij,ij->i", Y.conj() @ B[a], Y).real
    S = T.T @ T
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    tau = threshold * max(vals[0], 0.0)
    rank = int(np.sum(vals > tau))
    V = vecs[:, :rank]
    # dual effects in vectorized coordinates: rows of S^+ T^T
    dual_coords = (V / vals[:rank]) @ (V.T @ T.T)
    return OperatorFrame(basis=B, coefficients=T, s_matrix=S, eigenvalues=vals,
                         eigenvectors=vecs, rank=rank, threshold=tau,
                         dual_effects=dual_coords.T)


def dual_effect(frame: OperatorFrame, index: int) -> np.ndarray:
    """The dual effect Pi~_i = S^(-1)(Pi_i) as a Hermitian matrix."""
    return np.einsum("a,amn->mn", frame.dual_effects[index], frame.basis)


def linear_inversion(probabilities: np.ndarray, povm: PovmSet,
                     frame: OperatorFrame | None = None) -> np.ndarray:
    """rho = sum_i p_i Pi~_i, Hermitian but deliberately not PSD-constrained.

    When the operator frame is rank-deficient the result is the projection
    of the true operator onto the support; a PartialInversionWarning
    carrying the support projector is emitted.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (povm.n_outcomes,):
        raise InvalidInputError("probability vector length does not match the POVM")
    if frame is None:
        frame = operator_frame(povm)
    d_sq = frame.basis.shape[0]
    if frame.rank < d_sq:
        V = frame.eigenvectors[:, : frame.rank]
        warnings.warn(PartialInversionWarning(
            f"operator frame rank {frame.rank} < {d_sq}: inversion recovers "
            "only the support component", V @ V.T), stacklevel=2)
    coords = frame.dual_effects.T @ p
    rho = np.einsum("a,amn->mn", coords, frame.basis)
    return 0.5 * (rho + rho.conj().T)


def clip_to_physical(rho: np.ndarray) -> np.ndarray:
    """Optional post-processor: clip negative eigenvalues and renormalize.

    Off by default everywhere; linear inversion keeps its raw output so the
    contrast with the positivity-preserving solver stays visible.
    """
    rho = np.asarray(rho, dtype=complex)
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise InvalidInputError("operator has no positive part")
    return (vecs * (vals / total)) @ vecs.conj().T


def hadamard_identity_check(povm: PovmSet) -> float:
    """max |Q - G o G*| entrywise, comparing the two Gram-matrix routes."""
    Gm = gram_matrix_state_space(povm)
    Q = gram_matrix_operator_space(povm)
    return float(np.abs(Q - Gm * Gm.conj()).max())


def modal_weighting(rho: np.ndarray, analysis: GramAnalysis) -> tuple[np.ndarray, np.ndarray]:
    """Modal coefficients rho~ = U^H rho U and their Gram-weighted form.

    Returns (rho~, weighted) with weighted_kl = lambda_k lambda_l rho~_kl;
    the weighted matrix is checked against U^H (G rho G) U within 1e-9,
    the congruence identity that shows how weakly measured modes are
    suppressed quadratically.
    """
    rho = np.asarray(rho, dtype=complex)
    U = analysis.eigenvectors
    lam = analysis.eigenvalues
    if rho.shape != (U.shape[0], U.shape[0]):
        raise InvalidInputError("operator dimension does not match the analysis")
    rho_modes = U.conj().T @ rho @ U
    weighted = np.outer(lam, lam) * rho_modes
    G = (U * lam) @ U.conj().T
    check = U.conj().T @ (G @ rho @ G) @ U
    dev = float(np.abs(weighted - check).max())
    if dev > 1e-9:
        raise NumericalConsistencyError(
            f"modal weighting congruence deviates by {dev:.3e} (> 1e-9)")
    return rho_modes, weighted
