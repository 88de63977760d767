"""Homodyne measurement model and Gram-structure analysis.

A binned homodyne measurement at local-oscillator phase theta and bin
center x_b is modeled by the rank-1 effect Pi = |y><y| with

    |y> = sqrt(dx) * (<x_b,theta|n>)*_{n<dim},

a midpoint-rule discretization of the binned quadrature projector. The
rank-1 form keeps the correspondence between the Gram operator
G = sum_i Pi_i, the N x N Gram matrix <y_i|y_j>, and the operator-space
Gram matrix |<y_i|y_j>|^2 exact; the discretization error is a documented,
testable quantity rather than a hidden model ingredient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInputError
from .fock import hermite_functions


@dataclass(frozen=True)
class HomodyneConfig:
    """Phases, bin count per phase, and quadrature range of the measurement."""

    phases: tuple[float, ...]
    bins: int
    x_range: tuple[float, float]

    def __post_init__(self):
        if len(self.phases) == 0:
            raise InvalidInputError("at least one phase is required")
        ph = np.asarray(self.phases, dtype=float)
        if not np.all(np.isfinite(ph)):
            raise InvalidInputError("phases must be finite")
        if np.any(ph < 0.0) or np.any(ph >= np.pi):
            raise InvalidInputError("phases must lie in [0, pi)")
        if np.any(np.diff(ph) <= 0.0):
            raise InvalidInputError("phases must be strictly increasing")
        if self.bins < 1:
            raise InvalidInputError("bin count must be >= 1")
        lo, hi = self.x_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise InvalidInputError("quadrature range must be a finite increasing interval")

    @classmethod
    def uniform(cls, phase_count: int = 6, bins: int = 51,
                x_range: tuple[float, float] = (-5.0, 5.0)) -> "HomodyneConfig":
        """Phases j*pi/count for j = 0..count-1, uniform over [0, pi)."""
        if phase_count < 1:
            raise InvalidInputError("phase count must be >= 1")
        phases = tuple(j * np.pi / phase_count for j in range(phase_count))
        return cls(phases=phases, bins=bins, x_range=x_range)

    @property
    def bin_width(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.bins

    @property
    def bin_centers(self) -> np.ndarray:
        lo = self.x_range[0]
        return lo + (np.arange(self.bins) + 0.5) * self.bin_width


@dataclass(frozen=True)
class Effect:
    """One rank-1 POVM effect |y><y| with its outcome metadata."""

    vector: np.ndarray
    phase_index: int | None = None
    bin_index: int | None = None
    bin_center: float | None = None
    bin_width: float | None = None

    def __post_init__(self):
        if self.bin_width is not None and self.bin_width <= 0:
            raise InvalidInputError("bin width must be positive")


@dataclass(eq=False)
class PovmSet:
    """Ordered collection of rank-1 effects sharing one ambient dimension."""

    effects: tuple[Effect, ...]
    dim: int

    def __post_init__(self):
        if len(self.effects) == 0:
            raise InvalidInputError("POVM must contain at least one effect")
        for e in self.effects:
            if e.vector.shape != (self.dim,):
                raise InvalidInputError("all effects must share the ambient dimension")

    @classmethod
    def from_vectors(cls, vectors: np.ndarray) -> "PovmSet":
        """Wrap an (N, dim) array of effect vectors without outcome metadata."""
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim != 2:
            raise InvalidInputError("expected a 2-d array of effect vectors")
        effects = tuple(Effect(vector=v) for v in vectors)
        return cls(effects=effects, dim=vectors.shape[1])

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    @cached_property
    def vectors(self) -> np.ndarray:
        """All effect vectors stacked as an (N, dim) array of ket components."""
        return np.array([e.vector for e in self.effects])


@dataclass(frozen=True)
class GramAnalysis:
    """Descending eigendecomposition of a Hermitian PSD operator.

    eigenvalues are sorted descending with sub-threshold negatives clamped
    to 0; eigenvectors are the matching orthonormal columns with the phase
    convention that each column's first significant component is
    real-positive, so repeated runs produce identical bases.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    threshold: float

    @property
    def support_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[: self.rank]

    @property
    def support_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.rank]


def build_homodyne_povm(config: HomodyneConfig, dim: int) -> PovmSet:
    """Assemble the binned homodyne POVM, outcome order phase-major, bin-minor.

    Parameters
    ----------
    config : HomodyneConfig
        Phases, bins per phase, quadrature range.
    dim : int
        Ambient Fock-space dimension (cutoff + 1).

    Returns
    -------
    PovmSet with len(phases) * bins effects.
    """
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    psi = hermite_functions(config.bin_centers, dim - 1)  # (dim, bins)
    root_dx = np.sqrt(config.bin_width)
    n = np.arange(dim)
    effects = []
    for j, theta in enumerate(config.phases):
        # conjugate of <x_theta|n> = e^{-i n theta} psi_n(x)
        phase = np.exp(1j * n * theta)
        for b in range(config.bins):
            vec = root_dx * phase * psi[:, b]
            effects.append(Effect(vector=vec, phase_index=j, bin_index=b,
                                  bin_center=float(config.bin_centers[b]),
                                  bin_width=config.bin_width))
    return PovmSet(effects=tuple(effects), dim=dim)


def gram_operator(povm: PovmSet) -> np.ndarray:
    """Gram operator G = sum_i |y_i><y_i| on the ambient space."""
    Y = povm.vectors
    G = np.einsum("im,in->mn", Y, Y.conj())
    return 0.5 * (G + G.conj().T)


def gram_spectrum(G: np.ndarray, threshold: float = 1e-12) -> GramAnalysis:
    """Full descending eigendecomposition with a relative support threshold.

    threshold is relative: tau = threshold * lambda_max. Eigenvalues below
    tau are reported but counted out of support, with negative rounding
    noise clamped to 0.
    """
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidInputError("Gram operator must be square")
    if np.abs(G - G.conj().T).max() > 1e-10:
        raise InvalidInputError("Gram operator must be Hermitian within 1e-10")
    vals, vecs = np.linalg.eigh(G)
    # stable descending order: exact ties keep their LAPACK (ascending-pass)
    # positions, so degenerate spectra reproduce the natural basis order
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    tau = threshold * max(vals[0], 0.0)
    below = vals < tau
    vals[below] = np.maximum(vals[below], 0.0)
    # deterministic eigenvector phases: first significant component real-positive
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = np.argmax(np.abs(col) > 1e-8)
        ref = col[idx]
        if abs(ref) > 0:
            vecs[:, k] = col * (ref.conj() / abs(ref))
    rank = int(np.sum(vals > tau))
    return GramAnalysis(eigenvalues=vals, eigenvectors=vecs, rank=rank, threshold=tau)


def gram_matrix_state_space(povm: PovmSet) -> np.ndarray:
    """N x N Gram matrix G_ij = <y_i|y_j>; shares its nonzero spectrum with G."""
    Y = povm.vectors
    return Y.conj() @ Y.T


def gram_matrix_operator_space(povm: PovmSet) -> np.ndarray:
    """Operator-space Gram matrix Q_ij = |<y_i|y_j>|^2 = Tr(Pi_i Pi_j)."""
    return np.abs(gram_matrix_state_space(povm)) ** 2


def effective_rank(analysis: GramAnalysis, drop_ratio: float = 1e-3) -> int:
    """Count of eigenvalues within drop_ratio of the largest.

    This is the looser, statistical bandwidth (reliably resolved modes),
    distinct from the numerical support rank in the analysis.
    """
    if not 0.0 < drop_ratio < 1.0:
        raise InvalidInputError("drop ratio must lie in (0, 1)")
    vals = analysis.eigenvalues
    if vals.size == 0:
        raise InvalidInputError("empty spectrum")
    return int(np.sum(vals >= drop_ratio * vals[0]))
