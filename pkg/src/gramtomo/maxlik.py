"""Normalized maximum-likelihood reconstruction by diluted fixed-point iteration.

The estimator maximizes the conditional log-likelihood

    log L = sum_i n_i log(p_i / sum_k p_k),      p_i = <y_i|rho|y_i>,

whose stationarity condition is the extremal equation R(rho) rho = G rho
with R(rho) = sum_i (f_i/p_i) |y_i><y_i| and G = sum_i |y_i><y_i|. The
measurement is first rescaled by G^(-1/2) on its support, which makes the
effect set exactly complete there; in rescaled coordinates the iteration

    sigma <- normalize(R~ sigma R~),   R~ = (1 - eps) I + eps R'(sigma)

preserves positivity by congruence and has the extremal equation as its
fixed point. eps = 1 is tried first and halved (persistently, floor 1/64)
whenever a step would decrease the likelihood, which keeps the recorded
likelihood trace non-decreasing on every dataset.

The recorded log-likelihood is per unit count, sum_i f_i log p_i with
sum_k p_k = 1 enforced by the rescaling. On raw-count scale (~1e5 counts)
float64 rounding alone would exceed the per-step monotonicity tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataError, EmptyMeasurementError, InvalidInputError
from .povm import Effect, GramAnalysis, PovmSet, gram_operator, gram_spectrum


@dataclass(frozen=True)
class Dataset:
    """Observed counts per POVM outcome, with derived relative frequencies.

    Counts may be real-valued pseudo-counts (exact-probability data), not
    only integers.
    """

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 1 or counts.size == 0:
            raise EmptyDataError("counts must be a non-empty 1-d array")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise InvalidInputError("counts must be finite and non-negative")
        if counts.sum() <= 0:
            raise EmptyDataError("dataset carries no counts")
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for maxlik_solve.

    subspace, when set, is a (dim, d) matrix of orthonormal columns (e.g.
    top-d Gram eigenvectors or the first d Fock states); the measurement is
    projected onto it and the result embedded back into the ambient space.
    Convergence requires BOTH the likelihood increment and the Born
    residual to fall below their tolerances; the iteration cap ends the run
    either way (converged=False).
    """

    dilution: float = 1.0
    dilution_floor: float = 1.0 / 64.0
    probability_floor: float = 1e-14
    max_iterations: int = 20000
    tol_likelihood: float = 1e-10
    tol_born: float = 1e-7
    subspace: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.dilution <= 1.0:
            raise InvalidInputError("dilution must lie in (0, 1]")
        if not 0.0 < self.dilution_floor <= self.dilution:
            raise InvalidInputError("dilution floor must lie in (0, dilution]")
        if self.probability_floor <= 0:
            raise InvalidInputError("probability floor must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("max iterations must be >= 1")


@dataclass(frozen=True)
class RescaledPovm:
    """Effect vectors rescaled by G^(-1/2), restricted to the G-support.

    vectors rows are the rescaled kets y'_i; their effects sum exactly to
    the identity on the support. embed maps a rescaled-space state sigma
    back to the original coordinates as embed @ sigma @ embed^H, which is
    G^(-1/2) sigma G^(-1/2) up to the final trace normalization.
    """

    vectors: np.ndarray
    support_isometry: np.ndarray
    support_eigenvalues: np.ndarray

    @property
    def support_dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def embed(self) -> np.ndarray:
        return self.support_isometry / np.sqrt(self.support_eigenvalues)


@dataclass(frozen=True)
class ReconstructionResult:
    """Converged (or capped) reconstruction with its diagnostics."""

    rho: np.ndarray
    log_likelihood: np.ndarray
    iterations: int
    born_residual: float
    extremal_residual: float
    converged: bool


def expected_probabilities(rho: np.ndarray, povm: PovmSet) -> np.ndarray:
    """Born-rule outcome probabilities p_i = <y_i|rho|y_i>, clamped at 0.

    Not normalized: for incomplete POVMs sum p_i = Tr(rho G) < Tr(rho).
    """
    rho = np.asarray(rho, dtype=complex)
    Y = povm.vectors
    if rho.shape != (povm.dim, povm.dim):
        raise InvalidInputError("state dimension does not match the POVM")
    p = np.einsum("im,mn,in->i", Y.conj(), rho, Y).real
    return np.maximum(p, 0.0)


def log_likelihood(rho: np.ndarray, dataset: Dataset, povm: PovmSet) -> float:
    """Conditional log-likelihood sum_i n_i log(p_i / sum_k p_k).

    Invariant under rho -> c rho for c > 0 (the ratio form). Outcomes with
    n_i = 0 contribute nothing; an observed outcome with zero probability
    returns -inf with a RuntimeWarning rather than raising.
    """
    if dataset.counts.size != povm.n_outcomes:
        raise InvalidInputError("dataset length does not match POVM outcome count")
    p = expected_probabilities(rho, povm)
    total = p.sum()
    if total <= 0:
        raise InvalidInputError("state assigns zero probability to every outcome")
    n = dataset.counts
    mask = n > 0
    if np.any(p[mask] <= 0):
        warnings.warn("observed outcome has zero probability; log-likelihood is -inf",
                      RuntimeWarning, stacklevel=2)
        return float("-inf")
    return float(np.sum(n[mask] * np.log(p[mask] / total)))


def r_operator(rho: np.ndarray, dataset: Dataset, povm: PovmSet,
               probability_floor: float = 1e-14) -> np.ndarray:
    """R(rho) = sum_i (f_i/p_i) |y_i><y_i| over outcomes with f_i > 0."""
    Y = povm.vectors
    if dataset.counts.size != povm.n_outcomes:
        raise InvalidInputError("dataset length does not match POVM outcome count")
    f = dataset.frequencies
    p = np.einsum("im,mn,in->i", Y.conj(), np.asarray(rho, dtype=complex), Y).real
    mask = f > 0
    floor = probability_floor * max(p.max(), 0.0)
    w = np.zeros_like(f)
    w[mask] = f[mask] / np.maximum(p[mask], floor)
    R = np.einsum("i,im,in->mn", w, Y, Y.conj())
    return 0.5 * (R + R.conj().T)


def rescale_to_support(povm: PovmSet, analysis: GramAnalysis) -> RescaledPovm:
    """Rescale effect vectors by G^(-1/2) restricted to the numerical support."""
    if analysis.rank == 0:
        raise EmptyMeasurementError("Gram operator has zero support")
    Us = analysis.support_vectors
    ws = analysis.support_eigenvalues
    Y = povm.vectors
    vectors = np.ascontiguousarray((Y @ Us.conj()) / np.sqrt(ws))
    return RescaledPovm(vectors=vectors, support_isometry=Us, support_eigenvalues=ws)


def restrict_to_subspace(povm: PovmSet, basis: np.ndarray) -> PovmSet:
    """Project every effect vector onto an orthonormal subspace basis.

    basis has shape (dim, d) with orthonormal columns; the returned POVM
    lives in dimension d, with vectors V^H y_i, and its Gram operator
    equals V^H G V.
    """
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != povm.dim:
        raise InvalidInputError("basis must be (ambient dim, d)")
    d = basis.shape[1]
    if np.abs(basis.conj().T @ basis - np.eye(d)).max() > 1e-10:
        raise InvalidInputError("basis columns must be orthonormal")
    projected = povm.vectors @ basis.conj()
    effects = tuple(
        Effect(vector=projected[i], phase_index=e.phase_index, bin_index=e.bin_index,
               bin_center=e.bin_center, bin_width=e.bin_width)
        for i, e in enumerate(povm.effects)
    )
    return PovmSet(effects=effects, dim=d)


def born_residual(rho: np.ndarray, dataset: Dataset, povm: PovmSet) -> float:
    """max_i |p_i / sum_k p_k - f_i|, the fixed-point Born-rule mismatch."""
    Y = povm.vectors
    p = np.einsum("im,mn,in->i", Y.conj(), np.asarray(rho, dtype=complex), Y).real
    total = p.sum()
    if total <= 0:
        raise InvalidInputError("state assigns zero probability to every outcome")
    return float(np.abs(p / total - dataset.frequencies).max())


def extremal_residual(rho: np.ndarray, dataset: Dataset, povm: PovmSet) -> float:
    """max-entry |R(rho~) rho~ - G rho~| in the gauge where sum_k p_k = 1.

    Stationarity of the conditional likelihood holds at the scaling
    rho~ = rho / Tr(G rho); at any other scale the residual is O(1) even at
    the exact optimum.
    """
    rho = np.asarray(rho, dtype=complex)
    G = gram_operator(povm)
    scale = np.trace(G @ rho).real
    if scale <= 0:
        raise InvalidInputError("state assigns zero probability to every outcome")
    rho_g = rho / scale
    R = r_operator(rho_g, dataset, povm)
    return float(np.abs(R @ rho_g - G @ rho_g).max())


def _iterate(Yp: np.ndarray, f: np.ndarray, config: SolverConfig):
    """Diluted R sigma R iteration in rescaled coordinates."""
    n_out, r = Yp.shape
    Ypc = Yp.conj()
    mask = f > 0
    fm = f[mask]
    Ym = np.ascontiguousarray(Yp[mask])
    Ymc = np.ascontiguousarray(Ypc[mask])
    eye = np.eye(r, dtype=complex)

    sigma = eye / r
    p = np.einsum("ij,ij->i", Ypc @ sigma, Yp).real
    floor_hits = 0

    def log_likelihood(pvec):
        return float(fm @ np.log(pvec))

    def floored(pvec):
        nonlocal floor_hits
        lim = config.probability_floor * pvec.max()
        pm = pvec[mask]
        low = pm < lim
        if low.any():
            floor_hits += int(low.sum())
            pm = np.maximum(pm, lim)
        return pm

    ll = log_likelihood(floored(p))
    trace = [ll]
    eps = config.dilution
    born = float(np.abs(p - f).max())
    converged = False
    iterations = 0

    for _ in range(config.max_iterations):
        w = fm / floored(p)
        R = (Ym * w[:, None]).T @ Ymc
        R = 0.5 * (R + R.conj().T)
        while True:
            R_tilde = eps * R + (1.0 - eps) * eye
            cand = R_tilde @ sigma @ R_tilde
            cand = 0.5 * (cand + cand.conj().T)
            cand /= np.trace(cand).real
            p_cand = np.einsum("ij,ij->i", Ypc @ cand, Yp).real
            ll_cand = log_likelihood(floored(p_cand))
            if ll_cand >= ll - 1e-12 or eps <= config.dilution_floor:
                break
            eps = max(eps / 2.0, config.dilution_floor)
        if ll_cand < ll - 1e-12:
            # even the floor dilution decreases the likelihood: keep the
            # last good iterate rather than record a falling trace
            break
        iterations += 1
        inc = ll_cand - ll
        sigma, p, ll = cand, p_cand, ll_cand
        trace.append(ll)
        born = float(np.abs(p - f).max())
        if inc < config.tol_likelihood and born < config.tol_born:
            converged = True
            break

    if floor_hits:
        warnings.warn(
            f"probability floor engaged {floor_hits} time(s): some observed "
            "outcomes are nominally impossible under the truncated model",
            RuntimeWarning, stacklevel=3)
    return sigma, np.array(trace), iterations, born, converged


def maxlik_solve(dataset: Dataset, povm: PovmSet,
                 config: SolverConfig | None = None) -> ReconstructionResult:
    """Maximum-likelihood reconstruction from counts.

    Parameters
    ----------
    dataset : Dataset
        Counts aligned with the POVM outcome order.
    povm : PovmSet
        The measurement; rescaled internally to its Gram support.
    config : SolverConfig, optional
        Iteration controls; defaults per SolverConfig.

    Returns
    -------
    ReconstructionResult
        rho is PSD with unit trace, embedded in the ambient basis when a
        subspace was requested. converged=False (never an exception) marks
        runs ended by the iteration cap.
    """
    if config is None:
        config = SolverConfig()
    if dataset.counts.size != povm.n_outcomes:
        raise InvalidInputError(
            f"dataset has {dataset.counts.size} entries, POVM has {povm.n_outcomes}")

    solve_povm = povm
    basis = None
    if config.subspace is not None:
        basis = np.asarray(config.subspace, dtype=complex)
        solve_povm = restrict_to_subspace(povm, basis)

    analysis = gram_spectrum(gram_operator(solve_povm))
    rescaled = rescale_to_support(solve_povm, analysis)
    f = dataset.frequencies

    sigma, trace, iterations, born, converged = _iterate(rescaled.vectors, f, config)

    M = rescaled.embed
    rho_sub = M @ sigma @ M.conj().T
    rho_sub = 0.5 * (rho_sub + rho_sub.conj().T)
    # the embedded state is G^(-1/2) sigma G^(-1/2): already in the gauge
    # where the outcome probabilities sum to 1; record the residual there
    resid = extremal_residual(rho_sub, dataset, solve_povm)
    rho_sub /= np.trace(rho_sub).real
    if basis is not None:
        rho = basis @ rho_sub @ basis.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    else:
        rho = rho_sub

    return ReconstructionResult(rho=rho, log_likelihood=trace, iterations=iterations,
                                born_residual=born, extremal_residual=resid,
                                converged=converged)
