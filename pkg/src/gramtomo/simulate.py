"""Synthetic measurement data and the sweep/stability experiment harness.

Randomness comes from counter-based Philox streams: trial t of a study
seeded with s draws from Generator(Philox(SeedSequence((s, t)))). Streams
are independent by construction, so trials may run in any order or in
parallel without reordering draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataError, InvalidInputError
from .fock import PhaseSpaceGrid, fidelity, pure_density, wigner
from .maxlik import (Dataset, ReconstructionResult, SolverConfig,
                     expected_probabilities, maxlik_solve)
from .povm import PovmSet, gram_operator, gram_spectrum

NOISE_KINDS = ("exact", "multinomial", "poisson")


@dataclass(frozen=True)
class NoiseModel:
    """Counting statistics for synthetic data.

    exposure is the expected TOTAL count over all outcomes (multinomial:
    exact total; poisson: mean total; exact: multiplier on the raw
    outcome probabilities).
    """

    kind: str = "poisson"
    exposure: float = 100000.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidInputError(f"noise kind must be one of {NOISE_KINDS}")
        if self.kind != "exact" and self.exposure <= 0:
            raise InvalidInputError("exposure must be positive for stochastic noise")


@dataclass(frozen=True)
class SweepResult:
    """Fidelity-versus-dimension sweep for one basis kind."""

    basis: str
    dims: tuple[int, ...]
    trials: int
    fidelities: np.ndarray
    converged: np.ndarray
    trial_seeds: tuple[tuple[int, int], ...]

    @property
    def mean(self) -> np.ndarray:
        return self.fidelities.mean(axis=1)

    @property
    def minimum(self) -> np.ndarray:
        return self.fidelities.min(axis=1)

    @property
    def maximum(self) -> np.ndarray:
        return self.fidelities.max(axis=1)

    @property
    def std(self) -> np.ndarray:
        return self.fidelities.std(axis=1)


@dataclass(frozen=True)
class StabilityResult:
    """Repeated reconstructions at one dimension, with their Wigner grids."""

    basis: str
    dim: int
    trials: int
    fidelities: np.ndarray
    converged: np.ndarray
    spread: float
    wigner_grids: tuple[np.ndarray, ...]
    grid: PhaseSpaceGrid
    trial_seeds: tuple[tuple[int, int], ...]


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """The Philox stream owned by one trial index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, trial))))


def generate_counts(rho_true: np.ndarray, povm: PovmSet, noise: NoiseModel,
                    trial: int = 0) -> Dataset:
    """Synthesize one dataset under the given noise model.

    exact: real-valued pseudo-counts exposure * p_i; multinomial: one draw
    of size exposure over the normalized probabilities; poisson:
    independent Poisson(exposure * p_i / sum p). Deterministic given
    (seed, trial).
    """
    p = expected_probabilities(rho_true, povm)
    total = p.sum()
    if total <= 0:
        raise EmptyDataError("state assigns zero probability to every outcome")
    if noise.kind == "exact":
        counts = noise.exposure * p
    elif noise.kind == "multinomial":
        rng = trial_generator(noise.seed, trial)
        counts = rng.multinomial(int(round(noise.exposure)), p / total).astype(float)
    else:
        rng = trial_generator(noise.seed, trial)
        counts = rng.poisson(noise.exposure * p / total).astype(float)
    return Dataset(counts=counts)


def _basis_columns(kind: str, d: int, povm: PovmSet) -> np.ndarray:
    if kind == "gram":
        analysis = gram_spectrum(gram_operator(povm))
        if d > analysis.eigenvectors.shape[1]:
            raise InvalidInputError(f"requested {d} Gram modes of a dim-{povm.dim} space")
        return analysis.eigenvectors[:, :d]
    if kind == "fock":
        if d > povm.dim:
            raise InvalidInputError(f"requested {d} Fock states of a dim-{povm.dim} space")
        return np.eye(povm.dim, dtype=complex)[:, :d]
    raise InvalidInputError("basis kind must be 'gram' or 'fock'")


def _solver_with_subspace(config: SolverConfig | None, basis: np.ndarray) -> SolverConfig:
    base = config if config is not None else SolverConfig()
    return SolverConfig(dilution=base.dilution, dilution_floor=base.dilution_floor,
                        probability_floor=base.probability_floor,
                        max_iterations=base.max_iterations,
                        tol_likelihood=base.tol_likelihood, tol_born=base.tol_born,
                        subspace=basis)


def dimension_sweep(target: np.ndarray, povm: PovmSet, basis_kind: str,
                    dims: list[int] | tuple[int, ...], noise: NoiseModel, trials: int,
                    solver_config: SolverConfig | None = None) -> SweepResult:
    """Reconstruction fidelity versus subspace dimension.

    For each dimension d the reconstruction runs in the span of the top-d
    Gram eigenvectors (basis_kind='gram') or the first d Fock states
    ('fock'). Trials differ only in the noise stream; the same per-trial
    dataset is reused across dimensions. Non-converged runs are recorded
    with converged=False, never raised.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0 or min(dims) < 1 or max(dims) > povm.dim:
        raise InvalidInputError("dims must be within the ambient dimension")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    rho_true = pure_density(target)
    datasets = [generate_counts(rho_true, povm, noise, trial=t) for t in range(trials)]
    fidelities = np.zeros((len(dims), trials))
    converged = np.zeros((len(dims), trials), dtype=bool)
    for k, d in enumerate(dims):
        basis = _basis_columns(basis_kind, d, povm)
        config = _solver_with_subspace(solver_config, basis)
        for t in range(trials):
            result = maxlik_solve(datasets[t], povm, config)
            fidelities[k, t] = fidelity(target, result.rho)
            converged[k, t] = result.converged
    seeds = tuple((noise.seed, t) for t in range(trials))
    return SweepResult(basis=basis_kind, dims=dims, trials=trials,
                       fidelities=fidelities, converged=converged, trial_seeds=seeds)


def stability_study(target: np.ndarray, povm: PovmSet, basis_kind: str, d: int,
                    noise: NoiseModel, trials: int,
                    grid: PhaseSpaceGrid | None = None,
                    solver_config: SolverConfig | None = None) -> StabilityResult:
    """Repeated reconstructions at fixed dimension, with Wigner grids.

    The instability metric is the standard deviation of fidelity across
    trials; the per-trial Wigner grids support visual comparison of the
    reconstructions.
    """
    if trials < 2:
        raise InvalidInputError("stability study needs at least 2 trials")
    if grid is None:
        grid = PhaseSpaceGrid(x_range=(-5.0, 5.0), p_range=(-5.0, 5.0),
                              x_points=81, p_points=81)
    rho_true = pure_density(target)
    basis = _basis_columns(basis_kind, d, povm)
    config = _solver_with_subspace(solver_config, basis)
    fidelities = np.zeros(trials)
    converged = np.zeros(trials, dtype=bool)
    grids = []
    for t in range(trials):
        dataset = generate_counts(rho_true, povm, noise, trial=t)
        result = maxlik_solve(dataset, povm, config)
        fidelities[t] = fidelity(target, result.rho)
        converged[t] = result.converged
        grids.append(wigner(result.rho, grid))
    seeds = tuple((noise.seed, t) for t in range(trials))
    return StabilityResult(basis=basis_kind, dim=d, trials=trials,
                           fidelities=fidelities, converged=converged,
                           spread=float(fidelities.std()), wigner_grids=tuple(grids),
                           grid=grid, trial_seeds=seeds)
