"""Truncated Fock-space states, quadrature overlaps, Wigner functions, fidelity.

Conventions, fixed globally: hbar = 1 and x = (a + a^dag)/sqrt(2), so the
vacuum quadrature variance is 1/2 and a coherent state |alpha> sits at
x = sqrt(2) Re(alpha), p = sqrt(2) Im(alpha). The quadrature eigenstate at
local-oscillator phase theta overlaps Fock states as

    <x_theta|n> = exp(-i n theta) * psi_n(x),

with psi_n the n-th Hermite function. The Wigner function is normalized to
integrate to 1 over the (x, p) plane, so the vacuum peaks at 1/pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, InvalidInputError, NumericalConsistencyError


def hermite_functions(x: np.ndarray | float, nmax: int) -> np.ndarray:
    """Evaluate the Hermite functions psi_0..psi_nmax at the points x.

    psi_n(x) = pi^(-1/4) (2^n n!)^(-1/2) H_n(x) exp(-x^2/2), computed by the
    normalized three-term recurrence so no factorial ever overflows.

    Parameters
    ----------
    x : array_like
        Evaluation points.
    nmax : int
        Highest index to evaluate, nmax >= 0.

    Returns
    -------
    ndarray of shape (nmax + 1,) + x.shape.
    """
    if nmax < 0:
        raise InvalidInputError("nmax must be >= 0")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("quadrature points must be finite")
    psi = np.zeros((nmax + 1,) + x.shape)
    psi[0] = np.pi ** -0.25 * np.exp(-x * x / 2.0)
    if nmax >= 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for n in range(1, nmax):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * x * psi[n] - np.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def quadrature_overlap(n: int, x: np.ndarray | float, theta: float) -> np.ndarray | complex:
    """Overlap <x_theta|n> = exp(-i n theta) psi_n(x).

    Scalar x gives a complex scalar; array x gives an array of overlaps.
    """
    if n < 0:
        raise InvalidInputError("Fock index must be >= 0")
    if not np.isfinite(theta):
        raise InvalidInputError("phase must be finite")
    psi_n = hermite_functions(x, n)[n]
    out = np.exp(-1j * n * theta) * psi_n
    return complex(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def coherent_state(alpha: complex, dim: int, normalized: bool = False) -> np.ndarray:
    """Coherent-state amplitudes c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    By default the truncated tail is NOT renormalized, so the truncation
    leak 1 - sum |c_n|^2 stays observable. Pass normalized=True to rescale
    to unit norm inside the truncated space.
    """
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise InvalidInputError("alpha must be finite")
    c = np.zeros(dim, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    if normalized:
        c = c / np.linalg.norm(c)
    return c


def cat_state(alpha: complex, parity: str, dim: int) -> np.ndarray:
    """Normalized cat state N(|alpha> + s|-alpha>), s = +1 (even) or -1 (odd).

    Amplitudes of the excluded photon-number parity are exactly zero, not
    merely small: the construction zeroes them before normalizing.
    """
    if parity not in ("even", "odd"):
        raise InvalidInputError(f"parity must be 'even' or 'odd', got {parity!r}")
    c = coherent_state(alpha, dim)
    if parity == "even":
        c[1::2] = 0.0
    else:
        c[0::2] = 0.0
    norm = np.linalg.norm(c)
    if norm < 1e-300:
        raise DegenerateStateError("cat state is the zero vector (odd cat at alpha = 0)")
    return c / norm


def fock_state(n: int, dim: int) -> np.ndarray:
    """Number state |n> in a dim-dimensional truncated space."""
    if not 0 <= n < dim:
        raise InvalidInputError(f"Fock index {n} outside truncated space of dim {dim}")
    c = np.zeros(dim, dtype=complex)
    c[n] = 1.0
    return c


def pure_density(psi: np.ndarray) -> np.ndarray:
    """Rank-1 density operator |psi><psi| of a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """Overlap fidelity <psi|rho|psi> of a pure target with a density operator.

    For pure rho = |phi><phi| this reduces to |<psi|phi>|^2.
    """
    psi = np.asarray(psi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise InvalidInputError(f"dimension mismatch: state {psi.size}, operator {rho.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise InvalidInputError("target state must be normalized")
    val = float(np.real(psi.conj() @ rho @ psi))
    return min(max(val, 0.0), 1.0)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular evaluation grid in natural quadrature units."""

    x_range: tuple[float, float]
    p_range: tuple[float, float]
    x_points: int
    p_points: int

    def __post_init__(self):
        if self.x_range[0] >= self.x_range[1] or self.p_range[0] >= self.p_range[1]:
            raise InvalidInputError("grid ranges must be increasing intervals")
        if self.x_points < 2 or self.p_points < 2:
            raise InvalidInputError("grid resolution must be >= 2 per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.x_points)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_range[0], self.p_range[1], self.p_points)


def wigner_points(rho: np.ndarray, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Wigner function of rho at paired points (x_k, p_k).

    Fock-basis evaluation through the displaced-parity kernel recurrence:
    with A = (x + ip)/sqrt(2), the |0><0| kernel is exp(-2|A|^2)/pi and the
    |m><n| kernels follow by raising recurrences in m and n. The sum over
    density-matrix entries is accumulated as a complex number; a Hermitian
    rho must leave only a rounding-level imaginary part, which is checked
    and then discarded.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if rho.shape != (d, d):
        raise InvalidInputError("density operator must be square")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise InvalidInputError("density operator must be Hermitian")
    A = (np.asarray(x, dtype=float) + 1j * np.asarray(p, dtype=float)) / np.sqrt(2.0)
    # two-row ladder of |m><n| kernels, m <= n, reused as in the Fock-space
    # raising recurrence: row 0 holds m-1, row 1 holds m
    K = np.zeros((2, d) + A.shape, dtype=complex)
    K[0, 0] = np.exp(-2.0 * np.abs(A) ** 2) / np.pi
    W = rho[0, 0] * K[0, 0]
    for n in range(1, d):
        K[0, n] = 2.0 * A * K[0, n - 1] / np.sqrt(n)
        W += rho[0, n] * K[0, n] + rho[n, 0] * K[0, n].conj()
    for m in range(1, d):
        K[1, m] = (2.0 * A.conj() * K[0, m] - np.sqrt(m) * K[0, m - 1]) / np.sqrt(m)
        W += rho[m, m] * K[1, m]
        for n in range(m + 1, d):
            K[1, n] = (2.0 * A * K[1, n - 1] - np.sqrt(m) * K[0, n - 1]) / np.sqrt(n)
            W += rho[m, n] * K[1, n] + rho[n, m] * K[1, n].conj()
        K[0] = K[1]
    resid = np.abs(W.imag).max() if W.size else 0.0
    if resid > 1e-8:
        raise NumericalConsistencyError(f"Wigner imaginary residue {resid:.3e} exceeds 1e-8")
    return W.real


def wigner(rho: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Wigner function on a grid, W[i, j] = W(xs[i], ps[j]).

    Normalization: the grid integral of W approaches 1 for a unit-trace rho
    once the grid covers the state's support.
    """
    rho = np.asarray(rho, dtype=complex)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise InvalidInputError("density operator must have unit trace")
    X, P = np.meshgrid(grid.xs, grid.ps, indexing="ij")
    return wigner_points(rho, X, P)
