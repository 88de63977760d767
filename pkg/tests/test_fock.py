from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from gramtomo import (DegenerateStateError, InvalidInputError, NumericalConsistencyError,
                      PhaseSpaceGrid, cat_state, coherent_state, fidelity, fock_state,
                      hermite_functions, pure_density, quadrature_overlap, wigner,
                      wigner_points)


def mp_hermite_function(n: int, x) -> mpmath.mpf:
    """Extended-precision psi_n(x) by the same normalized recurrence."""
    x = mpmath.mpf(x)
    prev = mpmath.mpf(0)
    cur = mpmath.pi ** mpmath.mpf("-0.25") * mpmath.exp(-x * x / 2)
    for k in range(n):
        nxt = mpmath.sqrt(mpmath.mpf(2) / (k + 1)) * x * cur \
            - mpmath.sqrt(mpmath.mpf(k) / (k + 1)) * prev
        prev, cur = cur, nxt
    return cur


class TestHermiteFunctions:
    def test_ground_state_closed_form(self):
        xs = np.linspace(-3, 3, 13)
        psi = hermite_functions(xs, 0)
        assert np.allclose(psi[0], np.pi ** -0.25 * np.exp(-xs ** 2 / 2), atol=1e-14)

    def test_against_extended_precision(self):
        with mpmath.workdps(50):
            for n, x in [(14, 4.9), (10, 0.3), (25, -6.1)]:
                ref = float(mp_hermite_function(n, x))
                got = hermite_functions(x, n)[n]
                assert got == pytest.approx(ref, abs=1e-12)

    def test_orthonormality_on_fine_grid(self):
        xs = np.linspace(-8, 8, 1601)
        dx = xs[1] - xs[0]
        psi = hermite_functions(xs, 10)
        overlap = dx * psi @ psi.T
        assert np.abs(overlap - np.eye(11)).max() < 1e-3

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            hermite_functions(0.0, -1)
        with pytest.raises(InvalidInputError):
            hermite_functions(np.inf, 3)


class TestQuadratureOverlap:
    def test_vacuum_at_origin(self):
        assert quadrature_overlap(0, 0.0, 0.0) == pytest.approx(np.pi ** -0.25, abs=1e-14)

    def test_first_excited_at_origin_is_zero(self):
        for theta in (0.0, 0.3, 2.0):
            assert quadrature_overlap(1, 0.0, theta) == 0.0

    def test_high_order_against_oracle(self):
        with mpmath.workdps(50):
            ref = float(mp_hermite_function(14, 4.9))
        got = quadrature_overlap(14, 4.9, np.pi / 3)
        assert abs(got) == pytest.approx(abs(ref), abs=1e-10)
        assert got == pytest.approx(ref * np.exp(-1j * 14 * np.pi / 3), abs=1e-10)

    def test_phase_convention_sign(self):
        # e^{-i n theta}: increasing theta rotates the phase clockwise
        val = quadrature_overlap(2, 1.0, 0.25)
        base = quadrature_overlap(2, 1.0, 0.0)
        assert val == pytest.approx(base * np.exp(-1j * 2 * 0.25), abs=1e-14)

    def test_completeness_independent_of_theta(self):
        xs = np.linspace(-8, 8, 1601)
        dx = xs[1] - xs[0]
        for theta in (0.0, 0.7):
            vecs = np.array([quadrature_overlap(n, xs, theta) for n in range(11)])
            overlap = dx * vecs.conj() @ vecs.T
            assert np.abs(overlap - np.eye(11)).max() < 1e-3


class TestCoherentState:
    def test_vacuum_case(self):
        c = coherent_state(0.0, 15)
        assert c[0] == 1.0
        assert np.all(c[1:] == 0.0)

    def test_two_term_closed_form(self):
        c = coherent_state(1.0, 2)
        assert c[0] == pytest.approx(math.exp(-0.5), abs=1e-15)
        assert c[1] == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_truncation_leak_against_series(self):
        c = coherent_state(2.0, 15)
        with mpmath.workdps(60):
            series = sum(
                mpmath.exp(-4) * mpmath.mpf(4) ** n / mpmath.factorial(n)
                for n in range(15)
            )
            ref = float(series)
        total = float(np.sum(np.abs(c) ** 2))
        assert total == pytest.approx(ref, abs=1e-13)
        assert 0 < 1.0 - total < 1e-4

    def test_normalized_variant(self):
        c = coherent_state(2.0, 15, normalized=True)
        assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-14)

    def test_complex_amplitude_series(self):
        alpha = 0.7 - 1.1j
        c = coherent_state(alpha, 10)
        n = 7
        ref = np.exp(-abs(alpha) ** 2 / 2) * alpha ** n / math.sqrt(math.factorial(n))
        assert c[n] == pytest.approx(ref, abs=1e-14)

    def test_nonfinite_alpha_rejected(self):
        with pytest.raises(InvalidInputError):
            coherent_state(complex(np.nan, 0.0), 5)
        with pytest.raises(InvalidInputError):
            coherent_state(np.inf, 5)


class TestCatState:
    def test_alpha_zero_even_is_vacuum(self):
        c = cat_state(0.0, "even", 15)
        assert c[0] == 1.0
        assert np.all(c[1:] == 0.0)

    def test_odd_cat_at_zero_degenerate(self):
        with pytest.raises(DegenerateStateError):
            cat_state(0.0, "odd", 15)

    def test_excluded_parity_bitwise_zero(self):
        even = cat_state(2.0, "even", 15)
        assert np.all(even[1::2] == 0.0)
        odd = cat_state(2.0, "odd", 15)
        assert np.all(odd[0::2] == 0.0)

    def test_normalized(self):
        for parity in ("even", "odd"):
            c = cat_state(2.0, parity, 15)
            assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-12)

    def test_c0_against_closed_form_normalization(self):
        # N = 1/sqrt(2 (1 + e^{-2|alpha|^2})) before truncation, c_0 of
        # |alpha> + |-alpha> is 2 e^{-|alpha|^2/2}
        alpha = 2.0
        ref = 2.0 * math.exp(-alpha ** 2 / 2.0) / math.sqrt(2.0 * (1 + math.exp(-2 * alpha ** 2)))
        c60 = cat_state(alpha, "even", 60)
        assert c60[0].real == pytest.approx(ref, abs=1e-13)
        # the dim-15 truncation renormalizes inside the truncated space, so
        # c_0 moves only by the half-leak
        c15 = cat_state(alpha, "even", 15)
        assert c15[0].real == pytest.approx(ref, abs=2e-4)

    def test_bad_parity_label(self):
        with pytest.raises(InvalidInputError):
            cat_state(2.0, "both", 15)


class TestFockStateAndFidelity:
    def test_fock_state_basis_vector(self):
        c = fock_state(3, 6)
        assert c[3] == 1.0 and np.linalg.norm(c) == 1.0

    def test_fock_state_out_of_range(self):
        with pytest.raises(InvalidInputError):
            fock_state(6, 6)

    def test_identical_states(self):
        e0 = fock_state(0, 4)
        assert fidelity(e0, pure_density(e0)) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal_states(self):
        e0, e1 = fock_state(0, 4), fock_state(1, 4)
        assert fidelity(e0, pure_density(e1)) == 0.0

    def test_maximally_mixed_trace_identity(self):
        psi = cat_state(2.0, "even", 15)
        rho = np.eye(15, dtype=complex) / 15
        assert fidelity(psi, rho) == pytest.approx(1.0 / 15, abs=1e-14)

    def test_range_and_purity_characterization(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            v = rng.normal(size=6) + 1j * rng.normal(size=6)
            psi = v / np.linalg.norm(v)
            w = rng.normal(size=6) + 1j * rng.normal(size=6)
            phi = w / np.linalg.norm(w)
            f = fidelity(psi, pure_density(phi))
            assert 0.0 <= f <= 1.0
            assert fidelity(psi, pure_density(psi)) == pytest.approx(1.0, abs=1e-12)
            if f > 1.0 - 1e-12:
                assert abs(abs(psi.conj() @ phi) - 1.0) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            fidelity(fock_state(0, 3), np.eye(4) / 4)

    def test_unnormalized_target_rejected(self):
        with pytest.raises(InvalidInputError):
            fidelity(2.0 * fock_state(0, 3), np.eye(3) / 3)


def wigner_oracle(psi: np.ndarray, x: float, p: float) -> float:
    """Defining Fourier integral W = (1/2pi) int psi(x-y/2) psi*(x+y/2) e^{ipy} dy."""
    dim = psi.size

    def wave(u):
        return psi @ hermite_functions(np.asarray(u), dim - 1)

    def integrand_re(y):
        return (wave(x - y / 2) * np.conj(wave(x + y / 2)) * np.exp(1j * p * y)).real

    def integrand_im(y):
        return (wave(x - y / 2) * np.conj(wave(x + y / 2)) * np.exp(1j * p * y)).imag

    re, _ = quad(integrand_re, -14, 14, limit=300)
    im, _ = quad(integrand_im, -14, 14, limit=300)
    assert abs(im) < 1e-12
    return re / (2 * np.pi)


class TestWigner:
    def test_vacuum_peak(self):
        rho = pure_density(fock_state(0, 5))
        val = wigner_points(rho, np.array([0.0]), np.array([0.0]))[0]
        assert val == pytest.approx(1 / np.pi, abs=1e-14)

    def test_fock1_negative_at_origin(self):
        rho = pure_density(fock_state(1, 5))
        val = wigner_points(rho, np.array([0.0]), np.array([0.0]))[0]
        assert val == pytest.approx(-1 / np.pi, abs=1e-14)

    def test_vacuum_grid_integral(self):
        grid = PhaseSpaceGrid(x_range=(-6, 6), p_range=(-6, 6), x_points=201, p_points=201)
        W = wigner(pure_density(fock_state(0, 5)), grid)
        dx = grid.xs[1] - grid.xs[0]
        dp = grid.ps[1] - grid.ps[0]
        assert abs(W.sum() * dx * dp - 1.0) < 1e-3

    def test_cat_interference_peak_against_integral_oracle(self):
        psi = cat_state(2.0, "even", 15)
        rho = pure_density(psi)
        for x, p in [(0.0, 0.0), (1.3, -0.7), (2.0 * np.sqrt(2.0), 0.0)]:
            got = wigner_points(rho, np.array([x]), np.array([p]))[0]
            assert got == pytest.approx(wigner_oracle(psi, x, p), abs=1e-10)
        origin = wigner_points(rho, np.array([0.0]), np.array([0.0]))[0]
        assert origin > 0.25  # constructive fringe of the even cat

    def test_coherent_peak_position(self):
        alpha = 0.8 + 0.5j
        psi = coherent_state(alpha, 30, normalized=True)
        pk = wigner_points(pure_density(psi),
                           np.array([np.sqrt(2) * alpha.real]),
                           np.array([np.sqrt(2) * alpha.imag]))[0]
        assert pk == pytest.approx(1 / np.pi, abs=1e-6)

    def test_linearity(self):
        rho1 = pure_density(fock_state(0, 6))
        rho2 = pure_density(cat_state(1.5, "even", 6))
        a = 0.3
        grid = PhaseSpaceGrid(x_range=(-3, 3), p_range=(-3, 3), x_points=21, p_points=21)
        mix = wigner(a * rho1 + (1 - a) * rho2, grid)
        parts = a * wigner(rho1, grid) + (1 - a) * wigner(rho2, grid)
        assert np.abs(mix - parts).max() < 1e-10

    def test_marginal_matches_wavefunction(self):
        psi = cat_state(2.0, "even", 15)
        grid = PhaseSpaceGrid(x_range=(-5, 5), p_range=(-7, 7), x_points=41, p_points=281)
        W = wigner(pure_density(psi), grid)
        dp = grid.ps[1] - grid.ps[0]
        marginal = W.sum(axis=1) * dp
        wave = psi @ hermite_functions(grid.xs, 14)
        assert np.abs(marginal - np.abs(wave) ** 2).max() < 1e-6

    def test_non_hermitian_rejected(self):
        bad = np.array([[1.0, 0.5], [0.0, 0.0]], dtype=complex)
        with pytest.raises(InvalidInputError):
            wigner_points(bad, np.array([0.0]), np.array([0.0]))

    def test_non_unit_trace_rejected_on_grid(self):
        grid = PhaseSpaceGrid(x_range=(-2, 2), p_range=(-2, 2), x_points=5, p_points=5)
        with pytest.raises(InvalidInputError):
            wigner(2 * pure_density(fock_state(0, 3)), grid)

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            PhaseSpaceGrid(x_range=(2, -2), p_range=(-2, 2), x_points=5, p_points=5)
        with pytest.raises(InvalidInputError):
            PhaseSpaceGrid(x_range=(-2, 2), p_range=(-2, 2), x_points=1, p_points=5)
