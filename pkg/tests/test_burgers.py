"""Tests for stable_convolve.burgers module."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from stable_convolve.burgers import (
    BurgersState,
    burgers_regime_ok,
    derivative,
    nonlinearity,
    padded_size,
    solve_driven,
    solve_path,
    step_mild,
    to_physical,
    wavenumber_count,
)
from stable_convolve.convolution import convolve_by_parts, simulate_driving
from stable_convolve.errors import BlowUpError, ContractError, DomainError
from stable_convolve.spectral import burgers_modes, power_law_modes
from stable_convolve.types import DrivingPath, GridSpec, StableLaw


def state(n, coeffs, nu=0.1):
    return BurgersState(modes=burgers_modes(n, 1.25), coeffs=coeffs, nu=nu)


def unit_channel(n, channel, value=1.0):
    coeffs = np.zeros(2 * n)
    coeffs[channel - 1] = value
    return coeffs


def coarsened(driving, stride):
    """The same driving path read on every stride-th grid point."""
    n_steps = driving.grid.n_steps // stride
    grid = GridSpec(horizon=driving.grid.horizon, n_steps=n_steps)
    samples = driving.samples[:, ::stride]
    return driving.model_copy(update={"grid": grid, "samples": samples})


def convolution_oracle(coeffs):
    """-X X' projected onto 1..N by direct summation over wavenumber pairs."""
    n = coeffs.size // 2
    c = np.zeros(2 * n + 1, dtype=np.complex128)
    for j in range(1, n + 1):
        c[n + j] = 0.5 * (coeffs[2 * j - 2] - 1j * coeffs[2 * j - 1])
        c[n - j] = np.conj(c[n + j])
    out = np.zeros(2 * n)
    for m in range(1, n + 1):
        total = 0.0j
        for j in range(-n, n + 1):
            r = m - j
            if -n <= r <= n:
                total += c[n + j] * 1j * r * c[n + r]
        out[2 * m - 2] = -2.0 * total.real
        out[2 * m - 1] = 2.0 * total.imag
    return out


class TestBurgersState:
    """Tests for the BurgersState model."""

    def test_energy(self):
        """Test the energy is the squared coefficient norm."""
        assert state(2, [1.0, 2.0, 0.0, 2.0]).energy == 9.0

    def test_rejects_non_finite(self):
        """Test error when coefficients are not finite."""
        with pytest.raises(ValidationError, match="finite"):
            state(1, [np.nan, 0.0])

    def test_rejects_bad_viscosity(self):
        """Test error when nu <= 0."""
        with pytest.raises(ValidationError, match="viscosity"):
            state(1, [0.0, 0.0], nu=0.0)

    def test_rejects_wrong_length(self):
        """Test error when the coefficient vector has the wrong length."""
        with pytest.raises(ValidationError, match="do not match"):
            state(2, [0.0, 0.0])

    def test_rejects_other_layouts(self):
        """Test error when the modes are not a Burgers channel layout."""
        with pytest.raises(ContractError):
            wavenumber_count(power_law_modes(4, 1.25))
        assert wavenumber_count(burgers_modes(3, 1.25)) == 3

    def test_padded_size(self):
        """Test the padded grid is even and holds at least 3N + 1 points."""
        for n in (1, 7, 8, 32):
            size = padded_size(n)
            assert size % 2 == 0
            assert size >= 3 * n + 1

    def test_regime(self):
        """Test the beta > 1 + 1/(2 alpha) regime boundary."""
        assert burgers_regime_ok(1.5, 1.5)
        assert not burgers_regime_ok(1.25, 1.5)
        assert not burgers_regime_ok(1.0, 1.5)


class TestNonlinearity:
    """Tests for the pseudospectral transport term."""

    def test_zero(self):
        """Test B(0) = 0."""
        np.testing.assert_array_equal(nonlinearity(state(4, np.zeros(8))), 0.0)

    def test_sine(self):
        """Test B(sin xi) = -1/2 sin 2 xi."""
        result = nonlinearity(state(4, unit_channel(4, 2)))
        np.testing.assert_allclose(result, unit_channel(4, 4, -0.5), atol=1e-12)

    def test_cosine(self):
        """Test B(cos xi) = 1/2 sin 2 xi."""
        result = nonlinearity(state(4, unit_channel(4, 1)))
        np.testing.assert_allclose(result, unit_channel(4, 4, 0.5), atol=1e-12)

    def test_derivative(self):
        """Test (cos 2 xi)' = -2 sin 2 xi and (sin xi)' = cos xi."""
        np.testing.assert_array_equal(derivative(unit_channel(2, 3)), unit_channel(2, 4, -2.0))
        np.testing.assert_array_equal(derivative(unit_channel(2, 2)), unit_channel(2, 1, 1.0))

    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_energy_neutral(self, n):
        """Test |<B(X), X>| <= 1e-10 ||X||^3 on random states."""
        rng = np.random.default_rng(n)
        modes = burgers_modes(n, 1.25)
        for _ in range(1000):
            coeffs = rng.standard_normal(2 * n)
            x = BurgersState(modes=modes, coeffs=coeffs, nu=0.1)
            pairing = float(np.dot(nonlinearity(x), coeffs))
            assert abs(pairing) <= 1e-10 * np.linalg.norm(coeffs) ** 3

    @pytest.mark.parametrize("n", [4, 8, 16])
    def test_matches_direct_convolution(self, n):
        """Test the pseudospectral product against the direct wavenumber sum."""
        rng = np.random.default_rng(100 + n)
        coeffs = np.zeros(2 * n)
        coeffs[: n] = rng.standard_normal(n)
        np.testing.assert_allclose(
            nonlinearity(state(n, coeffs)), convolution_oracle(coeffs), atol=1e-12
        )

    def test_full_band_is_dealiased(self):
        """Test exactness on a state using every wavenumber up to N."""
        rng = np.random.default_rng(5)
        coeffs = rng.standard_normal(16)
        np.testing.assert_allclose(
            nonlinearity(state(8, coeffs)), convolution_oracle(coeffs), atol=1e-12
        )

    def test_physical_snapshot(self):
        """Test point values of X = 2 cos xi + sin 3 xi."""
        coeffs = unit_channel(3, 1, 2.0) + unit_channel(3, 6)
        xi, values = to_physical(state(3, coeffs), 16)
        np.testing.assert_allclose(values, 2.0 * np.cos(xi) + np.sin(3.0 * xi), atol=1e-12)
        with pytest.raises(DomainError, match="points"):
            to_physical(state(3, coeffs), 6)


class TestStepMild:
    """Tests for one exponential-Euler step."""

    def test_linear_decay(self):
        """Test that without B and noise each mode decays as e^{-nu gamma t}."""
        x = state(4, np.ones(8), nu=0.5)
        dt = 0.01
        for _ in range(100):
            x = step_mild(x, dt, np.zeros(8), nonlinear=False)
        expected = np.exp(-0.5 * burgers_modes(4, 1.25).gammas * 1.0)
        np.testing.assert_allclose(x.coeffs, expected, rtol=1e-12)

    def test_energy_decreases(self):
        """Test that without noise the energy of sin xi strictly decreases."""
        x = state(8, unit_channel(8, 2), nu=1.0)
        energy = x.energy
        for _ in range(200):
            x = step_mild(x, 1e-3, np.zeros(16))
            assert x.energy < energy
            energy = x.energy

    def test_blow_up(self):
        """Test error carrying the step when the state becomes non-finite."""
        x = state(2, np.ones(4))
        increment = np.array([np.inf, 0.0, 0.0, 0.0])
        with pytest.raises(BlowUpError) as info:
            step_mild(x, 0.01, increment, step_index=7, time=0.07)
        assert info.value.step == 7
        assert info.value.time == 0.07
        np.testing.assert_array_equal(info.value.last_coeffs, np.ones(4))

    def test_invalid_dt(self):
        """Test error when dt <= 0."""
        with pytest.raises(DomainError, match="dt must be positive"):
            step_mild(state(2, np.zeros(4)), 0.0, np.zeros(4))

    def test_increment_shape(self):
        """Test error when the increment does not match the state."""
        with pytest.raises(ContractError, match="does not match"):
            step_mild(state(2, np.zeros(4)), 0.1, np.zeros(3))


class TestSolvePath:
    """Tests for trajectories and their diagnostics."""

    def test_zero_noise_zero_start(self, burgers8):
        """Test that no noise and X0 = 0 give the zero path."""
        grid = GridSpec(horizon=1.0, n_steps=64)
        driving = DrivingPath(grid=grid, modes=burgers8, samples=np.zeros((16, 65)))
        x0 = BurgersState(modes=burgers8, coeffs=np.zeros(16), nu=0.1)
        path, diagnostics = solve_driven(x0, driving)
        np.testing.assert_array_equal(path.values, 0.0)
        assert diagnostics.max_jump == 0.0
        assert diagnostics.jump_count == 0

    def test_linear_consistency(self, burgers8, law):
        """Test that without B the path is e^{-nu A t} X0 + Z mode-wise."""
        grid = GridSpec(horizon=1.0, n_steps=256)
        nu = 0.1
        rng = np.random.default_rng(3)
        x0 = BurgersState(modes=burgers8, coeffs=rng.standard_normal(16), nu=nu)
        driving = simulate_driving(burgers8, law, grid, seed=12)
        path, _ = solve_driven(x0, driving, nonlinear=False)

        viscous = DrivingPath(
            grid=grid, modes=burgers8.scaled(nu), samples=driving.samples, law=law
        )
        _, z = convolve_by_parts(viscous)
        decay = np.exp(-nu * burgers8.gammas[:, None] * grid.times[None, :])
        expected = decay * x0.coeffs[:, None] + z.values
        np.testing.assert_allclose(path.values, expected, rtol=1e-10, atol=1e-10)

    def test_repeatable(self, burgers8, law):
        """Test that a seed fixes the trajectory."""
        grid = GridSpec(horizon=0.25, n_steps=64)
        x0 = BurgersState(modes=burgers8, coeffs=np.zeros(16), nu=0.1)
        a, _ = solve_path(x0, grid, burgers8, law, seed=8)
        b, _ = solve_path(x0, grid, burgers8, law, seed=8)
        np.testing.assert_array_equal(a.values, b.values)

    def test_energy_series(self, burgers8, law):
        """Test the energy series has one entry per grid point."""
        grid = GridSpec(horizon=0.25, n_steps=64)
        x0 = BurgersState(modes=burgers8, coeffs=unit_channel(8, 2), nu=0.1)
        path, diagnostics = solve_path(x0, grid, burgers8, law, seed=2)
        assert len(diagnostics.energy) == 65
        assert diagnostics.energy[0] == pytest.approx(1.0)
        assert len(diagnostics.jump_sizes) == 64
        assert diagnostics.max_jump == pytest.approx(max(diagnostics.jump_sizes))

    def test_mismatched_driving(self, burgers8, law):
        """Test error when the driving path uses another mode set."""
        grid = GridSpec(horizon=0.25, n_steps=16)
        driving = simulate_driving(burgers_modes(4, 1.25), law, grid, seed=0)
        x0 = BurgersState(modes=burgers8, coeffs=np.zeros(16), nu=0.1)
        with pytest.raises(ContractError, match="different modes"):
            solve_driven(x0, driving)

    def test_regime_warning(self, burgers8, law, caplog):
        """Test a warning when beta_exp <= 1 + 1/(2 alpha)."""
        grid = GridSpec(horizon=0.1, n_steps=8)
        x0 = BurgersState(modes=burgers8, coeffs=np.zeros(16), nu=0.1)
        with caplog.at_level("WARNING"):
            solve_path(x0, grid, burgers8, law, seed=0, beta_exp=1.0)
        assert "beta_exp=1.0" in caplog.text

    def test_jump_alignment(self):
        """Test that large trajectory jumps sit on large driving increments."""
        modes = burgers_modes(16, 1.25)
        grid = GridSpec(horizon=0.5, n_steps=512)
        x0 = BurgersState(modes=modes, coeffs=np.zeros(32), nu=0.1)
        path, diagnostics = solve_path(x0, grid, modes, StableLaw(alpha=1.5), seed=2024)
        assert path.is_finite
        assert diagnostics.jump_count > 0
        assert diagnostics.alignment >= 0.95

    def test_refinement_order(self):
        """Test that halving dt changes the noise-free endpoint at first order."""
        modes = burgers_modes(8, 1.25)
        x0 = BurgersState(modes=modes, coeffs=unit_channel(8, 2, 0.5), nu=0.1)
        endpoints = []
        steps = [64, 128, 256, 512, 1024]
        for n in steps:
            grid = GridSpec(horizon=0.5, n_steps=n)
            driving = DrivingPath(grid=grid, modes=modes, samples=np.zeros((16, n + 1)))
            path, _ = solve_driven(x0, driving)
            endpoints.append(path.values[:, -1])
        changes = [np.linalg.norm(a - b) for a, b in zip(endpoints, endpoints[1:])]
        fit = stats.linregress(np.log([0.5 / n for n in steps[:-1]]), np.log(changes))
        assert fit.slope >= 0.8
        assert math.isfinite(fit.slope)

    def test_refinement_on_stable_driving(self):
        """Test that coarsening a stable driving path moves the endpoint at order 1."""
        modes = burgers_modes(8, 1.5, scale=0.5)
        x0 = BurgersState(modes=modes, coeffs=unit_channel(8, 2, 0.5), nu=0.1)
        fine = GridSpec(horizon=0.5, n_steps=4096)
        strides = [32, 16, 8, 4]
        changes = []
        for replica in range(8):
            driving = simulate_driving(modes, StableLaw(alpha=1.5), fine, 21, replica)
            reference, _ = solve_driven(x0, driving)
            row = []
            for stride in strides:
                path, _ = solve_driven(x0, coarsened(driving, stride))
                row.append(np.linalg.norm(path.values[:, -1] - reference.values[:, -1]))
            changes.append(row)
        medians = np.median(changes, axis=0)
        steps = [0.5 * stride / 4096 for stride in strides]
        fit = stats.linregress(np.log(steps), np.log(medians))
        assert fit.slope >= 0.8


class TestFiniteness:
    """Tests for how often stable-driven trajectories stay finite."""

    @staticmethod
    def finite_fraction(n_modes, grid, replicas):
        modes = burgers_modes(n_modes, 1.25)
        x0 = BurgersState(modes=modes, coeffs=np.zeros(2 * n_modes), nu=0.1)
        finite = 0
        for replica in range(replicas):
            try:
                path, _ = solve_path(
                    x0, grid, modes, StableLaw(alpha=1.5), seed=77, replica=replica
                )
            except BlowUpError:
                continue
            finite += int(path.is_finite)
        return finite / replicas

    def test_small_ensemble_stays_finite(self):
        """Test that most of a small ensemble at N=16 stays finite."""
        grid = GridSpec(horizon=0.5, n_steps=512)
        assert self.finite_fraction(16, grid, 20) >= 0.9

    @pytest.mark.slow
    def test_desk_ensemble_stays_finite(self):
        """Test that at least 95% of 100 trajectories at N=32, n=1024 stay finite."""
        grid = GridSpec(horizon=1.0, n_steps=1024)
        assert self.finite_fraction(32, grid, 100) >= 0.95
