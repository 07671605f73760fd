"""Tests for stable_convolve.spectral module."""

import math

import numpy as np
import pytest

from stable_convolve.errors import ContractError, DomainError
from stable_convolve.spectral import (
    apply_semigroup,
    burgers_modes,
    check_assumption,
    check_hilbert_schmidt,
    frac_power_apply,
    hnorm,
    load_modes,
    power_law_modes,
    save_modes,
    semigroup_norm_bound,
    semigroup_operator_norm,
)
from stable_convolve.types import ModeSet


def modes_with(gammas, betas=None):
    betas = betas if betas is not None else [1.0] * len(gammas)
    return ModeSet.model_validate(
        [
            {"k": i + 1, "gamma": float(g), "beta": float(b)}
            for i, (g, b) in enumerate(zip(gammas, betas))
        ]
    )


class TestOperatorCalculus:
    """Tests for fractional powers, the semigroup and H-norms."""

    def test_zero_power_is_identity(self):
        """Test that A^0 is the identity."""
        x = np.array([3.0, -1.0, 0.5])
        np.testing.assert_array_equal(frac_power_apply(modes_with([1, 4, 9]), 0.0, x), x)

    def test_square_root(self):
        """Test A^(1/2) on gamma = [1, 4, 9]."""
        result = frac_power_apply(modes_with([1, 4, 9]), 0.5, np.ones(3))
        np.testing.assert_allclose(result, [1.0, 2.0, 3.0])

    def test_inverse(self):
        """Test A^(-1) on gamma = [2]."""
        np.testing.assert_allclose(frac_power_apply(modes_with([2]), -1.0, [4.0]), [2.0])

    def test_misaligned(self):
        """Test error when the coefficient vector has the wrong length."""
        with pytest.raises(ContractError, match="not aligned"):
            frac_power_apply(modes_with([1, 4]), 0.5, [1.0, 2.0, 3.0])

    def test_trailing_axes_broadcast(self):
        """Test that a (modes x time) matrix is scaled row by row."""
        x = np.ones((2, 3))
        result = frac_power_apply(modes_with([1, 4]), 1.0, x)
        np.testing.assert_array_equal(result, [[1, 1, 1], [4, 4, 4]])

    def test_semigroup_identity_at_zero(self):
        """Test that e^{-A 0} is the identity."""
        x = np.array([1.0, 2.0])
        np.testing.assert_array_equal(apply_semigroup(modes_with([1, 4]), 0.0, x), x)

    def test_semigroup_halving(self):
        """Test e^{-A ln 2} on gamma = [1]."""
        result = apply_semigroup(modes_with([1]), math.log(2.0), [1.0])
        np.testing.assert_allclose(result, [0.5])

    def test_semigroup_negative_time(self):
        """Test error when t < 0."""
        with pytest.raises(DomainError, match="nonnegative"):
            apply_semigroup(modes_with([1]), -0.1, [1.0])

    def test_hnorm_examples(self):
        """Test the H-norm on small examples."""
        assert hnorm(modes_with([1, 4]), 0.0, [0.0, 0.0]) == 0.0
        assert hnorm(modes_with([1, 4]), 0.0, [3.0, 4.0]) == pytest.approx(5.0)
        assert hnorm(modes_with([4]), 0.5, [3.0]) == pytest.approx(6.0)

    def test_hnorm_per_column(self):
        """Test that a (modes x time) matrix gets one norm per column."""
        norms = hnorm(modes_with([1, 4]), 0.0, [[3.0, 0.0], [4.0, 1.0]])
        np.testing.assert_allclose(norms, [5.0, 1.0])

    @pytest.mark.parametrize("sigma,t", [(0.0, 1.0), (0.5, 0.1), (1.0, 0.01), (2.0, 3.0)])
    def test_smoothing_bound(self, sigma, t):
        """Test ||A^sigma e^{-At}|| <= (sigma/(e t))^sigma on a long spectrum."""
        modes = power_law_modes(256, beta_exp=1.0)
        assert semigroup_operator_norm(modes, sigma, t) <= semigroup_norm_bound(sigma, t) * (
            1.0 + 1e-12
        )

    def test_semigroup_property(self, rng):
        """Test e^{-At} e^{-As} = e^{-A(t+s)} on 32 modes."""
        modes = power_law_modes(32, beta_exp=1.0)
        x = rng.normal(size=32)
        for t, s in [(0.0, 0.3), (0.01, 0.02), (0.5, 1.25)]:
            np.testing.assert_allclose(
                apply_semigroup(modes, t, apply_semigroup(modes, s, x)),
                apply_semigroup(modes, t + s, x),
                rtol=1e-12,
                atol=1e-300,
            )

    @pytest.mark.parametrize("sigma", [-0.5, 0.25, 1.0, 1.5])
    def test_power_commutes_with_semigroup(self, rng, sigma):
        """Test A^sigma e^{-At} x = e^{-At} A^sigma x."""
        modes = power_law_modes(32, beta_exp=1.0)
        x = rng.normal(size=32)
        np.testing.assert_allclose(
            frac_power_apply(modes, sigma, apply_semigroup(modes, 0.05, x)),
            apply_semigroup(modes, 0.05, frac_power_apply(modes, sigma, x)),
            rtol=1e-12,
        )

    @pytest.mark.parametrize("sigma", [-1.0, 0.5, 1.0, 2.0])
    def test_norm_power_compatibility(self, rng, sigma):
        """Test ||x||_sigma = ||A^sigma x||_0."""
        modes = power_law_modes(32, beta_exp=1.0)
        x = rng.normal(size=32)
        assert hnorm(modes, sigma, x) == pytest.approx(
            hnorm(modes, 0.0, frac_power_apply(modes, sigma, x)), rel=1e-12
        )

    @pytest.mark.parametrize("sigma,t", [(0.5, 0.1), (1.0, 0.01), (1.5, 0.5)])
    def test_smoothing_bound_on_vectors(self, rng, sigma, t):
        """Test ||A^sigma e^{-At} x|| <= (sigma/(e t))^sigma ||x|| on random vectors."""
        modes = power_law_modes(64, beta_exp=1.0)
        bound = semigroup_norm_bound(sigma, t)
        for _ in range(20):
            x = rng.standard_cauchy(size=64)
            smoothed = hnorm(modes, sigma, apply_semigroup(modes, t, x))
            assert smoothed <= bound * hnorm(modes, 0.0, x) * (1.0 + 1e-12)

    def test_smoothing_bound_domain(self):
        """Test error when the smoothing bound gets t <= 0 or sigma < 0."""
        with pytest.raises(DomainError):
            semigroup_norm_bound(0.5, 0.0)
        with pytest.raises(DomainError):
            semigroup_norm_bound(-0.5, 1.0)


class TestCheckAssumption:
    """Tests for the summability diagnostic."""

    def test_convergent_case(self):
        """Test beta_k = k^-3, gamma_k = k^2, alpha=1.5, theta=0.5 converges."""
        modes = power_law_modes(64, beta_exp=1.5)
        report = check_assumption(modes, 1.5, 0.5)
        assert report.status == "convergent"
        assert report.convergent
        assert report.cauchy_gap < 1e-3 * report.partial_sum

    def test_zero_betas(self):
        """Test that beta = 0 gives S = 0."""
        modes = power_law_modes(8, beta_exp=1.5).with_betas(np.zeros(8))
        report = check_assumption(modes, 1.5, 0.5)
        assert report.partial_sum == 0.0
        assert report.convergent

    def test_divergence_suspected(self):
        """Test that increasing terms k^2 are flagged."""
        modes = modes_with([k * k for k in range(1, 17)])
        assert check_assumption(modes, 1.0, 1.0).status == "divergence suspected"

    def test_never_raises_on_empty(self):
        """Test the diagnostic on an empty mode set."""
        report = check_assumption(ModeSet(modes=[]), 1.5, 0.0)
        assert report.n_modes == 0
        assert report.convergent

    def test_hilbert_schmidt(self):
        """Test the Hilbert-Schmidt sum reads beta as q with exponent 2."""
        modes = power_law_modes(32, beta_exp=1.25)
        report = check_hilbert_schmidt(modes, 0.0)
        assert report.alpha == 2.0
        assert report.partial_sum == pytest.approx(np.sum(modes.betas**2))
        assert report.convergent


class TestModeConstructors:
    """Tests for burgers_modes, power_law_modes and mode files."""

    def test_single_wavenumber(self):
        """Test N=1 gives two channels with gamma=1, beta=1."""
        modes = burgers_modes(1, 1.25)
        assert len(modes) == 2
        np.testing.assert_array_equal(modes.gammas, [1.0, 1.0])
        np.testing.assert_array_equal(modes.betas, [1.0, 1.0])
        np.testing.assert_array_equal(modes.indices, [1, 2])

    def test_gamma_sequence(self):
        """Test N=3 gives gamma = [1, 1, 4, 4, 9, 9]."""
        np.testing.assert_array_equal(burgers_modes(3, 1.25).gammas, [1, 1, 4, 4, 9, 9])

    def test_beta_values(self):
        """Test N=2, beta_exp=1.5, scale=2 gives beta = [2, 2, 0.25, 0.25]."""
        np.testing.assert_allclose(
            burgers_modes(2, 1.5, scale=2.0).betas, [2.0, 2.0, 0.25, 0.25]
        )

    def test_invalid_truncation(self):
        """Test error when N < 1."""
        with pytest.raises(DomainError, match="N >= 1"):
            burgers_modes(0, 1.25)

    def test_power_law(self):
        """Test gamma_k = k^2 and beta_k = k^-2.5."""
        modes = power_law_modes(3, beta_exp=1.25)
        np.testing.assert_array_equal(modes.gammas, [1.0, 4.0, 9.0])
        np.testing.assert_allclose(modes.betas, [1.0, 2**-2.5, 3**-2.5])

    def test_mode_file_round_trip(self, tmp_path):
        """Test saving and loading a mode set."""
        modes = burgers_modes(4, 1.25)
        path = tmp_path / "modes.json"
        save_modes(modes, path)
        assert load_modes(path) == modes
