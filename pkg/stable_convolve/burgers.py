"""Spectral Galerkin solver for the stochastic Burgers equation on the torus.

Solves dX - nu X'' dt + X X' dt = dL on mean-zero periodic functions. The
state holds coefficients against cos(j xi) (channel 2j - 1) and sin(j xi)
(channel 2j), j = 1..N, in the layout of
:func:`~stable_convolve.spectral.burgers_modes`. Time stepping is
exponential Euler

    X_{n+1} = e^{-nu A dt} (X_n + dt B(X_n)) + zeta_n,

where B(X) = -X X' is evaluated pseudospectrally on a zero-padded grid and
zeta_n = Z(t_{n+1}) - e^{-nu A dt} Z(t_n) comes from the by-parts
stochastic convolution with rates nu gamma_k. Without the nonlinear term the
recursion telescopes to e^{-nu A t} X_0 + Z(t) exactly.

Example:
    >>> import numpy as np
    >>> from stable_convolve.burgers import BurgersState, solve_path
    >>> from stable_convolve.spectral import burgers_modes
    >>> from stable_convolve.types import GridSpec, StableLaw
    >>>
    >>> modes = burgers_modes(32, beta_exp=1.25)
    >>> x0 = BurgersState(modes=modes, coeffs=np.zeros(64), nu=0.1)
    >>> path, diagnostics = solve_path(
    ...     x0, GridSpec(horizon=1.0, n_steps=1024), modes, StableLaw(alpha=1.5), seed=5
    ... )
    >>> diagnostics.max_jump > 0
    True
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .convolution import convolve_by_parts, simulate_driving
from .errors import BlowUpError, ContractError, DomainError
from .spectral import Coeffs, hnorm
from .types import DrivingPath, FieldPath, FieldRole, GridSpec, ModeSet, StableLaw

logger = logging.getLogger(__name__)

DEFAULT_JUMP_THRESHOLD = 5.0


def wavenumber_count(modes: ModeSet) -> int:
    """Return N for a Burgers mode set, checking the channel layout.

    Raises:
        ContractError: If the modes are not channels 1..2N with gamma = j^2
    """
    n_channels = len(modes)
    if n_channels == 0 or n_channels % 2:
        raise ContractError(f"Burgers mode sets have 2N channels, got {n_channels}")
    n = n_channels // 2
    expected = np.arange(1, n_channels + 1)
    wavenumbers = (expected + 1) // 2
    if not np.array_equal(modes.indices, expected) or not np.array_equal(
        modes.gammas, (wavenumbers**2).astype(float)
    ):
        raise ContractError("mode set does not have the cos/sin channel layout k=1..2N")
    return n


def burgers_regime_ok(beta_exp: float, alpha: float) -> bool:
    """Whether beta_exp > 1 + 1/(2 alpha), the regime with a well-posed mild solution."""
    return beta_exp > 1.0 + 1.0 / (2.0 * alpha)


def viscous_modes(modes: ModeSet, nu: float) -> ModeSet:
    """The mode set of nu A: every gamma multiplied by the viscosity."""
    if not nu > 0.0:
        raise DomainError(f"viscosity must be positive, got nu={nu}")
    return modes.scaled(nu)


def padded_size(n: int) -> int:
    """Even physical grid size M >= 3N + 1, enough to de-alias quadratic products."""
    return 2 * ((3 * n) // 2 + 1)


class BurgersState(BaseModel):
    """A mean-zero Galerkin state with its viscosity.

    Attributes:
        modes (ModeSet): Burgers mode set (channels 1..2N)
        coeffs (numpy.ndarray): Channel coefficients, shape (2N,)
        nu (float): Viscosity, positive
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modes: ModeSet
    coeffs: np.ndarray
    nu: float

    @field_validator("coeffs", mode="before")
    @classmethod
    def validate_coeffs(cls, v) -> np.ndarray:
        array = np.asarray(v, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError(f"coefficients must be a vector, got ndim={array.ndim}")
        if not np.all(np.isfinite(array)):
            raise ValueError("coefficients must be finite")
        return array

    @field_validator("nu")
    @classmethod
    def validate_nu(cls, v: float) -> float:
        if not (v > 0.0 and math.isfinite(v)):
            raise ValueError(f"viscosity must be positive and finite, got {v}")
        return float(v)

    @model_validator(mode="after")
    def check_layout(self) -> "BurgersState":
        wavenumber_count(self.modes)
        if self.coeffs.shape != (len(self.modes),):
            raise ValueError(
                f"coefficients of shape {self.coeffs.shape} do not match "
                f"{len(self.modes)} channels"
            )
        return self

    @property
    def n_wavenumbers(self) -> int:
        return len(self.modes) // 2

    @property
    def energy(self) -> float:
        """||X||_H^2 (coefficient norm)."""
        return float(np.dot(self.coeffs, self.coeffs))

    def with_coeffs(self, coeffs: Coeffs) -> "BurgersState":
        return BurgersState(modes=self.modes, coeffs=coeffs, nu=self.nu)


def _to_grid(coeffs: np.ndarray, size: int) -> np.ndarray:
    """Evaluate sum_j a_j cos(j xi) + b_j sin(j xi) at xi_m = 2 pi m / size."""
    a, b = coeffs[0::2], coeffs[1::2]
    spectrum = np.zeros(size // 2 + 1, dtype=np.complex128)
    spectrum[1 : a.size + 1] = 0.5 * size * (a - 1j * b)
    return np.fft.irfft(spectrum, n=size)


def _from_grid(values: np.ndarray, n: int) -> np.ndarray:
    """Project grid values onto channels 1..2N (the mean is dropped)."""
    spectrum = np.fft.rfft(values)[1 : n + 1] * (2.0 / values.size)
    out = np.empty(2 * n)
    out[0::2] = spectrum.real
    out[1::2] = -spectrum.imag
    return out


def derivative(coeffs: Coeffs) -> Coeffs:
    """Coefficients of X' for X given in cos/sin channels."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    j = np.arange(1, coeffs.size // 2 + 1, dtype=np.float64)
    out = np.empty_like(coeffs)
    out[0::2] = j * coeffs[1::2]
    out[1::2] = -j * coeffs[0::2]
    return out


def nonlinearity(state: BurgersState) -> Coeffs:
    """Galerkin projection of B(X) = -X X', computed pseudospectrally.

    Both factors are synthesized on a zero-padded grid of
    :func:`padded_size` points, multiplied pointwise and projected back onto
    wavenumbers 1..N.
    """
    n = state.n_wavenumbers
    size = padded_size(n)
    x = _to_grid(state.coeffs, size)
    dx = _to_grid(derivative(state.coeffs), size)
    return _from_grid(-x * dx, n)


def to_physical(state: BurgersState, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Snapshot X(xi_m) at xi_m = 2 pi m / points.

    Raises:
        DomainError: If points <= 2N (the grid would alias the state)
    """
    if points <= 2 * state.n_wavenumbers:
        raise DomainError(
            f"need more than {2 * state.n_wavenumbers} points to resolve "
            f"{state.n_wavenumbers} wavenumbers, got {points}"
        )
    xi = 2.0 * math.pi * np.arange(points) / points
    return xi, _to_grid(state.coeffs, points)


def step_mild(
    state: BurgersState,
    dt: float,
    z_increment: Coeffs,
    nonlinear: bool = True,
    step_index: int = 0,
    time: float = 0.0,
) -> BurgersState:
    """One exponential-Euler step X -> e^{-nu A dt}(X + dt B(X)) + z_increment.

    Args:
        state: Current state
        dt: Step size
        z_increment: Stochastic convolution increment over the step
        nonlinear: Include B(X); False solves the linear equation
        step_index: Index reported on blow-up
        time: Start time of the step, reported on blow-up

    Raises:
        DomainError: If dt <= 0
        ContractError: If z_increment does not match the state
        BlowUpError: If the new coefficients are not finite
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    z_increment = np.asarray(z_increment, dtype=np.float64)
    if z_increment.shape != state.coeffs.shape:
        raise ContractError(
            f"increment of shape {z_increment.shape} does not match "
            f"{state.coeffs.shape}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        drift = state.coeffs
        if nonlinear:
            drift = drift + dt * nonlinearity(state)
        coeffs = np.exp(-state.nu * state.modes.gammas * dt) * drift + z_increment
    if not np.all(np.isfinite(coeffs)):
        raise BlowUpError(step_index, time, state.coeffs.copy())
    return state.with_coeffs(coeffs)


class BurgersDiagnostics(BaseModel):
    """Regularity diagnostics of one trajectory.

    Attributes:
        jump_sizes (List[float]): ||X(t_{j+1}) - X(t_j)||_H per step
        max_jump (float): Largest step jump
        jump_threshold (float): Multiple of the median jump counted as a jump
        jump_count (int): Steps whose jump exceeds threshold x median
        energy (List[float]): ||X(t_j)||^2 per grid point
        alignment (float): Share of those steps at which the driving increment
            also exceeds half that multiple of its median (1.0 when there are none)
    """

    model_config = ConfigDict(frozen=True)

    jump_sizes: List[float]
    max_jump: float
    jump_threshold: float
    jump_count: int
    energy: List[float]
    alignment: float


def _large_steps(sizes: np.ndarray, threshold: float) -> np.ndarray:
    if sizes.size == 0:
        return np.zeros(0, dtype=bool)
    median = float(np.median(sizes))
    if median == 0.0:
        return sizes > 0.0
    return sizes > threshold * median


def trajectory_diagnostics(
    path: FieldPath, driving: DrivingPath, threshold: float = DEFAULT_JUMP_THRESHOLD
) -> BurgersDiagnostics:
    """Jump, energy and jump-alignment diagnostics for a solved trajectory."""
    modes = path.modes
    jumps = hnorm(modes, 0.0, np.diff(path.values, axis=1))
    jumps = np.atleast_1d(jumps)
    driving_jumps = np.atleast_1d(hnorm(modes, 0.0, np.diff(driving.weighted(), axis=1)))
    flagged = _large_steps(jumps, threshold)
    driven = _large_steps(driving_jumps, threshold / 2.0)
    count = int(np.count_nonzero(flagged))
    alignment = (
        float(np.count_nonzero(flagged & driven)) / count if count else 1.0
    )
    energy = np.sum(path.values**2, axis=0)
    return BurgersDiagnostics(
        jump_sizes=jumps.tolist(),
        max_jump=float(jumps.max()) if jumps.size else 0.0,
        jump_threshold=threshold,
        jump_count=count,
        energy=energy.tolist(),
        alignment=alignment,
    )


def noise_increments(driving: DrivingPath, nu: float) -> np.ndarray:
    """zeta_n = Z(t_{n+1}) - e^{-nu A dt} Z(t_n), shape (2N, n_steps).

    Z is the by-parts stochastic convolution with the viscous rates nu gamma_k.
    """
    viscous = DrivingPath(
        grid=driving.grid,
        modes=viscous_modes(driving.modes, nu),
        samples=driving.samples,
        noise=driving.noise,
        law=driving.law,
        seed=driving.seed,
        replica=driving.replica,
    )
    _, z = convolve_by_parts(viscous)
    decay = np.exp(-viscous.modes.gammas * driving.grid.step)
    return z.values[:, 1:] - decay[:, None] * z.values[:, :-1]


def solve_driven(
    x0: BurgersState,
    driving: DrivingPath,
    nonlinear: bool = True,
    jump_threshold: float = DEFAULT_JUMP_THRESHOLD,
) -> Tuple[FieldPath, BurgersDiagnostics]:
    """Integrate the Burgers equation along a given driving path.

    Raises:
        ContractError: If the driving path belongs to other modes than x0
        BlowUpError: Propagated from :func:`step_mild`
    """
    if not (
        np.array_equal(driving.modes.indices, x0.modes.indices)
        and np.array_equal(driving.modes.gammas, x0.modes.gammas)
    ):
        raise ContractError("driving path and initial state use different modes")
    grid = driving.grid
    dt = grid.step
    zeta = noise_increments(driving, x0.nu)
    values = np.empty((len(x0.modes), grid.n_steps + 1))
    values[:, 0] = x0.coeffs
    state = x0
    times = grid.times
    for j in range(grid.n_steps):
        state = step_mild(
            state, dt, zeta[:, j], nonlinear=nonlinear, step_index=j, time=times[j]
        )
        values[:, j + 1] = state.coeffs
    path = FieldPath(grid=grid, modes=driving.modes, values=values, role=FieldRole.X)
    diagnostics = trajectory_diagnostics(path, driving, jump_threshold)
    logger.info(
        f"Burgers path: {grid.n_steps} steps, max jump {diagnostics.max_jump:.4g}, "
        f"{diagnostics.jump_count} jumps, alignment {diagnostics.alignment:.3f}"
    )
    return path, diagnostics


def solve_path(
    x0: BurgersState,
    grid: GridSpec,
    modes: ModeSet,
    law: StableLaw,
    seed: int,
    replica: int = 0,
    nonlinear: bool = True,
    beta_exp: Optional[float] = None,
    jump_threshold: float = DEFAULT_JUMP_THRESHOLD,
) -> Tuple[FieldPath, BurgersDiagnostics]:
    """Simulate one Burgers trajectory driven by stable noise on ``modes``.

    Args:
        x0: Initial state; its mode layout must match ``modes``
        grid: Time grid with n_steps >= 1
        modes: Burgers mode set carrying the noise coefficients beta_k
        law: Stable law of the scalar drivers
        seed: Master seed of the driving path
        replica: Replica index of the driving path
        nonlinear: Include the transport term
        beta_exp: Noise decay exponent, checked against beta > 1 + 1/(2 alpha)
        jump_threshold: Multiple of the median step jump that counts as a jump

    Returns:
        Tuple[FieldPath, BurgersDiagnostics]: Trajectory (role X) and diagnostics
    """
    if beta_exp is not None and not burgers_regime_ok(beta_exp, law.alpha):
        logger.warning(
            f"beta_exp={beta_exp} <= 1 + 1/(2 alpha) = {1 + 1 / (2 * law.alpha):.4g}; "
            f"the mild solution may not exist"
        )
    driving = simulate_driving(modes, law, grid, seed, replica)
    return solve_driven(x0, driving, nonlinear=nonlinear, jump_threshold=jump_threshold)
