"""Driving noise and stochastic convolution on a uniform grid.

Z(t) = int_0^t e^{-A(t-s)} dL_s is computed two ways from the same driving
path:

- directly, with the exact exponential recursion per mode and each step's
  increment placed at the step midpoint;
- by parts, as Z = L - Y with Y(t) = int_0^t A e^{-A(t-s)} L_s ds evaluated by
  exact-exponential quadrature of the left-endpoint piecewise-constant path.

Both recursions are linear first-order filters per mode and run through
:func:`scipy.signal.lfilter`. The ``*_batch`` functions work on stacked
replicas of shape (replicas, modes, n_steps + 1) and are what the Monte Carlo
estimators use; the path-level operations wrap them for one replica.

Example:
    >>> from stable_convolve.convolution import (
    ...     convolve_by_parts, convolve_direct, simulate_driving)
    >>> from stable_convolve.spectral import power_law_modes
    >>> from stable_convolve.types import GridSpec, StableLaw
    >>>
    >>> modes = power_law_modes(16, beta_exp=1.25)
    >>> driving = simulate_driving(modes, StableLaw(alpha=1.5),
    ...                            GridSpec(horizon=1.0, n_steps=1024), seed=3)
    >>> z = convolve_direct(driving)
    >>> y, z_parts = convolve_by_parts(driving)
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from .errors import ContractError, DomainError
from .spectral import check_hilbert_schmidt
from .stable_rng import increments
from .types import (
    DrivingPath,
    FieldPath,
    FieldRole,
    GridSpec,
    ModeSet,
    NoiseKind,
    RngStream,
    StableLaw,
    StreamDomain,
)

logger = logging.getLogger(__name__)


def _require_steps(grid: GridSpec) -> float:
    if grid.n_steps < 1:
        raise DomainError("the convolution engine needs a grid with n_steps >= 1")
    return grid.step


def exp_recursion(decay: np.ndarray, forcing: np.ndarray) -> np.ndarray:
    """Run v_{j+1} = decay_k v_j + forcing_{k,j} from v_0 = 0, per mode.

    Args:
        decay: Per-mode factors, shape (modes,)
        forcing: Per-step inputs, shape (..., modes, n)

    Returns:
        numpy.ndarray: Values of shape (..., modes, n + 1)
    """
    if forcing.shape[-2] != decay.shape[0]:
        raise ContractError(
            f"forcing for {forcing.shape[-2]} modes does not match {decay.shape[0]}"
        )
    out = np.zeros(forcing.shape[:-1] + (forcing.shape[-1] + 1,))
    if forcing.shape[-1] == 0:
        return out
    for i, a in enumerate(decay):
        out[..., i, 1:] = lfilter([1.0], [1.0, -a], forcing[..., i, :], axis=-1)
    return out


def stable_driving_batch(
    modes: ModeSet,
    law: StableLaw,
    grid: GridSpec,
    seed: int,
    replicas: Sequence[int],
) -> np.ndarray:
    """Raw stable paths l_k(t_j) for each replica, shape (R, modes, n + 1).

    Row (r, k) is drawn from ``RngStream(seed, replica=r, mode=k)``.
    """
    dt = _require_steps(grid)
    out = np.zeros((len(replicas), len(modes), grid.n_steps + 1))
    for i, replica in enumerate(replicas):
        for j, k in enumerate(modes.indices):
            rng = RngStream(seed=seed, replica=replica, mode=int(k)).generator()
            np.cumsum(increments(law, dt, rng, grid.n_steps), out=out[i, j, 1:])
    return out


def wiener_driving_batch(
    modes: ModeSet, grid: GridSpec, seed: int, replicas: Sequence[int]
) -> np.ndarray:
    """Standard Brownian paths w_k(t_j) (increment variance dt), shape (R, modes, n + 1)."""
    dt = _require_steps(grid)
    out = np.zeros((len(replicas), len(modes), grid.n_steps + 1))
    for i, replica in enumerate(replicas):
        for j, k in enumerate(modes.indices):
            rng = RngStream(seed=seed, replica=replica, mode=int(k)).generator()
            steps = np.sqrt(dt) * rng.standard_normal(grid.n_steps)
            np.cumsum(steps, out=out[i, j, 1:])
    return out


def ou_innovation_batch(
    modes: ModeSet, grid: GridSpec, seed: int, replicas: Sequence[int]
) -> np.ndarray:
    """Standard normals used to complete the exact OU transition, shape (R, modes, n)."""
    out = np.empty((len(replicas), len(modes), grid.n_steps))
    for i, replica in enumerate(replicas):
        for j, k in enumerate(modes.indices):
            stream = RngStream(
                seed=seed,
                replica=replica,
                mode=int(k),
                domain=StreamDomain.OU_INNOVATION,
            )
            out[i, j] = stream.generator().standard_normal(grid.n_steps)
    return out


def direct_batch(
    gammas: np.ndarray, betas: np.ndarray, dt: float, paths: np.ndarray
) -> np.ndarray:
    """z_{j+1} = e^{-gamma dt} z_j + e^{-gamma dt/2} beta (l_{j+1} - l_j)."""
    decay = np.exp(-gammas * dt)
    gain = betas * np.exp(-0.5 * gammas * dt)
    return exp_recursion(decay, gain[:, None] * np.diff(paths, axis=-1))


def by_parts_batch(
    gammas: np.ndarray, betas: np.ndarray, dt: float, paths: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (Y, Z) with y_{j+1} = e^{-gamma dt} y_j + (1 - e^{-gamma dt}) beta l_j and Z = beta l - Y."""
    decay = np.exp(-gammas * dt)
    gain = -np.expm1(-gammas * dt) * betas
    y = exp_recursion(decay, gain[:, None] * paths[..., :-1])
    z = betas[:, None] * paths - y
    return y, z


def wiener_direct_batch(
    gammas: np.ndarray,
    q: np.ndarray,
    dt: float,
    paths: np.ndarray,
    innovations: np.ndarray,
) -> np.ndarray:
    """Exact OU recursion z_{j+1} = e^{-gamma dt} z_j + q xi_j.

    xi_j = int e^{-gamma (t_{j+1} - s)} dw over the step is drawn jointly with
    the Brownian increment of the same step: it has variance
    (1 - e^{-2 gamma dt}) / (2 gamma) and covariance (1 - e^{-gamma dt}) / gamma
    with the increment.
    """
    decay = np.exp(-gammas * dt)
    positive = gammas > 0.0
    safe = np.where(positive, gammas, 1.0)
    variance = np.where(positive, -np.expm1(-2.0 * gammas * dt) / (2.0 * safe), dt)
    covariance = np.where(positive, -np.expm1(-gammas * dt) / safe, dt)
    slope = covariance / dt
    residual = np.sqrt(np.maximum(variance - slope * covariance, 0.0))
    xi = slope[:, None] * np.diff(paths, axis=-1) + residual[:, None] * innovations
    return exp_recursion(decay, q[:, None] * xi)


def _field(driving: DrivingPath, values: np.ndarray, role: FieldRole) -> FieldPath:
    """Wrap values computed from ``driving`` without revalidating its grid and modes."""
    values = np.asarray(values, dtype=np.float64)
    expected = (len(driving.modes), driving.grid.n_steps + 1)
    if values.shape != expected:
        raise ContractError(f"values shape {values.shape} does not match {expected}")
    return FieldPath.model_construct(
        grid=driving.grid, modes=driving.modes, values=values, role=role
    )


def simulate_driving(
    modes: ModeSet, law: StableLaw, grid: GridSpec, seed: int, replica: int = 0
) -> DrivingPath:
    """Simulate independent raw stable paths l_k, one per mode.

    Args:
        modes: Mode set; row k uses stream (seed, replica, k)
        law: Stable law of every l_k
        grid: Time grid with n_steps >= 1
        seed: Master seed
        replica: Replica index

    Returns:
        DrivingPath: Unweighted samples with l_k(0) = 0
    """
    samples = stable_driving_batch(modes, law, grid, seed, [replica])[0]
    return DrivingPath(
        grid=grid,
        modes=modes,
        samples=samples,
        noise=NoiseKind.STABLE,
        law=law,
        seed=seed,
        replica=replica,
    )


def simulate_wiener_driving(
    modes: ModeSet, grid: GridSpec, seed: int, replica: int = 0
) -> DrivingPath:
    """Simulate independent standard Brownian paths w_k, one per mode."""
    samples = wiener_driving_batch(modes, grid, seed, [replica])[0]
    return DrivingPath(
        grid=grid,
        modes=modes,
        samples=samples,
        noise=NoiseKind.WIENER,
        seed=seed,
        replica=replica,
    )


def weighted_driving(driving: DrivingPath) -> FieldPath:
    """The field L with rows beta_k l_k(t_j)."""
    return _field(driving, driving.weighted(), FieldRole.L)


def convolve_direct(driving: DrivingPath) -> FieldPath:
    """Stochastic convolution by the midpoint-placed exponential recursion."""
    dt = _require_steps(driving.grid)
    z = direct_batch(
        driving.modes.gammas, driving.modes.betas, dt, driving.samples[None]
    )[0]
    return _field(driving, z, FieldRole.Z)


def convolve_by_parts(driving: DrivingPath) -> Tuple[FieldPath, FieldPath]:
    """Stochastic convolution as Z = L - Y.

    Returns:
        Tuple[FieldPath, FieldPath]: (Y, Z), with Z = beta l - Y exactly
    """
    dt = _require_steps(driving.grid)
    y, z = by_parts_batch(
        driving.modes.gammas, driving.modes.betas, dt, driving.samples[None]
    )
    return _field(driving, y[0], FieldRole.Y), _field(driving, z[0], FieldRole.Z)


def convolve_wiener_direct(driving: DrivingPath) -> FieldPath:
    """Exact Gaussian OU recursion for a Wiener driving path."""
    if driving.noise != NoiseKind.WIENER:
        raise ContractError("exact OU transition needs a Wiener driving path")
    dt = _require_steps(driving.grid)
    innovations = ou_innovation_batch(
        driving.modes, driving.grid, driving.seed, [driving.replica]
    )
    z = wiener_direct_batch(
        driving.modes.gammas,
        driving.modes.betas,
        dt,
        driving.samples[None],
        innovations,
    )[0]
    return _field(driving, z, FieldRole.Z_W)


def wiener_convolve(
    modes: ModeSet, grid: GridSpec, seed: int, replica: int = 0
) -> Tuple[FieldPath, FieldPath]:
    """Wiener analogue Z_W(t) = Q W_t - int_0^t A e^{-A(t-s)} Q W_s ds.

    ``modes.betas`` are read as the Hilbert-Schmidt coefficients q_k.

    Returns:
        Tuple[FieldPath, FieldPath]: (Y, Z_W), Y from the by-parts quadrature
        and Z_W from the exact OU transition on the same Brownian path
    """
    report = check_hilbert_schmidt(modes, 0.0)
    if not report.convergent:
        logger.warning("Q does not look Hilbert-Schmidt on this truncation")
    driving = simulate_wiener_driving(modes, grid, seed, replica)
    y, _ = convolve_by_parts(driving)
    return y, convolve_wiener_direct(driving)


def decomposition_gap(driving: DrivingPath) -> float:
    """Max over modes and grid points of |Z_direct - (beta l - Y)|."""
    z_direct = convolve_direct(driving)
    _, z_parts = convolve_by_parts(driving)
    return float(np.max(np.abs(z_direct.values - z_parts.values)))


def y_sup_ratio(driving: DrivingPath, y: FieldPath) -> np.ndarray:
    """Per mode, sup_t |y_k| / (|beta_k| sup_t |l_k|); never exceeds 1.

    Modes with beta_k = 0 or an identically zero path report 0.
    """
    bound = np.abs(driving.modes.betas) * np.max(np.abs(driving.samples), axis=1)
    peak = np.max(np.abs(y.values), axis=1)
    return np.divide(peak, bound, out=np.zeros_like(peak), where=bound > 0)
