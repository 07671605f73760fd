"""Symmetric alpha-stable increments, paths and fractional moments.

Samples follow the convention E exp(i lambda l(t)) = exp(-t |lambda|^alpha),
so an increment over a step dt is dt^(1/alpha) times a standard draw. Draws
use the Chambers-Mallows-Stuck transform specialized to the symmetric case
(uniform angle plus unit exponential).

Example:
    >>> from stable_convolve.stable_rng import moment_constant, sample_path
    >>> from stable_convolve.types import GridSpec, RngStream, StableLaw
    >>>
    >>> path = sample_path(StableLaw(alpha=1.5), GridSpec(horizon=1.0, n_steps=8),
    ...                    RngStream(seed=1))
    >>> path.shape
    (9,)
    >>> round(moment_constant(1.0, 0.5), 6)  # E|X|^(1/2) for standard Cauchy
    1.414214
"""

import logging
import math
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .types import GridSpec, RngStream, StableLaw

logger = logging.getLogger(__name__)

_HALF_PI = 0.5 * math.pi


def standard_symmetric(
    alpha: float, rng: np.random.Generator, size: Union[int, tuple] = 1
) -> np.ndarray:
    """Draw standard symmetric stable variables with E e^{i l X} = e^{-|l|^alpha}.

    Args:
        alpha: Stability index in (0, 2]
        rng: Generator to draw the uniform angle and exponential from
        size: Output shape

    Returns:
        numpy.ndarray: Independent draws of the requested shape
    """
    if not (0.0 < alpha <= 2.0):
        raise DomainError(f"alpha out of range (0, 2]: {alpha}")
    shape = (size,) if isinstance(size, int) else tuple(size)
    # angle and exponential interleaved per draw, so a longer request
    # extends a shorter one from the same stream
    u = rng.random(shape + (2,))
    phi = math.pi * (u[..., 0] - 0.5)
    w = -np.log1p(-u[..., 1])
    if alpha == 1.0:
        return np.tan(phi)
    if alpha == 2.0:
        return 2.0 * np.sqrt(w) * np.sin(phi)
    return (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )


def increments(
    law: StableLaw, dt: float, rng: np.random.Generator, size: Union[int, tuple]
) -> np.ndarray:
    """Draw independent increments l(dt) of shape ``size``."""
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    return dt ** (1.0 / law.alpha) * standard_symmetric(law.alpha, rng, size)


def sample_increment(law: StableLaw, dt: float, stream: RngStream) -> float:
    """Return one sample of l(dt) drawn from the start of ``stream``.

    Args:
        law: Stable law of the process
        dt: Time increment, must be positive
        stream: Stream to draw from; identical streams give identical samples

    Returns:
        float: A draw with characteristic function exp(-dt |lambda|^alpha)

    Raises:
        DomainError: If dt <= 0
    """
    return float(increments(law, dt, stream.generator(), 1)[0])


def sample_path(law: StableLaw, grid: GridSpec, stream: RngStream) -> np.ndarray:
    """Return l(t_j), j = 0..n, as cumulative sums of independent increments.

    Examples:
        >>> sample_path(StableLaw(alpha=1.0), GridSpec(horizon=1.0, n_steps=0),
        ...             RngStream(seed=0))
        array([0.])
    """
    path = np.zeros(grid.n_steps + 1)
    if grid.n_steps:
        steps = increments(law, grid.step, stream.generator(), grid.n_steps)
        np.cumsum(steps, out=path[1:])
    return path


def _check_moment_order(alpha: float, p: float) -> None:
    if not (0.0 < alpha <= 2.0):
        raise DomainError(f"alpha out of range (0, 2]: {alpha}")
    if not p > 0.0:
        raise DomainError(f"moment order must be positive, got p={p}")
    if alpha < 2.0 and p >= alpha:
        raise DomainError(
            f"p={p} >= alpha={alpha}: an alpha-stable law only has p<alpha moments"
        )


def moment_constant_closed_form(alpha: float, p: float) -> float:
    """Closed form of C(alpha, p) = E|X|^p at unit scale.

    For alpha < 2 this is 2 Gamma(p) sin(p pi/2) Gamma(1 - p/alpha) / pi; at
    alpha = 2 (X ~ Normal(0, 2)) it is 2^p Gamma((p+1)/2) / sqrt(pi).
    """
    _check_moment_order(alpha, p)
    if alpha == 2.0:
        return 2.0**p * special.gamma(0.5 * (p + 1.0)) / math.sqrt(math.pi)
    return (
        2.0
        * special.gamma(p)
        * math.sin(_HALF_PI * p)
        * special.gamma(1.0 - p / alpha)
        / math.pi
    )


@lru_cache(maxsize=256)
def moment_constant(alpha: float, p: float) -> float:
    """Return C(alpha, p) with E|X|^p = C(alpha, p) sigma^p.

    Here E exp(i lambda X) = exp(-sigma^alpha |lambda|^alpha). For alpha < 2
    the constant is evaluated by quadrature of the fractional-moment
    representation

        E|X|^p = 2 Gamma(p+1) sin(p pi/2) / pi * int_0^inf (1 - e^{-u^alpha}) u^{-p-1} du,

    valid for 0 < p < alpha <= 2. At alpha = 2 the law is Gaussian with
    variance 2 and every p > 0 is admitted.

    Args:
        alpha: Stability index in (0, 2]
        p: Moment order, 0 < p < alpha (any p > 0 when alpha = 2)

    Returns:
        float: The moment constant, cached per (alpha, p)

    Raises:
        DomainError: If p >= alpha < 2, since the moment is infinite

    Examples:
        >>> moment_constant(2.0, 2.0)
        2.0
    """
    _check_moment_order(alpha, p)
    if alpha == 2.0:
        return float(moment_constant_closed_form(alpha, p))

    def integrand(u: float) -> float:
        return -math.expm1(-(u**alpha)) * u ** (-p - 1.0)

    def smooth_part(u: float) -> float:
        if u == 0.0:
            return 1.0
        return -math.expm1(-(u**alpha)) / u**alpha

    # near 0 the integrand is smooth_part(u) * u^(alpha - p - 1)
    head, head_err = integrate.quad(
        smooth_part, 0.0, 1.0, weight="alg", wvar=(alpha - p - 1.0, 0.0)
    )
    tail, tail_err = integrate.quad(integrand, 1.0, math.inf, limit=200)
    logger.debug(
        f"moment_constant(alpha={alpha}, p={p}): quadrature error "
        f"{head_err + tail_err:.2e}"
    )
    prefactor = 2.0 * special.gamma(p + 1.0) * math.sin(_HALF_PI * p) / math.pi
    return float(prefactor * (head + tail))
