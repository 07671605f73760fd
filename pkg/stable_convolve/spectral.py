"""Diagonal operator calculus on a truncated eigenbasis.

A acts on coefficient vectors x = (x_k) by A e_k = gamma_k e_k, so fractional
powers, the semigroup e^{-At} and the H-norms are all mode-wise. Coefficient
arrays are aligned with a :class:`~stable_convolve.types.ModeSet` along
axis 0; trailing axes (e.g. time) broadcast.

Example:
    >>> import numpy as np
    >>> from stable_convolve.spectral import frac_power_apply, hnorm
    >>> from stable_convolve.types import ModeSet
    >>>
    >>> modes = ModeSet.model_validate(
    ...     [{"k": k, "gamma": float(k * k), "beta": 1.0} for k in (1, 2, 3)]
    ... )
    >>> frac_power_apply(modes, 0.5, np.ones(3))
    array([1., 2., 3.])
    >>> hnorm(modes, 0.0, np.array([0.0, 3.0, 4.0]))
    5.0
"""

import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import ContractError, DomainError
from .types import ModeEntry, ModeSet

logger = logging.getLogger(__name__)

Coeffs = np.ndarray


def _aligned(modes: ModeSet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[0] != len(modes):
        raise ContractError(
            f"coefficients of shape {x.shape} are not aligned with {len(modes)} modes"
        )
    return x


def _column(values: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape a per-mode vector so it broadcasts along axis 0."""
    return values.reshape(values.shape + (1,) * (ndim - 1))


def power_weights(gammas: np.ndarray, sigma: float) -> np.ndarray:
    """Return gamma_k^sigma, with gamma^0 = 1 for every gamma."""
    if sigma == 0.0:
        return np.ones_like(gammas)
    return gammas**sigma


def frac_power_apply(modes: ModeSet, sigma: float, x: Coeffs) -> Coeffs:
    """Apply A^sigma: returns (gamma_k^sigma x_k)_k.

    Raises:
        ContractError: If x is not aligned with ``modes``
    """
    x = _aligned(modes, x)
    return _column(power_weights(modes.gammas, sigma), x.ndim) * x


def apply_semigroup(modes: ModeSet, t: float, x: Coeffs) -> Coeffs:
    """Apply e^{-At}: returns (e^{-gamma_k t} x_k)_k.

    Raises:
        DomainError: If t < 0
        ContractError: If x is not aligned with ``modes``
    """
    if t < 0.0:
        raise DomainError(f"semigroup time must be nonnegative, got t={t}")
    x = _aligned(modes, x)
    return _column(np.exp(-modes.gammas * t), x.ndim) * x


def hnorm(modes: ModeSet, sigma: float, x: Coeffs):
    """Return ||A^sigma x||_H = (sum_k gamma_k^{2 sigma} x_k^2)^{1/2}.

    For 2-D input (modes x time) the norm is taken per column.
    """
    x = _aligned(modes, x)
    weighted = frac_power_apply(modes, sigma, x)
    norm = np.sqrt(np.sum(weighted * weighted, axis=0))
    return float(norm) if norm.ndim == 0 else norm


def semigroup_operator_norm(modes: ModeSet, sigma: float, t: float) -> float:
    """Return ||A^sigma e^{-At}|| = max_k gamma_k^sigma e^{-gamma_k t}."""
    if t < 0.0:
        raise DomainError(f"semigroup time must be nonnegative, got t={t}")
    gammas = modes.gammas
    return float(np.max(power_weights(gammas, sigma) * np.exp(-gammas * t)))


def semigroup_norm_bound(sigma: float, t: float) -> float:
    """Return (sigma / (e t))^sigma, the sup over u > 0 of u^sigma e^{-u t}.

    Uses the convention 0^0 = 1, so sigma = 0 gives 1.
    """
    if sigma < 0.0:
        raise DomainError(f"smoothing bound needs sigma >= 0, got {sigma}")
    if not t > 0.0:
        raise DomainError(f"smoothing bound needs t > 0, got {t}")
    if sigma == 0.0:
        return 1.0
    return (sigma / (math.e * t)) ** sigma


class SummabilityReport(BaseModel):
    """Diagnostic for the partial sum S = sum_k |beta_k|^alpha gamma_k^{alpha theta}.

    Attributes:
        alpha (float): Exponent applied to |beta_k|
        theta (float): Regularity exponent
        partial_sum (float): S over the whole truncation
        half_sum (float): S over the first half of the modes
        cauchy_gap (float): partial_sum - half_sum
        tail_fraction (float): Share of S contributed by the last quartile
        status (str): "convergent" or "divergence suspected"
    """

    model_config = ConfigDict(frozen=True)

    alpha: float
    theta: float
    n_modes: int
    partial_sum: float
    half_sum: float
    cauchy_gap: float
    tail_fraction: float
    status: Literal["convergent", "divergence suspected"]

    @property
    def convergent(self) -> bool:
        return self.status == "convergent"


def summability_terms(modes: ModeSet, alpha: float, theta: float) -> np.ndarray:
    """Return the per-mode terms |beta_k|^alpha gamma_k^{alpha theta}."""
    return np.abs(modes.betas) ** alpha * power_weights(modes.gammas, alpha * theta)


def check_assumption(modes: ModeSet, alpha: float, theta: float) -> SummabilityReport:
    """Evaluate the summability assumption on the truncation; never raises.

    The tail is the last quartile of the modes (at least two terms).
    Divergence is suspected when the terms there are not nonincreasing.

    Examples:
        >>> modes = ModeSet.model_validate(
        ...     [{"k": k, "gamma": float(k * k), "beta": 1.0} for k in range(1, 9)]
        ... )
        >>> check_assumption(modes, 1.0, 1.0).status
        'divergence suspected'
    """
    n = len(modes)
    if n == 0:
        return SummabilityReport(
            alpha=alpha,
            theta=theta,
            n_modes=0,
            partial_sum=0.0,
            half_sum=0.0,
            cauchy_gap=0.0,
            tail_fraction=0.0,
            status="convergent",
        )
    terms = summability_terms(modes, alpha, theta)
    total = float(np.sum(terms))
    half = float(np.sum(terms[: (n + 1) // 2]))
    tail_start = min(n - 2, (3 * n) // 4) if n >= 2 else 0
    tail = terms[tail_start:]
    tail_sum = float(np.sum(tail))
    increasing = np.diff(tail) > 1e-12 * np.abs(tail[:-1])
    status = "divergence suspected" if np.any(increasing) else "convergent"
    if not math.isfinite(total):
        status = "divergence suspected"
    if status != "convergent":
        logger.warning(
            f"summability sum |beta|^{alpha} gamma^{alpha * theta} looks divergent "
            f"over {n} modes (S={total:.4g})"
        )
    return SummabilityReport(
        alpha=alpha,
        theta=theta,
        n_modes=n,
        partial_sum=total,
        half_sum=half,
        cauchy_gap=total - half,
        tail_fraction=tail_sum / total if total > 0 else 0.0,
        status=status,
    )


def check_hilbert_schmidt(modes: ModeSet, theta: float) -> SummabilityReport:
    """Check ||A^theta Q||_HS^2 = sum_k q_k^2 gamma_k^{2 theta} with beta_k read as q_k."""
    return check_assumption(modes, 2.0, theta)


def burgers_modes(n: int, beta_exp: float, scale: float = 1.0) -> ModeSet:
    """Real-basis modes of -d^2/dxi^2 on mean-zero functions of the torus.

    For each wavenumber j = 1..n there are two channels, cos(j xi) with index
    2j - 1 and sin(j xi) with index 2j, both with gamma = j^2 and
    beta = scale * j^(-2 beta_exp).

    Raises:
        DomainError: If n < 1 or scale <= 0

    Examples:
        >>> burgers_modes(3, 1.25).gammas
        array([1., 1., 4., 4., 9., 9.])
    """
    if n < 1:
        raise DomainError(f"Burgers truncation needs N >= 1, got {n}")
    if not scale > 0.0:
        raise DomainError(f"noise scale must be positive, got {scale}")
    entries = []
    for j in range(1, n + 1):
        gamma = float(j * j)
        beta = scale * float(j) ** (-2.0 * beta_exp)
        entries.append(ModeEntry(k=2 * j - 1, gamma=gamma, beta=beta))
        entries.append(ModeEntry(k=2 * j, gamma=gamma, beta=beta))
    return ModeSet(modes=entries)


def power_law_modes(
    n: int, beta_exp: float, scale: float = 1.0, gamma_power: float = 2.0
) -> ModeSet:
    """Modes gamma_k = k^gamma_power, beta_k = scale * k^(-2 beta_exp), k = 1..n."""
    if n < 1:
        raise DomainError(f"mode count must be >= 1, got {n}")
    if not gamma_power > 0.0:
        raise DomainError(f"gamma_power must be positive, got {gamma_power}")
    return ModeSet(
        modes=[
            ModeEntry(
                k=k,
                gamma=float(k) ** gamma_power,
                beta=scale * float(k) ** (-2.0 * beta_exp),
            )
            for k in range(1, n + 1)
        ]
    )


def load_modes(path) -> ModeSet:
    """Read a mode set from a JSON document {"modes": [...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        return ModeSet.model_validate_json(fh.read())


def save_modes(modes: ModeSet, path, indent: Optional[int] = 2) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(modes.model_dump_json(indent=indent))
