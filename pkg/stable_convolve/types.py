"""Core data models shared across the simulation stack, using Pydantic V2.

This module provides the records every other module passes around: the
stable law of a scalar driver, counter-based random streams, time grids,
spectral mode sets, and sampled driving/field paths.

Key features:
- Immutable, validated value types (frozen Pydantic models)
- Counter-based stream derivation, so parallel replicas never share streams
- Mode sets that behave like read-only sequences and round-trip through JSON
- Paths that carry their grid and mode set alongside the sample matrix

Example:
    >>> from stable_convolve.types import GridSpec, ModeSet, StableLaw
    >>>
    >>> law = StableLaw(alpha=1.5)
    >>> grid = GridSpec(horizon=1.0, n_steps=1024)
    >>> modes = ModeSet.model_validate('[{"k": 1, "gamma": 1.0, "beta": 1.0}]')
    >>> print(len(modes), grid.step)
    1 0.0009765625
"""

import json
import math
from enum import Enum, IntEnum
from typing import Iterator, List, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from .errors import DomainError

_UINT64_LIMIT = 2**64


class StableLaw(BaseModel):
    """Law of a standard symmetric alpha-stable process.

    The process l has characteristic function E exp(i lambda l(t)) =
    exp(-t |lambda|^alpha). alpha = 2 is the Gaussian edge case (variance 2t),
    admitted for cross-checks.

    Attributes:
        alpha (float): Stability index in (0, 2]
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(description="Stability index in (0, 2]")

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        if not (0.0 < v <= 2.0):
            raise ValueError(f"alpha out of range (0, 2]: {v}")
        return float(v)

    @property
    def is_gaussian(self) -> bool:
        return self.alpha == 2.0


class StreamDomain(IntEnum):
    """Purpose tag mixed into stream derivation so uses never collide."""

    DRIVING = 0
    OU_INNOVATION = 1
    RADEMACHER = 2
    BOOTSTRAP = 3


class RngStream(BaseModel):
    """A reproducible random stream identified by (seed, replica, mode).

    Streams are derived with :class:`numpy.random.SeedSequence` from the full
    identifier and drive a counter-based :class:`numpy.random.Philox`
    generator. Equal identifiers give bit-identical sequences; distinct
    identifiers give independent streams.

    Attributes:
        seed (int): Master seed, 0 <= seed < 2**64
        replica (int): Monte Carlo replica index
        mode (int): Mode index k (any integer, mapped injectively)
        domain (StreamDomain): What the stream is used for

    Examples:
        >>> stream = RngStream(seed=7, replica=0, mode=3)
        >>> a = stream.generator().standard_normal(4)
        >>> b = stream.generator().standard_normal(4)
        >>> bool((a == b).all())
        True
    """

    model_config = ConfigDict(frozen=True)

    seed: int
    replica: int = 0
    mode: int = 0
    domain: StreamDomain = StreamDomain.DRIVING

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if not (0 <= v < _UINT64_LIMIT):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {v}")
        return v

    @field_validator("replica")
    @classmethod
    def validate_replica(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"replica index must be nonnegative, got {v}")
        return v

    def entropy(self) -> List[int]:
        # zigzag keeps negative mode labels injective
        mode_key = 2 * self.mode if self.mode >= 0 else -2 * self.mode - 1
        return [self.seed, int(self.domain), self.replica, mode_key]

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of this stream."""
        sequence = np.random.SeedSequence(self.entropy())
        return np.random.Generator(np.random.Philox(sequence))


class GridSpec(BaseModel):
    """A uniform time grid t_j = j * T / n, j = 0..n.

    ``n_steps = 0`` describes the single-point grid {0}; operations that need
    a step size reject it.

    Attributes:
        horizon (float): Final time T > 0
        n_steps (int): Number of steps n >= 0
    """

    model_config = ConfigDict(frozen=True)

    horizon: float = Field(description="Final time T")
    n_steps: int = Field(description="Number of uniform steps")

    @field_validator("horizon")
    @classmethod
    def validate_horizon(cls, v: float) -> float:
        if not (v > 0.0 and math.isfinite(v)):
            raise ValueError(f"horizon must be positive and finite, got {v}")
        return float(v)

    @field_validator("n_steps")
    @classmethod
    def validate_n_steps(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"n_steps must be nonnegative, got {v}")
        return v

    @property
    def step(self) -> float:
        """Uniform step size T / n."""
        if self.n_steps == 0:
            raise DomainError("single-point grid (n_steps=0) has no step size")
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        if self.n_steps == 0:
            return np.zeros(1)
        return np.arange(self.n_steps + 1) * self.step

    def index_of(self, t: float) -> int:
        """Return the grid index j with t_j = t, for t on the grid."""
        j = round(t / self.step)
        if not math.isclose(j * self.step, t, rel_tol=1e-9, abs_tol=1e-15):
            raise DomainError(f"time {t} is not a point of {self!r}")
        if not (0 <= j <= self.n_steps):
            raise DomainError(f"time {t} outside [0, {self.horizon}]")
        return j


class ModeEntry(BaseModel):
    """One eigenpair of A together with its noise coefficient.

    Attributes:
        k (int): Mode index
        gamma (float): Eigenvalue gamma_k of A
        beta (float): Noise coefficient beta_k (q_k for Wiener noise)
    """

    model_config = ConfigDict(frozen=True)

    k: int
    gamma: float
    beta: float


class ModeSet(BaseModel):
    """Spectral data {(k, gamma_k, beta_k)} of a truncated diagonal operator.

    This is the operator A and the noise coefficients in one record. Entries
    are sorted by gamma (nondecreasing), every gamma is positive and finite,
    and indices are unique. Implements the read-only sequence protocol.

    Supports multiple input formats:
    - JSON document: '{"modes": [{"k": 1, "gamma": 1.0, "beta": 0.5}, ...]}'
    - Bare list of entries: [{"k": 1, "gamma": 1.0, "beta": 0.5}, ...]
    - List of ModeEntry objects

    Examples:
        >>> modes = ModeSet.model_validate(
        ...     [{"k": 1, "gamma": 1.0, "beta": 1.0}, {"k": 2, "gamma": 4.0, "beta": 0.25}]
        ... )
        >>> modes.gammas
        array([1., 4.])
        >>> ModeSet.model_validate_json(modes.model_dump_json()).betas
        array([1.  , 0.25])
    """

    model_config = ConfigDict(frozen=True)

    modes: List[ModeEntry] = Field(description="Eigen-entries sorted by gamma")

    @model_validator(mode="before")
    @classmethod
    def wrap_entries(cls, value):
        """Accept a bare list or a JSON string in place of the document."""
        if isinstance(value, str):
            value = json.loads(value)
        if isinstance(value, (list, tuple)):
            return {"modes": list(value)}
        return value

    @model_validator(mode="after")
    def check_spectrum(self) -> "ModeSet":
        gammas = [m.gamma for m in self.modes]
        for entry in self.modes:
            if not (math.isfinite(entry.gamma) and entry.gamma > 0.0):
                raise ValueError(
                    f"gamma must be positive and finite, got {entry.gamma} "
                    f"for k={entry.k}"
                )
            if not math.isfinite(entry.beta):
                raise ValueError(f"beta must be finite, got {entry.beta}")
        if any(b < a for a, b in zip(gammas, gammas[1:])):
            raise ValueError("modes must be sorted by gamma (nondecreasing)")
        indices = [m.k for m in self.modes]
        if len(set(indices)) != len(indices):
            raise ValueError("mode indices must be unique")
        return self

    @property
    def gammas(self) -> np.ndarray:
        return np.array([m.gamma for m in self.modes], dtype=np.float64)

    @property
    def betas(self) -> np.ndarray:
        return np.array([m.beta for m in self.modes], dtype=np.float64)

    @property
    def indices(self) -> np.ndarray:
        return np.array([m.k for m in self.modes], dtype=np.int64)

    def with_betas(self, betas) -> "ModeSet":
        """Return a copy with the noise coefficients replaced."""
        betas = np.asarray(betas, dtype=np.float64)
        if betas.shape != (len(self),):
            raise ValueError(f"expected {len(self)} coefficients, got {betas.shape}")
        return ModeSet(
            modes=[
                ModeEntry(k=m.k, gamma=m.gamma, beta=float(b))
                for m, b in zip(self.modes, betas)
            ]
        )

    def scaled(self, factor: float) -> "ModeSet":
        """Return a copy with every gamma multiplied by ``factor`` > 0."""
        if not factor > 0.0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        return ModeSet(
            modes=[
                ModeEntry(k=m.k, gamma=m.gamma * factor, beta=m.beta)
                for m in self.modes
            ]
        )

    # Sequence protocol implementation
    def __len__(self) -> int:
        return len(self.modes)

    def __getitem__(self, index):
        return self.modes[index]

    def __iter__(self) -> Iterator[ModeEntry]:  # type: ignore[override]
        return iter(self.modes)

    def __contains__(self, item) -> bool:
        return item in self.modes

    def __repr__(self) -> str:
        return f"ModeSet({len(self)} modes)"


class NoiseKind(str, Enum):
    STABLE = "stable"
    WIENER = "wiener"


class FieldRole(str, Enum):
    """What a :class:`FieldPath` holds."""

    L = "L"
    Y = "Y"
    Z = "Z"
    Z_W = "Z_W"
    X = "X"  # Burgers trajectory


def _as_float_matrix(value) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 2:
        raise ValueError(f"expected a 2-D (mode x time) array, got ndim={array.ndim}")
    return array


class DrivingPath(BaseModel):
    """Raw scalar driving paths l_k(t_j), one row per mode.

    The noise coefficients are not applied here; :meth:`weighted` gives
    the field L with rows beta_k l_k.

    Attributes:
        grid (GridSpec): Time grid of the samples
        modes (ModeSet): Mode set the rows belong to
        samples (numpy.ndarray): Matrix of shape (len(modes), n_steps + 1)
        noise (NoiseKind): Stable or Wiener driver
        law (StableLaw, optional): Law of the stable driver
        seed (int): Master seed the rows were drawn from
        replica (int): Replica index the rows were drawn for
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    modes: ModeSet
    samples: np.ndarray
    noise: NoiseKind = NoiseKind.STABLE
    law: Optional[StableLaw] = None
    seed: int = 0
    replica: int = 0

    @field_validator("samples", mode="before")
    @classmethod
    def validate_samples(cls, v) -> np.ndarray:
        return _as_float_matrix(v)

    @model_validator(mode="after")
    def check_shape(self) -> "DrivingPath":
        expected = (len(self.modes), self.grid.n_steps + 1)
        if self.samples.shape != expected:
            raise ValueError(
                f"samples shape {self.samples.shape} does not match {expected}"
            )
        if expected[0] and np.any(self.samples[:, 0] != 0.0):
            raise ValueError("driving paths must start at 0")
        return self

    def weighted(self) -> np.ndarray:
        """Return beta_k l_k(t_j), the field L on the grid."""
        return self.modes.betas[:, None] * self.samples

    def increments(self) -> np.ndarray:
        return np.diff(self.samples, axis=1)


class FieldPath(BaseModel):
    """Per-mode values v_k(t_j) of a derived field on a grid.

    Attributes:
        grid (GridSpec): Time grid
        modes (ModeSet): Mode set of the rows
        values (numpy.ndarray): Matrix of shape (len(modes), n_steps + 1)
        role (FieldRole): Which field the values represent
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    modes: ModeSet
    values: np.ndarray
    role: FieldRole

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v) -> np.ndarray:
        return _as_float_matrix(v)

    @model_validator(mode="after")
    def check_shape(self) -> "FieldPath":
        expected = (len(self.modes), self.grid.n_steps + 1)
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match {expected}"
            )
        return self

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def at(self, j: int) -> np.ndarray:
        """Coefficient vector at grid index j."""
        return self.values[:, j]
