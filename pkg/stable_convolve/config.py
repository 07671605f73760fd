"""Experiment configuration: parsing, overrides and validation.

An experiment is one JSON document with a ``kind`` discriminator. The model
only enforces types; :func:`validate` checks every semantic constraint and
returns all violations at once, so a run can be refused before anything is
written.

Example:
    >>> from stable_convolve.config import ExperimentConfig, validate
    >>>
    >>> config = ExperimentConfig.model_validate_json(
    ...     '{"kind": "sup-moment", "alpha": 1.5, "p": 1.0}'
    ... )
    >>> [v for v in validate(config) if v.level == "error"]
    []
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union, get_args

from pydantic import BaseModel, ConfigDict, Field

from .burgers import burgers_regime_ok, wavenumber_count
from .errors import StableConvolveError
from .spectral import (
    burgers_modes,
    check_assumption,
    check_hilbert_schmidt,
    load_modes,
    power_law_modes,
)
from .types import GridSpec, ModeSet

logger = logging.getLogger(__name__)

ExperimentKind = Literal[
    "convolve",
    "sup-moment",
    "small-ball",
    "doob",
    "khintchine",
    "moment-check",
    "burgers",
    "wiener",
]

KINDS = list(get_args(ExperimentKind))


class ModeSpec(BaseModel):
    """Where the mode set of an experiment comes from.

    Attributes:
        source (str): "power" (gamma_k = k^gamma_power, beta_k = scale k^(-2 beta_exp)),
            "burgers" (cos/sin channels of the torus) or "file" (JSON at ``path``)
        n_modes (int): Number of modes, or wavenumbers N for "burgers"
        beta_exp (float): Noise decay exponent
        scale (float): Noise amplitude
        gamma_power (float): Eigenvalue growth exponent for "power"
        path (str, optional): Mode set JSON for "file"
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    source: Literal["power", "burgers", "file"] = "power"
    n_modes: int = 16
    beta_exp: float = 1.25
    scale: float = 1.0
    gamma_power: float = 2.0
    path: Optional[str] = None


class ExperimentConfig(BaseModel):
    """One experiment, as read from the config file and CLI flags.

    Fields that an experiment kind does not use are ignored by it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    modes: ModeSpec = Field(default_factory=ModeSpec)
    alpha: float = 1.5
    horizon: float = 1.0
    horizons: Optional[List[float]] = None
    n_steps: int = 1024
    p: float = 1.0
    theta_tilde: float = 0.0
    theta: float = 0.0
    epsilon: float = 1.0
    replicas: int = 1000
    seed: int = 0
    out: str = "out"
    threads: Optional[int] = None
    engine: Literal["stable", "wiener"] = "stable"
    nested: bool = True
    n_boot: int = 500
    h: Optional[List[float]] = None
    nu: float = 0.1
    x0: Optional[List[float]] = None
    nonlinear: bool = True
    jump_threshold: float = 5.0
    slope_tolerance: float = 0.15

    @property
    def ladder(self) -> List[float]:
        """Horizons of a sup-moment run: explicit, or T 2^-j for j = 5..0."""
        if self.horizons:
            return sorted(self.horizons)
        return [self.horizon * 2.0**-j for j in range(5, -1, -1)]

    @property
    def uses_wiener(self) -> bool:
        return self.kind == "wiener" or (
            self.kind in ("sup-moment", "doob") and self.engine == "wiener"
        )


class Violation(BaseModel):
    """One problem found by :func:`validate`."""

    model_config = ConfigDict(frozen=True)

    level: Literal["error", "warning"]
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.level}: {self.field}: {self.message}"


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Read a config document and apply flag overrides (None values are skipped).

    A run manifest is accepted in place of a config; its config echo is used.

    Raises:
        pydantic.ValidationError: If the merged document is malformed
    """
    document: Dict[str, Any] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
        if "package_version" in document and isinstance(document.get("config"), dict):
            document = document["config"]
    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value
    return ExperimentConfig.model_validate(document)


def build_modes(spec: ModeSpec) -> ModeSet:
    """Construct the mode set described by ``spec``."""
    if spec.source == "burgers":
        return burgers_modes(spec.n_modes, spec.beta_exp, spec.scale)
    if spec.source == "file":
        return load_modes(spec.path)
    return power_law_modes(spec.n_modes, spec.beta_exp, spec.scale, spec.gamma_power)


def _mode_violations(config: ExperimentConfig) -> List[Violation]:
    spec = config.modes
    violations = []
    if spec.source == "file":
        if not spec.path:
            violations.append(
                Violation(level="error", field="modes.path", message="file source needs a path")
            )
        elif not Path(spec.path).is_file():
            violations.append(
                Violation(
                    level="error",
                    field="modes.path",
                    message=f"mode file not found: {spec.path}",
                )
            )
    else:
        if spec.n_modes < 1:
            violations.append(
                Violation(
                    level="error",
                    field="modes.n_modes",
                    message=f"need at least one mode, got {spec.n_modes}",
                )
            )
        if not spec.scale > 0.0:
            violations.append(
                Violation(
                    level="error",
                    field="modes.scale",
                    message=f"scale must be positive, got {spec.scale}",
                )
            )
        if spec.source == "power" and not spec.gamma_power > 0.0:
            violations.append(
                Violation(
                    level="error",
                    field="modes.gamma_power",
                    message=f"gamma_power must be positive, got {spec.gamma_power}",
                )
            )
    return violations


def _kind_violations(config: ExperimentConfig) -> List[Violation]:
    violations = []

    def error(field: str, message: str):
        violations.append(Violation(level="error", field=field, message=message))

    kind = config.kind
    alpha = config.alpha
    stable_moments = not config.uses_wiener and alpha < 2.0

    if kind in ("sup-moment", "doob", "moment-check", "khintchine") and not config.p > 0.0:
        error("p", f"moment order must be positive, got {config.p}")
    if kind in ("sup-moment", "doob") and stable_moments and config.p >= alpha:
        error(
            "p",
            f"p={config.p} >= alpha={alpha}: alpha-stable noise only has p<alpha moments",
        )
    if kind == "doob" and not config.p > 1.0:
        error("p", f"Doob's inequality needs p > 1, got {config.p}")
    if kind == "doob" and config.n_boot < 2:
        error("n_boot", f"need at least 2 bootstrap resamples, got {config.n_boot}")
    if kind == "moment-check" and config.p >= alpha / 2.0:
        error(
            "p",
            f"p={config.p} >= alpha/2={alpha / 2.0}: the estimator would have "
            f"infinite variance",
        )
    if kind == "small-ball" and not config.epsilon > 0.0:
        error("epsilon", f"epsilon must be positive, got {config.epsilon}")
    if kind == "khintchine":
        h = config.h or []
        if not h or not all(math.isfinite(v) for v in h) or not any(v != 0.0 for v in h):
            error("h", "need a nonzero finite sequence h")
    if kind == "sup-moment":
        ladder = config.ladder
        if any(not (T > 0.0 and math.isfinite(T)) for T in ladder):
            error("horizons", f"horizons must be positive, got {ladder}")
        elif len(set(ladder)) != len(ladder):
            error("horizons", "horizons must be distinct")
        elif config.nested and config.n_steps >= 1:
            grid = GridSpec(horizon=ladder[-1], n_steps=config.n_steps)
            for T in ladder:
                j = T / grid.step
                if not math.isclose(j, round(j), rel_tol=1e-9):
                    error(
                        "horizons",
                        f"T={T} is not a point of the {config.n_steps}-step grid on "
                        f"[0, {ladder[-1]}]",
                    )
    if kind == "burgers":
        if config.modes.source == "power":
            error("modes.source", "burgers experiments need source 'burgers' or 'file'")
        if not config.nu > 0.0:
            error("nu", f"viscosity must be positive, got {config.nu}")
        if not config.jump_threshold > 0.0:
            error("jump_threshold", f"must be positive, got {config.jump_threshold}")
        if config.modes.source == "burgers" and not burgers_regime_ok(
            config.modes.beta_exp, alpha
        ):
            violations.append(
                Violation(
                    level="warning",
                    field="modes.beta_exp",
                    message=(
                        f"beta_exp={config.modes.beta_exp} <= 1+1/(2 alpha)="
                        f"{1.0 + 1.0 / (2.0 * alpha):.6g}"
                    ),
                )
            )
    return violations


def validate(config: ExperimentConfig) -> List[Violation]:
    """Return every violation in ``config``; an empty list means valid.

    Structural problems are errors. A summability sum that looks divergent
    on the truncation, and a Burgers noise exponent outside the mild-solution
    regime, are warnings. Never raises.

    Examples:
        >>> validate(ExperimentConfig(kind="convolve", alpha=0.0))[0].message
        'alpha out of range (0, 2]: 0.0'
    """
    violations: List[Violation] = []

    def error(field: str, message: str):
        violations.append(Violation(level="error", field=field, message=message))

    if not (0.0 < config.alpha <= 2.0):
        error("alpha", f"alpha out of range (0, 2]: {config.alpha}")
    if not (config.horizon > 0.0 and math.isfinite(config.horizon)):
        error("horizon", f"horizon must be positive and finite, got {config.horizon}")
    if config.n_steps < 1:
        error("n_steps", f"n_steps must be at least 1, got {config.n_steps}")
    if config.replicas < 1:
        error("replicas", f"replicas must be at least 1, got {config.replicas}")
    if not (0 <= config.seed < 2**64):
        error("seed", f"seed must be a 64-bit unsigned integer, got {config.seed}")
    if config.threads is not None and config.threads < 1:
        error("threads", f"threads must be at least 1, got {config.threads}")
    if config.kind != "khintchine":
        violations.extend(_mode_violations(config))
    if violations:
        return violations

    violations.extend(_kind_violations(config))
    if config.kind == "khintchine" or any(v.level == "error" for v in violations):
        return violations

    try:
        modes = build_modes(config.modes)
        if config.kind == "burgers":
            wavenumber_count(modes)
    except (StableConvolveError, ValueError, OSError) as e:
        error("modes", f"cannot build mode set: {e}")
        return violations

    if config.kind == "burgers" and config.x0 is not None and len(config.x0) != len(modes):
        error("x0", f"initial state needs {len(modes)} coefficients, got {len(config.x0)}")
    theta = config.theta if config.kind == "moment-check" else config.theta_tilde
    if config.uses_wiener:
        report = check_hilbert_schmidt(modes, theta)
    else:
        report = check_assumption(modes, config.alpha, theta)
    if not report.convergent:
        violations.append(
            Violation(
                level="warning",
                field="modes",
                message=(
                    f"summability at theta={theta} looks divergent on "
                    f"{len(modes)} modes (S={report.partial_sum:.4g})"
                ),
            )
        )
    return violations
