"""stable-convolve: Stochastic convolutions of cylindrical alpha-stable noise.

A Python library and CLI that simulates Ornstein-Uhlenbeck type stochastic
convolutions Z(t) = int_0^t e^{-A(t-s)} dL_s on a spectral eigenbasis and
checks their moment and small-ball behavior by Monte Carlo.

This library provides:

1. **Stable Sampling**: Symmetric alpha-stable increments and paths from
   counter-based random streams, plus the fractional moment constant C(alpha, p).

2. **Two Convolution Routes**: The direct exponential recursion and the
   integration-by-parts form Z = L - Y on shared driving paths, with a Wiener
   counterpart using the exact OU transition.

3. **Monte Carlo Checks**: Sup-moment scaling exponents, small-ball
   positivity with Wilson bounds, and the Doob, Khintchine and stable-moment
   inequalities, parallelized over replicas with joblib.

4. **Stochastic Burgers**: A pseudospectral Galerkin solver driven by the
   same noise engine, with jump and energy diagnostics.

Quick Start:
    >>> from stable_convolve import StableLaw, GridSpec, power_law_modes
    >>> from stable_convolve import simulate_driving, convolve_by_parts
    >>>
    >>> modes = power_law_modes(16, beta_exp=1.25)
    >>> driving = simulate_driving(modes, StableLaw(alpha=1.5),
    ...                            GridSpec(horizon=1.0, n_steps=1024), seed=1)
    >>> y, z = convolve_by_parts(driving)
    >>>
    >>> # Or from the shell
    >>> # stable-convolve sup-moment --config ladder.json --out runs/ladder

For detailed usage examples, see the README.md file.
"""

__version__ = "0.1.0"

from typing import Optional

from .burgers import BurgersState, nonlinearity, solve_path, step_mild
from .config import ExperimentConfig, Violation, load_config, validate
from .convolution import (
    convolve_by_parts,
    convolve_direct,
    simulate_driving,
    wiener_convolve,
)
from .errors import (
    BlowUpError,
    ContractError,
    DegenerateRunError,
    DomainError,
    InsufficientDataError,
    ReplicaBatchError,
    StableConvolveError,
)
from .estimators import (
    MomentReport,
    SmallBallReport,
    doob_check,
    fit_scaling_exponent,
    khintchine_check,
    moment_formula_check,
    small_ball,
    sup_moment,
)
from .runner import ExperimentRunner, create_runner
from .spectral import (
    apply_semigroup,
    burgers_modes,
    check_assumption,
    frac_power_apply,
    hnorm,
    power_law_modes,
)
from .stable_rng import moment_constant, sample_increment, sample_path
from .types import (
    DrivingPath,
    FieldPath,
    GridSpec,
    ModeEntry,
    ModeSet,
    RngStream,
    StableLaw,
)


def run(config: ExperimentConfig, threads: Optional[int] = None) -> int:
    """Run one experiment and return its exit status.

    Args:
        config: Experiment configuration
        threads: Worker count (default: config, then STABLE_CONVOLVE_THREADS, then 1)

    Returns:
        0 when every gate passed, 1 on gate failure, 2 on configuration error
    """
    return create_runner(config, threads).run().exit_code


__all__ = [
    "StableLaw",
    "RngStream",
    "GridSpec",
    "ModeEntry",
    "ModeSet",
    "DrivingPath",
    "FieldPath",
    "sample_increment",
    "sample_path",
    "moment_constant",
    "frac_power_apply",
    "apply_semigroup",
    "hnorm",
    "check_assumption",
    "burgers_modes",
    "power_law_modes",
    "simulate_driving",
    "convolve_direct",
    "convolve_by_parts",
    "wiener_convolve",
    "MomentReport",
    "SmallBallReport",
    "sup_moment",
    "fit_scaling_exponent",
    "small_ball",
    "doob_check",
    "khintchine_check",
    "moment_formula_check",
    "BurgersState",
    "nonlinearity",
    "step_mild",
    "solve_path",
    "ExperimentConfig",
    "Violation",
    "load_config",
    "validate",
    "ExperimentRunner",
    "create_runner",
    "run",
    "StableConvolveError",
    "DomainError",
    "ContractError",
    "InsufficientDataError",
    "DegenerateRunError",
    "ReplicaBatchError",
    "BlowUpError",
]
