"""Experiment orchestration: validate, run, gate and write artifacts.

Example:
    >>> from stable_convolve.config import ExperimentConfig
    >>> from stable_convolve.runner import create_runner
    >>>
    >>> runner = create_runner(
    ...     ExperimentConfig(kind="small-ball", epsilon=1e9, replicas=200, out="run")
    ... )
    >>> outcome = runner.run()
    >>> outcome.exit_code, sorted(outcome.outputs)
    (0, ['manifest.json', 'report.json'])
"""

import logging
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from . import __version__
from .burgers import BurgersState, solve_path
from .config import ExperimentConfig, Violation, build_modes, validate
from .convolution import (
    convolve_by_parts,
    convolve_direct,
    decomposition_gap,
    simulate_driving,
    wiener_convolve,
    y_sup_ratio,
)
from .errors import BlowUpError, DegenerateRunError, DomainError, ReplicaBatchError
from .estimators import (
    doob_check,
    khintchine_check,
    moment_formula_check,
    small_ball,
    sup_moment,
)
from .replication import resolve_threads
from .reports import (
    write_field_csv,
    write_json,
    write_ladder_csv,
    write_series_csv,
    write_trajectory_csv,
)
from .spectral import hnorm
from .types import GridSpec, ModeSet, StableLaw

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_GATE_FAILED = 1
EXIT_CONFIG_ERROR = 2


class PathSummary(BaseModel):
    """Report of a single convolve or wiener path."""

    model_config = ConfigDict(frozen=True)

    kind: str
    n_modes: int
    n_steps: int
    horizon: float
    sup_norm: float
    decomposition_gap: Optional[float] = None
    y_sup_ratio_max: Optional[float] = None


class BurgersSummary(BaseModel):
    """Diagnostics of a Burgers trajectory; the energy series lives in energy.csv."""

    model_config = ConfigDict(frozen=True)

    n_wavenumbers: int
    nu: float
    max_jump: float
    jump_count: int
    jump_threshold: float
    alignment: float
    final_energy: float
    energy_series_ref: str


class RunManifest(BaseModel):
    """Everything needed to rerun an experiment: config echo, seed and version."""

    model_config = ConfigDict(frozen=True)

    package_version: str
    kind: str
    seed: int
    config: ExperimentConfig
    wall_time: float
    outputs: List[str]
    gates: Dict[str, bool]
    warnings: List[str]
    exit_code: int


class RunOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    exit_code: int
    gates: Dict[str, bool] = {}
    outputs: List[str] = []
    violations: List[Violation] = []
    message: str = ""


Artifact = Tuple[str, Callable[[Path], None]]


class ExperimentRunner:
    """Runs one validated experiment and writes its artifacts.

    Nothing is written unless validation passes and the experiment
    completes; the output directory then receives ``report.json``, an
    optional CSV (``ladder.csv`` or ``path.csv``) and ``manifest.json``.
    """

    def __init__(self, config: ExperimentConfig, threads: Optional[int] = None):
        """Initialize the runner.

        Args:
            config: Experiment configuration
            threads: Worker count; falls back to config.threads, then the
                STABLE_CONVOLVE_THREADS environment variable, then 1
        """
        self.config = config
        self.threads = resolve_threads(threads if threads is not None else config.threads)
        self.out_dir = Path(config.out)

    @property
    def law(self) -> StableLaw:
        return StableLaw(alpha=self.config.alpha)

    def _grid(self) -> GridSpec:
        return GridSpec(horizon=self.config.horizon, n_steps=self.config.n_steps)

    def _run_convolve(self, modes: ModeSet):
        driving = simulate_driving(modes, self.law, self._grid(), self.config.seed)
        z = convolve_direct(driving)
        y, _ = convolve_by_parts(driving)
        ratio = float(np.max(y_sup_ratio(driving, y)))
        report = PathSummary(
            kind="convolve",
            n_modes=len(modes),
            n_steps=self.config.n_steps,
            horizon=self.config.horizon,
            sup_norm=float(np.max(hnorm(modes, 0.0, z.values))),
            decomposition_gap=decomposition_gap(driving),
            y_sup_ratio_max=ratio,
        )
        gates = {"finite": z.is_finite and y.is_finite, "y_sup_bound": ratio <= 1.0 + 1e-12}
        return report, gates, [("path.csv", lambda p: write_field_csv(z, p))]

    def _run_wiener(self, modes: ModeSet):
        y, z = wiener_convolve(modes, self._grid(), self.config.seed)
        report = PathSummary(
            kind="wiener",
            n_modes=len(modes),
            n_steps=self.config.n_steps,
            horizon=self.config.horizon,
            sup_norm=float(np.max(hnorm(modes, 0.0, z.values))),
        )
        gates = {"finite": z.is_finite and y.is_finite}
        return report, gates, [("path.csv", lambda p: write_field_csv(z, p))]

    def _run_sup_moment(self, modes: ModeSet):
        c = self.config
        report = sup_moment(
            modes,
            None if c.engine == "wiener" else self.law,
            c.theta_tilde,
            c.p,
            c.ladder,
            c.n_steps,
            c.replicas,
            c.seed,
            engine=c.engine,
            nested=c.nested,
            n_jobs=self.threads,
        )
        estimates = [pt.estimate for pt in report.points]
        gates = {
            "slope": report.slope is not None
            and abs(report.slope - report.expected_slope) <= c.slope_tolerance,
        }
        if c.nested:
            gates["monotone"] = all(a <= b for a, b in zip(estimates, estimates[1:]))
        return report, gates, [("ladder.csv", lambda p: write_ladder_csv(report, p))]

    def _run_small_ball(self, modes: ModeSet):
        c = self.config
        report = small_ball(
            modes,
            self.law,
            c.theta_tilde,
            c.epsilon,
            c.horizon,
            c.n_steps,
            c.replicas,
            c.seed,
            n_jobs=self.threads,
        )
        gates = {
            "positive": report.wilson_lower > 0.0,
            "box_inside_ball": report.box_hits <= report.hits,
        }
        return report, gates, []

    def _run_doob(self, modes: ModeSet):
        c = self.config
        report = doob_check(
            modes,
            None if c.engine == "wiener" else self.law,
            c.theta_tilde,
            c.p,
            c.horizon,
            c.n_steps,
            c.replicas,
            c.seed,
            engine=c.engine,
            n_boot=c.n_boot,
            n_jobs=self.threads,
        )
        return report, {"doob_bound": report.passed}, []

    def _run_khintchine(self, modes: Optional[ModeSet]):
        c = self.config
        report = khintchine_check(c.h, c.p, c.replicas, c.seed)
        return report, {"khintchine": report.passed}, []

    def _run_moment_check(self, modes: ModeSet):
        c = self.config
        report = moment_formula_check(
            modes, self.law, c.theta, c.horizon, c.p, c.replicas, c.seed
        )
        return report, {"moment_formula": report.passed}, []

    def _run_burgers(self, modes: ModeSet):
        c = self.config
        coeffs = np.asarray(c.x0) if c.x0 is not None else np.zeros(len(modes))
        x0 = BurgersState(modes=modes, coeffs=coeffs, nu=c.nu)
        grid = self._grid()
        path, diagnostics = solve_path(
            x0,
            grid,
            modes,
            self.law,
            c.seed,
            nonlinear=c.nonlinear,
            beta_exp=c.modes.beta_exp if c.modes.source == "burgers" else None,
            jump_threshold=c.jump_threshold,
        )
        report = BurgersSummary(
            n_wavenumbers=len(modes) // 2,
            nu=c.nu,
            max_jump=diagnostics.max_jump,
            jump_count=diagnostics.jump_count,
            jump_threshold=diagnostics.jump_threshold,
            alignment=diagnostics.alignment,
            final_energy=diagnostics.energy[-1],
            energy_series_ref="energy.csv",
        )
        artifacts = [
            ("path.csv", lambda p: write_trajectory_csv(path, p)),
            (
                "energy.csv",
                lambda p: write_series_csv(grid.times, diagnostics.energy, p, "energy"),
            ),
        ]
        return report, {"finite": path.is_finite}, artifacts

    def _handlers(self):
        return {
            "convolve": self._run_convolve,
            "wiener": self._run_wiener,
            "sup-moment": self._run_sup_moment,
            "small-ball": self._run_small_ball,
            "doob": self._run_doob,
            "khintchine": self._run_khintchine,
            "moment-check": self._run_moment_check,
            "burgers": self._run_burgers,
        }

    def run(self) -> RunOutcome:
        """Validate, execute and write artifacts.

        Returns:
            RunOutcome with exit code 0 (all gates pass), 1 (a gate failed or
            the run degenerated) or 2 (configuration error)
        """
        config = self.config
        violations = validate(config)
        errors = [v for v in violations if v.level == "error"]
        warnings = [v for v in violations if v.level == "warning"]
        for v in warnings:
            logger.warning(str(v))
        if errors:
            for v in errors:
                logger.error(str(v))
            return RunOutcome(
                exit_code=EXIT_CONFIG_ERROR,
                violations=violations,
                message="; ".join(v.message for v in errors),
            )

        logger.info(
            f"Running {config.kind} (seed {config.seed}, {self.threads} threads)"
        )
        started = time.perf_counter()
        modes = None if config.kind == "khintchine" else build_modes(config.modes)
        try:
            report, gates, artifacts = self._handlers()[config.kind](modes)
        except DomainError as e:
            logger.error(f"Configuration rejected: {e}")
            return RunOutcome(exit_code=EXIT_CONFIG_ERROR, violations=violations, message=str(e))
        except (DegenerateRunError, ReplicaBatchError, BlowUpError) as e:
            logger.error(f"{config.kind} failed: {e}")
            return RunOutcome(
                exit_code=EXIT_GATE_FAILED,
                gates={"completed": False},
                violations=violations,
                message=str(e),
            )
        wall_time = time.perf_counter() - started

        self.out_dir.mkdir(parents=True, exist_ok=True)
        write_json(report, self.out_dir / "report.json")
        outputs = ["report.json"]
        for name, write in artifacts:
            write(self.out_dir / name)
            outputs.append(name)
        outputs.append("manifest.json")

        exit_code = EXIT_OK if all(gates.values()) else EXIT_GATE_FAILED
        for name, passed in gates.items():
            if not passed:
                logger.warning(f"Gate {name!r} failed")
        write_json(
            RunManifest(
                package_version=__version__,
                kind=config.kind,
                seed=config.seed,
                config=config,
                wall_time=wall_time,
                outputs=outputs,
                gates=gates,
                warnings=[str(v) for v in warnings],
                exit_code=exit_code,
            ),
            self.out_dir / "manifest.json",
        )
        logger.info(f"{config.kind} finished in {wall_time:.2f}s with exit code {exit_code}")
        return RunOutcome(
            exit_code=exit_code, gates=gates, outputs=outputs, violations=violations
        )


def create_runner(config: ExperimentConfig, threads: Optional[int] = None) -> ExperimentRunner:
    """Factory function to create an ExperimentRunner.

    Args:
        config: Experiment configuration
        threads: Worker count override

    Returns:
        Configured ExperimentRunner instance
    """
    return ExperimentRunner(config, threads)
