"""Monte Carlo checks of moment bounds, small-ball positivity and proof-step inequalities.

Every estimator runs independent replicas through
:func:`~stable_convolve.replication.run_replicas` and reduces the per-replica
rows in replica order, so results depend only on the seed. Replicas whose
rows overflow are counted as degenerate, excluded from means, and make the
run fail once they exceed 1%.

Example:
    >>> from stable_convolve.estimators import sup_moment
    >>> from stable_convolve.spectral import power_law_modes
    >>> from stable_convolve.types import StableLaw
    >>>
    >>> report = sup_moment(
    ...     power_law_modes(32, beta_exp=1.25), StableLaw(alpha=1.5),
    ...     theta_tilde=0.0, p=1.0, horizons=[2.0**-j for j in range(9, 3, -1)],
    ...     n_steps=4096, replicas=2000, seed=1,
    ... )
    >>> print(f"slope {report.slope:.3f} (expected {report.expected_slope:.3f})")
"""

import logging
import math
from functools import partial
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from .convolution import (
    direct_batch,
    ou_innovation_batch,
    stable_driving_batch,
    wiener_direct_batch,
    wiener_driving_batch,
)
from .errors import DomainError, InsufficientDataError
from .replication import run_replicas
from .spectral import check_assumption, check_hilbert_schmidt, power_weights
from .stable_rng import increments, moment_constant
from .types import GridSpec, ModeSet, RngStream, StableLaw, StreamDomain

logger = logging.getLogger(__name__)

Engine = Literal["stable", "wiener"]

MIN_LADDER_POINTS = 4
# summability is required strictly above the norm exponent
THETA_MARGIN = 0.01


class LadderPoint(BaseModel):
    """Estimate of E sup_{t<=T} ||A^theta_tilde Z(t)||^p at one horizon."""

    model_config = ConfigDict(frozen=True)

    horizon: float
    estimate: float
    stderr: float
    median_of_means: float
    replicas: int
    degenerate: int


class MomentReport(BaseModel):
    """Sup-moment estimates over a horizon ladder with the fitted log-log slope.

    Attributes:
        engine (str): "stable" or "wiener"
        alpha (float, optional): Stability index (None for Wiener noise)
        p (float): Moment order
        theta_tilde (float): Regularity exponent of the norm
        expected_slope (float): p/alpha (stable) or p/2 (Wiener)
        points (List[LadderPoint]): One entry per horizon, ascending
        slope (float, optional): Fitted exponent, when >= 4 points succeeded
        slope_stderr (float, optional): Standard error of the slope
    """

    model_config = ConfigDict(frozen=True)

    engine: Engine
    alpha: Optional[float]
    p: float
    theta_tilde: float
    n_steps: int
    nested: bool
    seed: int
    expected_slope: float
    points: List[LadderPoint]
    slope: Optional[float] = None
    slope_stderr: Optional[float] = None


class SmallBallReport(BaseModel):
    """Frequency of paths with sup_{t<=T} ||A^theta_tilde Z(t)||_H <= epsilon.

    ``box_hits`` counts paths inside the mode-wise box
    {sup_t |z_k| <= epsilon / (sqrt(2N) gamma_k^theta_tilde) for all k}, which
    is contained in the ball, so box_hits <= hits.
    """

    model_config = ConfigDict(frozen=True)

    epsilon: float
    horizon: float
    theta_tilde: float
    n_steps: int
    replicas: int
    hits: int
    probability: float
    confidence: float
    wilson_lower: float
    wilson_upper: float
    degenerate: int
    box_hits: int
    mode_product_estimate: float


class RatioReport(BaseModel):
    """Empirical ratio of two moments against a theoretical constant."""

    model_config = ConfigDict(frozen=True)

    name: str
    numerator: float
    denominator: float
    ratio: Optional[float]
    stderr: Optional[float]
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    bound: Optional[float] = None
    exact: Optional[float] = None
    replicas: int
    degenerate: int = 0
    status: Literal["ok", "degenerate"] = "ok"
    passed: bool


class MomentFormulaReport(BaseModel):
    """Empirical E||A^theta L_t||^p and the symmetrized aggregate against C(alpha,p) scale^p."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    p: float
    theta: float
    t: float
    replicas: int
    scale: float
    exact: float
    aggregate_estimate: float
    aggregate_stderr: float
    norm_estimate: float
    norm_stderr: float
    ratio: Optional[float]
    ratio_stderr: Optional[float]
    passed: bool


def _check_order(p: float, law: Optional[StableLaw], engine: Engine) -> None:
    if not p > 0.0:
        raise DomainError(f"moment order must be positive, got p={p}")
    if engine == "stable" and law is None:
        raise DomainError("the stable engine needs a StableLaw")
    if engine == "stable" and not law.is_gaussian and p >= law.alpha:
        raise DomainError(
            f"p={p} >= alpha={law.alpha}: alpha-stable noise only has p<alpha moments"
        )


def _mean_and_stderr(values: np.ndarray) -> Tuple[float, float]:
    if values.size == 0:
        return math.nan, math.nan
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def median_of_means(values: np.ndarray, groups: int = 10) -> float:
    """Median of the means of ``groups`` contiguous blocks of ``values``."""
    if values.size == 0:
        return math.nan
    groups = max(1, min(groups, values.size))
    return float(np.median([block.mean() for block in np.array_split(values, groups)]))


def _field_batch(
    engine: Engine,
    modes: ModeSet,
    law: Optional[StableLaw],
    grid: GridSpec,
    seed: int,
    replicas: Sequence[int],
) -> np.ndarray:
    """Stochastic convolution Z for a batch of replicas, shape (R, modes, n + 1)."""
    if engine == "wiener":
        paths = wiener_driving_batch(modes, grid, seed, replicas)
        innovations = ou_innovation_batch(modes, grid, seed, replicas)
        return wiener_direct_batch(
            modes.gammas, modes.betas, grid.step, paths, innovations
        )
    paths = stable_driving_batch(modes, law, grid, seed, replicas)
    return direct_batch(modes.gammas, modes.betas, grid.step, paths)


def _driving_field_batch(
    engine: Engine,
    modes: ModeSet,
    law: Optional[StableLaw],
    grid: GridSpec,
    seed: int,
    replicas: Sequence[int],
) -> np.ndarray:
    """Weighted driving field beta_k l_k(t_j) for a batch, shape (R, modes, n + 1)."""
    if engine == "wiener":
        paths = wiener_driving_batch(modes, grid, seed, replicas)
    else:
        paths = stable_driving_batch(modes, law, grid, seed, replicas)
    return modes.betas[:, None] * paths


def _norms(modes: ModeSet, theta: float, fields: np.ndarray) -> np.ndarray:
    """||A^theta v(t_j)||_H for a batch of fields, shape (R, n + 1)."""
    weights = power_weights(modes.gammas, theta)[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        return np.sqrt(np.sum((weights * fields) ** 2, axis=-2))


def _sup_moment_task(
    replicas: Sequence[int],
    engine: Engine,
    modes: ModeSet,
    law: Optional[StableLaw],
    grid: GridSpec,
    theta_tilde: float,
    p: float,
    indices: Sequence[int],
    seed: int,
) -> np.ndarray:
    fields = _field_batch(engine, modes, law, grid, seed, replicas)
    running = np.maximum.accumulate(_norms(modes, theta_tilde, fields), axis=-1)
    with np.errstate(over="ignore", invalid="ignore"):
        return running[:, list(indices)] ** p


def _warn_assumption(modes: ModeSet, law: Optional[StableLaw], engine: Engine, theta: float):
    if engine == "wiener":
        report = check_hilbert_schmidt(modes, theta)
    else:
        report = check_assumption(modes, law.alpha, theta)
    if not report.convergent:
        logger.warning(
            f"summability at theta={theta:.4g} looks divergent; "
            f"moment bounds may not apply"
        )


def sup_moment(
    modes: ModeSet,
    law: Optional[StableLaw],
    theta_tilde: float,
    p: float,
    horizons: Sequence[float],
    n_steps: int,
    replicas: int,
    seed: int,
    engine: Engine = "stable",
    nested: bool = True,
    batch_size: int = 32,
    n_jobs: Optional[int] = None,
) -> MomentReport:
    """Estimate E sup_{t<=T} ||A^theta_tilde Z(t)||^p along a ladder of horizons.

    With ``nested=True`` each replica is simulated once on [0, max T] with
    ``n_steps`` steps and every ladder point reads the sup over a prefix, so
    estimates are nondecreasing in T. With ``nested=False`` every horizon gets
    its own grid of ``n_steps`` steps.

    Args:
        modes: Mode set (beta read as q for the Wiener engine)
        law: Stable law (ignored by the Wiener engine)
        theta_tilde: Norm regularity exponent
        p: Moment order, p < alpha for stable noise
        horizons: Ladder of horizons T
        n_steps: Grid steps (over the largest horizon when nested)
        replicas: Replica count M
        seed: Master seed
        engine: "stable" (midpoint recursion) or "wiener" (exact OU)
        nested: Share one driving path across the ladder
        batch_size: Replicas per batch
        n_jobs: Worker count

    Returns:
        MomentReport with per-horizon estimates and the fitted slope

    Raises:
        DomainError: If p >= alpha for stable noise, or horizons are invalid
        DegenerateRunError: If more than 1% of replicas overflowed
    """
    _check_order(p, law, engine)
    ladder = sorted(float(T) for T in horizons)
    if not ladder or ladder[0] <= 0.0 or len(set(ladder)) != len(ladder):
        raise DomainError(f"horizons must be distinct and positive, got {horizons}")
    _warn_assumption(modes, law, engine, theta_tilde + THETA_MARGIN)

    columns = []
    if nested:
        grid = GridSpec(horizon=ladder[-1], n_steps=n_steps)
        indices = [grid.index_of(T) for T in ladder]
        task = partial(
            _sup_moment_task,
            engine=engine,
            modes=modes,
            law=law,
            grid=grid,
            theta_tilde=theta_tilde,
            p=p,
            indices=indices,
            seed=seed,
        )
        result = run_replicas(task, replicas, batch_size, n_jobs)
        result.check_errors("in sup_moment")
        result.check_degenerate("sup_moment")
        values = result.values.reshape(-1, len(ladder))
        for i, T in enumerate(ladder):
            # a replica that overflows late still counts at the shorter horizons
            finite = np.isfinite(values[:, i])
            degenerate = int(finite.size - np.count_nonzero(finite))
            columns.append((T, values[finite, i], degenerate))
    else:
        for T in ladder:
            grid = GridSpec(horizon=T, n_steps=n_steps)
            task = partial(
                _sup_moment_task,
                engine=engine,
                modes=modes,
                law=law,
                grid=grid,
                theta_tilde=theta_tilde,
                p=p,
                indices=[n_steps],
                seed=seed,
            )
            result = run_replicas(task, replicas, batch_size, n_jobs)
            result.check_errors(f"in sup_moment at T={T}")
            result.check_degenerate(f"sup_moment at T={T}")
            columns.append((T, result.values[result.finite_mask, 0], result.degenerate))

    points = []
    for T, column, degenerate in columns:
        estimate, stderr = _mean_and_stderr(column)
        points.append(
            LadderPoint(
                horizon=T,
                estimate=estimate,
                stderr=stderr,
                median_of_means=median_of_means(column),
                replicas=int(column.size),
                degenerate=degenerate,
            )
        )
        logger.info(f"T={T:.4g}: E sup ||Z||^p = {estimate:.4g} +/- {stderr:.2g}")

    expected = p / 2.0 if engine == "wiener" else p / law.alpha
    report = MomentReport(
        engine=engine,
        alpha=None if engine == "wiener" else law.alpha,
        p=p,
        theta_tilde=theta_tilde,
        n_steps=n_steps,
        nested=nested,
        seed=seed,
        expected_slope=expected,
        points=points,
    )
    try:
        slope, slope_stderr = fit_scaling_exponent(report)
    except InsufficientDataError as e:
        logger.info(f"No scaling fit: {e}")
        return report
    return report.model_copy(update={"slope": slope, "slope_stderr": slope_stderr})


def fit_scaling_exponent(report: MomentReport) -> Tuple[float, float]:
    """Ordinary least squares of log(estimate) on log(T).

    Only points with a positive, finite estimate are used.

    Raises:
        InsufficientDataError: If fewer than 4 usable points remain
    """
    usable = [
        pt
        for pt in report.points
        if math.isfinite(pt.estimate) and pt.estimate > 0.0
    ]
    if len(usable) < MIN_LADDER_POINTS:
        raise InsufficientDataError(
            f"need at least {MIN_LADDER_POINTS} positive ladder points, "
            f"got {len(usable)}"
        )
    x = np.log([pt.horizon for pt in usable])
    y = np.log([pt.estimate for pt in usable])
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr)


def wilson_interval(hits: int, trials: int, confidence: float = 0.99) -> Tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    z = stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0)
    phat = hits / trials
    a = phat + z * z / (2.0 * trials)
    b = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    c = 1.0 + z * z / trials
    return max(0.0, (a - b) / c), min(1.0, (a + b) / c)


def _small_ball_task(
    replicas: Sequence[int],
    modes: ModeSet,
    law: StableLaw,
    grid: GridSpec,
    theta_tilde: float,
    seed: int,
) -> np.ndarray:
    fields = _field_batch("stable", modes, law, grid, seed, replicas)
    sup_norm = np.max(_norms(modes, theta_tilde, fields), axis=-1)
    mode_sup = np.max(np.abs(fields), axis=-1)
    return np.concatenate([sup_norm[:, None], mode_sup], axis=1)


def small_ball(
    modes: ModeSet,
    law: StableLaw,
    theta_tilde: float,
    epsilon: float,
    T: float,
    n_steps: int,
    replicas: int,
    seed: int,
    confidence: float = 0.99,
    batch_size: int = 32,
    n_jobs: Optional[int] = None,
) -> SmallBallReport:
    """Count replicas whose whole grid path stays in the epsilon-ball.

    Degenerate replicas count as misses. With the same seed and step size,
    hits are nondecreasing in epsilon and nonincreasing in T.

    Raises:
        DomainError: If epsilon <= 0
        DegenerateRunError: If more than 1% of replicas overflowed
    """
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    grid = GridSpec(horizon=T, n_steps=n_steps)
    task = partial(
        _small_ball_task,
        modes=modes,
        law=law,
        grid=grid,
        theta_tilde=theta_tilde,
        seed=seed,
    )
    result = run_replicas(task, replicas, batch_size, n_jobs)
    result.check_errors("in small_ball")
    result.check_degenerate("small_ball")
    values = result.values
    total = result.replicas_processed
    hits = int(np.count_nonzero(values[:, 0] <= epsilon))

    n_modes = len(modes)
    radii = epsilon / (
        math.sqrt(2.0 * n_modes) * power_weights(modes.gammas, theta_tilde)
    )
    inside = values[:, 1:] <= radii[None, :]
    box_hits = int(np.count_nonzero(inside.all(axis=1)))
    per_mode = inside.mean(axis=0) if total else np.zeros(n_modes)
    lower, upper = wilson_interval(hits, total, confidence)
    logger.info(
        f"small ball eps={epsilon:g}, T={T:g}: {hits}/{total} hits, "
        f"Wilson lower bound {lower:.4g}"
    )
    return SmallBallReport(
        epsilon=epsilon,
        horizon=T,
        theta_tilde=theta_tilde,
        n_steps=n_steps,
        replicas=total,
        hits=hits,
        probability=hits / total if total else 0.0,
        confidence=confidence,
        wilson_lower=lower,
        wilson_upper=upper,
        degenerate=result.degenerate,
        box_hits=box_hits,
        mode_product_estimate=float(np.prod(per_mode)),
    )


def _doob_task(
    replicas: Sequence[int],
    engine: Engine,
    modes: ModeSet,
    law: Optional[StableLaw],
    grid: GridSpec,
    theta_tilde: float,
    p: float,
    seed: int,
) -> np.ndarray:
    fields = _driving_field_batch(engine, modes, law, grid, seed, replicas)
    norms = _norms(modes, theta_tilde, fields)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.stack([np.max(norms, axis=-1) ** p, norms[:, -1] ** p], axis=1)


def _bootstrap_ratio(
    numerator: np.ndarray, denominator: np.ndarray, n_boot: int, seed: int
) -> Tuple[float, float, float]:
    rng = RngStream(seed=seed, domain=StreamDomain.BOOTSTRAP).generator()
    size = numerator.size
    ratios = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, size, size=size)
        den = denominator[idx].sum()
        ratios[b] = numerator[idx].sum() / den if den > 0 else np.nan
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size < 2:
        return math.nan, math.nan, math.nan
    low, high = np.percentile(ratios, [2.5, 97.5])
    return float(np.std(ratios, ddof=1)), float(low), float(high)


def doob_check(
    modes: ModeSet,
    law: Optional[StableLaw],
    theta_tilde: float,
    p: float,
    T: float,
    n_steps: int,
    replicas: int,
    seed: int,
    engine: Engine = "stable",
    n_boot: int = 500,
    batch_size: int = 32,
    n_jobs: Optional[int] = None,
) -> RatioReport:
    """Compare E sup_{t<=T} ||A^theta_tilde L_t||^p with E ||A^theta_tilde L_T||^p.

    Doob's inequality bounds the ratio by (p/(p-1))^p. The check passes when
    the empirical ratio is at most the bound plus three bootstrap standard
    errors, or when both sides vanish (reported as "degenerate").

    Raises:
        DomainError: If p is outside (1, alpha) (p = 2 admitted at alpha = 2)
    """
    if not p > 1.0:
        raise DomainError(f"Doob's inequality needs p > 1, got p={p}")
    _check_order(p, law, engine)
    grid = GridSpec(horizon=T, n_steps=n_steps)
    task = partial(
        _doob_task,
        engine=engine,
        modes=modes,
        law=law,
        grid=grid,
        theta_tilde=theta_tilde,
        p=p,
        seed=seed,
    )
    result = run_replicas(task, replicas, batch_size, n_jobs)
    result.check_errors("in doob_check")
    result.check_degenerate("doob_check")
    values = result.values[result.finite_mask]
    bound = (p / (p - 1.0)) ** p
    lhs = float(values[:, 0].mean()) if values.size else 0.0
    rhs = float(values[:, 1].mean()) if values.size else 0.0
    if rhs == 0.0:
        return RatioReport(
            name="doob",
            numerator=lhs,
            denominator=rhs,
            ratio=None,
            stderr=None,
            bound=bound,
            replicas=result.replicas_processed,
            degenerate=result.degenerate,
            status="degenerate",
            passed=True,
        )
    ratio = lhs / rhs
    stderr, low, high = _bootstrap_ratio(values[:, 0], values[:, 1], n_boot, seed)
    passed = ratio <= bound + 3.0 * (stderr if math.isfinite(stderr) else 0.0)
    logger.info(f"Doob ratio {ratio:.4g} +/- {stderr:.2g} against bound {bound:.4g}")
    return RatioReport(
        name="doob",
        numerator=lhs,
        denominator=rhs,
        ratio=ratio,
        stderr=stderr,
        ci_low=low,
        ci_high=high,
        bound=bound,
        replicas=result.replicas_processed,
        degenerate=result.degenerate,
        passed=passed,
    )


def rademacher_signs(n_terms: int, count: int, stream: RngStream) -> np.ndarray:
    """``count`` rows of i.i.d. +/-1 signs, shape (count, n_terms)."""
    return 2.0 * stream.generator().integers(0, 2, size=(count, n_terms)) - 1.0


def khintchine_exact(h: Sequence[float], p: float) -> float:
    """(sum h^2)^{1/2} / (E|sum r_k h_k|^p)^{1/p} by enumerating all sign patterns."""
    h = np.asarray(h, dtype=np.float64)
    n = h.size
    patterns = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1) * 2.0 - 1.0
    moment = float(np.mean(np.abs(patterns @ h) ** p))
    return float(np.sqrt(np.sum(h * h)) / moment ** (1.0 / p))


def khintchine_check(
    h: Sequence[float],
    p: float,
    replicas: int,
    seed: int,
    batch_size: int = 10000,
    enumerate_limit: int = 16,
) -> RatioReport:
    """Monte Carlo Khintchine ratio (sum h^2)^{1/2} / (E'|sum r_k h_k|^p)^{1/p}.

    Sign blocks of ``batch_size`` rows come from the streams
    (seed, block, RADEMACHER). For up to ``enumerate_limit`` terms the exact
    ratio is also reported. The check passes when the ratio is at least 1
    for p <= 2 (within three standard errors) and finite otherwise.

    Raises:
        DomainError: If h is empty, all zero or not finite, or p <= 0

    Examples:
        >>> khintchine_check([1, 1, 1, 1], 1.0, 100000, seed=0).exact
        1.3333333333333333
    """
    h = np.asarray(h, dtype=np.float64)
    if h.size == 0 or not np.all(np.isfinite(h)) or not np.any(h != 0.0):
        raise DomainError("Khintchine check needs a nonzero finite sequence h")
    if not p > 0.0:
        raise DomainError(f"moment order must be positive, got p={p}")

    moments = []
    for block, start in enumerate(range(0, replicas, batch_size)):
        count = min(batch_size, replicas - start)
        stream = RngStream(seed=seed, replica=block, domain=StreamDomain.RADEMACHER)
        moments.append(np.abs(rademacher_signs(h.size, count, stream) @ h) ** p)
    samples = np.concatenate(moments)
    moment, moment_se = _mean_and_stderr(samples)
    l2 = float(np.sqrt(np.sum(h * h)))
    ratio = l2 / moment ** (1.0 / p)
    ratio_se = ratio * moment_se / (p * moment) if samples.size > 1 else math.nan
    exact = khintchine_exact(h, p) if h.size <= enumerate_limit else None

    if p <= 2.0:
        margin = 3.0 * (ratio_se if math.isfinite(ratio_se) else 0.0)
        passed = ratio >= 1.0 - margin - 1e-12
    else:
        passed = math.isfinite(ratio)
    if exact is not None and p <= 2.0:
        passed = passed and exact >= 1.0 - 1e-12
    return RatioReport(
        name="khintchine",
        numerator=l2,
        denominator=moment ** (1.0 / p),
        ratio=ratio,
        stderr=ratio_se,
        exact=exact,
        replicas=int(samples.size),
        passed=passed,
    )


def moment_formula_check(
    modes: ModeSet,
    law: StableLaw,
    theta: float,
    t: float,
    p: float,
    replicas: int,
    seed: int,
    batch_size: int = 10000,
) -> MomentFormulaReport:
    """Check E|sum_k r_k beta_k gamma_k^theta l_k(t)|^p = C(alpha, p) scale^p.

    The Rademacher-symmetrized sum is symmetric stable with scale
    (t sum_k |beta_k|^alpha gamma_k^{alpha theta})^{1/alpha}. Also reported is
    the empirical E||A^theta L_t||^p, which Khintchine's inequality ties to the
    same scale. Replica blocks of ``batch_size`` share one stream per mode.

    Raises:
        DomainError: If p >= alpha/2 (the estimator would have infinite variance)
    """
    if not p > 0.0:
        raise DomainError(f"moment order must be positive, got p={p}")
    if p >= law.alpha / 2.0:
        raise DomainError(
            f"p={p} >= alpha/2={law.alpha / 2.0}: the Monte Carlo estimator "
            f"would have infinite variance"
        )
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")

    weights = modes.betas * power_weights(modes.gammas, theta)
    norms, aggregates = [], []
    for block, start in enumerate(range(0, replicas, batch_size)):
        count = min(batch_size, replicas - start)
        draws = np.empty((count, len(modes)))
        for j, k in enumerate(modes.indices):
            rng = RngStream(seed=seed, replica=block, mode=int(k)).generator()
            draws[:, j] = increments(law, t, rng, count)
        signs = rademacher_signs(
            len(modes),
            count,
            RngStream(seed=seed, replica=block, domain=StreamDomain.RADEMACHER),
        )
        weighted = draws * weights[None, :]
        norms.append(np.sqrt(np.sum(weighted**2, axis=1)) ** p)
        aggregates.append(np.abs(np.sum(signs * weighted, axis=1)) ** p)

    norm_est, norm_se = _mean_and_stderr(np.concatenate(norms))
    agg_est, agg_se = _mean_and_stderr(np.concatenate(aggregates))
    scale = (t * float(np.sum(np.abs(weights) ** law.alpha))) ** (1.0 / law.alpha)
    exact = moment_constant(law.alpha, p) * scale**p
    if exact == 0.0:
        ratio, ratio_se = None, None
        passed = agg_est == 0.0
    else:
        ratio = agg_est / exact
        ratio_se = agg_se / exact
        passed = abs(ratio - 1.0) <= 3.0 * ratio_se
    logger.info(
        f"moment formula: empirical {agg_est:.4g} +/- {agg_se:.2g}, exact {exact:.4g}"
    )
    return MomentFormulaReport(
        alpha=law.alpha,
        p=p,
        theta=theta,
        t=t,
        replicas=replicas,
        scale=scale,
        exact=exact,
        aggregate_estimate=agg_est,
        aggregate_stderr=agg_se,
        norm_estimate=norm_est,
        norm_stderr=norm_se,
        ratio=ratio,
        ratio_stderr=ratio_se,
        passed=passed,
    )
