# Engine that sweeps the correlation measures over a grid, refines threshold crossings and checks the hierarchy

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from quantum.channels import ChannelFamily, evolve_stack, kraus_at
from quantum.errors import InvalidArgumentError, NumericalFailureError
from quantum.measures import Thresholds, concurrence, measure_columns, qsl_time
from quantum.states import DensityMatrix, WernerSpec, make_werner

from .models import (
    MEASURE_COLUMNS,
    CrossingEvent,
    CrossingReport,
    HierarchyVerdict,
    MeasureCrossings,
    RunConfig,
    Violation,
)
from .settings import thread_count

logger = logging.getLogger(__name__)

COLUMNS = ('t',) + MEASURE_COLUMNS

CROSSING_XTOL = 1e-10
MAX_BISECTIONS = 200
MINIMUM_XTOL = 1e-10
TIE_TOL = 1e-8
REVIVAL_RISE = 1e-6
IMPLICATION_TOL = 1e-9

# Hierarchy strongest first: name -> (trajectory column, Thresholds field)
HIERARCHY = {
    'f_lhv':         ('fidelity', 'f_lhv'),
    'bell':          ('bell', 'bell_classical'),
    's2':            ('s2', 'steering_zero'),
    's3':            ('s3', 'steering_zero'),
    'teleportation': ('fidelity', 'f_classical'),
    'entanglement':  ('concurrence', 'concurrence_zero'),
}


@dataclass
class Trajectory:
    frame: pd.DataFrame  # one row per grid point, columns COLUMNS
    axis: str = 't'

    @property
    def times(self) -> np.ndarray:
        return self.frame['t'].to_numpy()

    def values(self, column: str) -> np.ndarray:
        return self.frame[column].to_numpy()


@dataclass
class RunResult:
    config: RunConfig
    trajectory: Trajectory
    crossings: CrossingReport
    verdict: HierarchyVerdict


class StateEvaluator:
    """Evaluates the state and its measures at points of the sweep axis.

    The axis is the scaled time rate*t for trajectories and the Werner weight p for
    static sweeps. Points are evaluated in batches; failures are reported against the
    grid point that caused them.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.static = config.mode == 'static_werner'
        self.scale = config.time_scale()
        self.family: ChannelFamily = None if self.static else config.channel_family()
        self.rho0: DensityMatrix = None if self.static else config.initial_rho()

    def states_at(self, xs: np.ndarray) -> DensityMatrix:
        """(n, 4, 4) stack of states at the points `xs`."""
        if self.static:
            bell_index = self.config.initial_state.bell_index
            return np.array([make_werner(WernerSpec(p=float(x), bell_index=bell_index)) for x in xs])
        ops = []
        for x in xs:
            try:
                ops.append(kraus_at(self.family, x / self.scale).stacked())
            except NumericalFailureError as e:
                e.time = float(x)
                raise
        return evolve_stack(np.array(ops), self.rho0, self.config.noise_sides, times=xs)

    def state_at(self, x: float) -> DensityMatrix:
        return self.states_at(np.array([x], dtype=float))[0]

    def qsl_at(self, x: float, rho_t: DensityMatrix = None) -> float:
        cfg = self.config
        return qsl_time(
            self.family, self.rho0, x / self.scale,
            generator=cfg.qsl_generator,
            denominator_mode=cfg.qsl_denominator,
            noise_sides=cfg.noise_sides,
            rho_t=rho_t,
        )

    # Single measure, used by the crossing refiners
    def value(self, column: str, x: float) -> float:
        rho = self.state_at(x)
        if column == 'concurrence':
            return concurrence(rho)
        return float(measure_columns(rho, self.config.steering_eigen_mode, with_concurrence=False)[column])

    def _frame(self, xs: np.ndarray) -> pd.DataFrame:
        cfg = self.config
        rhos = self.states_at(xs)
        frame = pd.DataFrame({'t': xs})
        columns = measure_columns(rhos, cfg.steering_eigen_mode, with_concurrence='concurrence' in cfg.measures)
        for column in MEASURE_COLUMNS:
            if column not in cfg.measures:
                frame[column] = np.nan
            elif column == 'tau_qsl':
                frame[column] = np.nan if self.static else [self.qsl_at(x, rho) for x, rho in zip(xs, rhos)]
            else:
                frame[column] = columns[column]
        return frame

    def frame_at(self, xs: np.ndarray) -> pd.DataFrame:
        """One row per point of `xs`, columns COLUMNS."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        try:
            return self._frame(xs)
        except NumericalFailureError as e:
            if e.time is None:
                self._locate_failure(xs)
            raise
        except InvalidArgumentError as e:
            if len(xs) > 1:
                self._locate_failure(xs)
            raise InvalidArgumentError(f'{e} (at t={xs[0]:.10g})') from e

    def _locate_failure(self, xs: np.ndarray) -> None:
        # Re-run point by point; the first failing point raises with its time attached
        for x in xs:
            try:
                self._frame(np.array([x]))
            except NumericalFailureError as e:
                e.time = float(x)
                raise
            except InvalidArgumentError as e:
                raise InvalidArgumentError(f'{e} (at t={x:.10g})') from e


def _parallel_map(func: Callable[[object], object], items: Sequence) -> list:
    # pool.map keeps input order
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(func, items))


# ─────────────────────────────
# SWEEP
# ─────────────────────────────

def sweep(config: RunConfig) -> Trajectory:
    evaluator = StateEvaluator(config)
    grid = np.linspace(0.0, config.t_max, config.n_points)
    chunks = [c for c in np.array_split(grid, thread_count()) if len(c)]
    logger.info(
        f"Sweeping {config.name or 'config'} | points: {config.n_points}, end: {config.t_max}, "
        f"batches: {len(chunks)}"
    )
    frame = pd.concat(_parallel_map(evaluator.frame_at, chunks), ignore_index=True)
    return Trajectory(frame=frame[list(COLUMNS)], axis='p' if evaluator.static else 't')


# ─────────────────────────────
# CROSSINGS
# ─────────────────────────────

def bisect_crossing(predicate: Callable[[float], bool], lo: float, hi: float,
                    xtol: float = CROSSING_XTOL, max_iter: int = MAX_BISECTIONS) -> float:
    """Locate where `predicate` flips inside [lo, hi] to within `xtol`."""
    lo_state = predicate(lo)
    if predicate(hi) == lo_state:
        raise NumericalFailureError('Crossing bracket does not change state on re-evaluation', bracket=(lo, hi))
    for _ in range(max_iter):
        if hi - lo <= xtol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if predicate(mid) == lo_state:
            lo = mid
        else:
            hi = mid
    raise NumericalFailureError(f'Bisection did not reach {xtol:g} in {max_iter} steps', bracket=(lo, hi))


def refine_minimum(func: Callable[[float], float], a: float, b: float, c: float,
                   xtol: float = MINIMUM_XTOL) -> float:
    """Golden-section refinement of a grid minimum bracketed by (a, b, c)."""
    try:
        res = minimize_scalar(func, bracket=(a, b, c), method='golden', options={'xtol': xtol})
    except ValueError as e:
        logger.debug(f'Golden refinement rejected bracket ({a:.10g}, {b:.10g}, {c:.10g}): {e}')
        return float(b)
    x = float(res.x)
    return x if a <= x <= c else float(b)


def _minimum_revivals(values: np.ndarray, grid: np.ndarray, func: Callable[[float], float]) -> List[CrossingEvent]:
    # Strict interior minima followed by a rise above REVIVAL_RISE
    events = []
    n = len(values)
    for i in range(1, n - 1):
        if not (values[i] < values[i - 1] and values[i] < values[i + 1]):
            continue
        j = i + 1
        while j + 1 < n and values[j + 1] >= values[j]:
            j += 1
        if values[j] - values[i] <= REVIVAL_RISE:
            continue
        time = refine_minimum(func, grid[i - 1], grid[i], grid[i + 1])
        events.append(CrossingEvent(time=time, direction='revival', kind='minimum'))
    return events


def find_crossings(traj: Trajectory, thresholds: Thresholds, config: RunConfig) -> CrossingReport:
    evaluator = StateEvaluator(config)
    grid = traj.times
    measures = []

    for name, (column, field) in HIERARCHY.items():
        if column not in config.measures:
            continue
        threshold = getattr(thresholds, field)
        level = threshold + thresholds.margin
        values = traj.values(column)
        alive = values > level

        def is_alive(x, column=column, level=level):
            return evaluator.value(column, x) > level

        events = []
        for i in np.flatnonzero(alive[1:] != alive[:-1]) + 1:
            time = bisect_crossing(is_alive, grid[i - 1], grid[i])
            events.append(CrossingEvent(time=time, direction='death' if alive[i - 1] else 'revival'))

        if alive[0] and not events:
            events = _minimum_revivals(values, grid, lambda x, column=column: evaluator.value(column, x))

        logger.info(
            f"{name}: {'alive' if alive[0] else 'dead'} at start | "
            + (', '.join(f'{e.direction}@{e.time:.6g}' for e in events) or 'no crossings')
        )
        measures.append(MeasureCrossings(
            measure=name, column=column, threshold=threshold,
            initially_alive=bool(alive[0]), events=events,
        ))

    return CrossingReport(name=config.name, axis=traj.axis, measures=measures)


# ─────────────────────────────
# HIERARCHY
# ─────────────────────────────

def verify_hierarchy(report: CrossingReport) -> HierarchyVerdict:
    """Check that stronger correlations die first and weaker ones revive first."""
    chain = report.measures
    violations = []

    deaths = {m.measure: m.first_death() for m in chain}
    for i, stronger in enumerate(chain):
        for weaker in chain[i + 1:]:
            ds, dw = deaths[stronger.measure], deaths[weaker.measure]
            if dw is not None and (ds is None or ds > dw + TIE_TOL):
                violations.append(Violation(
                    chain='decay', stronger=stronger.measure, weaker=weaker.measure,
                    stronger_time=ds, weaker_time=dw,
                ))
    decay_ok = not violations

    revival_ok = None
    if report.has_revivals():
        before = len(violations)
        for i, stronger in enumerate(chain):
            for event in stronger.revivals():
                for weaker in chain[i + 1:]:
                    if not weaker.alive_at(event.time + TIE_TOL):
                        violations.append(Violation(
                            chain='revival', stronger=stronger.measure, weaker=weaker.measure,
                            stronger_time=event.time,
                        ))
        revival_ok = len(violations) == before

    for v in violations:
        logger.warning(f'Hierarchy violation ({v.chain}): {v.stronger} vs {v.weaker}')

    return HierarchyVerdict(
        decay_order_ok=decay_ok,
        revival_order_ok=revival_ok,
        label='both' if report.has_revivals() else 'decay',
        violations=violations,
    )


def pointwise_violations(traj: Trajectory, thresholds: Thresholds) -> List[float]:
    """Grid points where a stronger measure is above its threshold but a weaker one is not."""
    frame = traj.frame
    chain = [(column, getattr(thresholds, field)) for column, field in HIERARCHY.values()
             if not frame[column].isna().all()]
    bad = []
    for _, row in frame.iterrows():
        for (c1, t1), (c2, t2) in zip(chain, chain[1:]):
            if row[c1] > t1 + IMPLICATION_TOL and not row[c2] > t2:
                bad.append(float(row['t']))
                break
    return bad


# ─────────────────────────────
# QSL TURNING POINTS
# ─────────────────────────────

def qsl_turning_points(family: ChannelFamily, rho0: DensityMatrix, t_max: float, n_points: int,
                       **qsl_options) -> List[float]:
    """Times of the local maxima and minima of the QSL time on [0, t_max]."""
    if n_points < 3:
        raise InvalidArgumentError(f'Need at least 3 grid points, got {n_points}')
    grid = np.linspace(0.0, t_max, n_points)
    tau = np.array(_parallel_map(lambda t: qsl_time(family, rho0, t, **qsl_options), grid))
    slope = np.sign(np.diff(tau))

    points = []
    for i in range(1, n_points - 1):
        if slope[i - 1] > 0 and slope[i] < 0:
            sign = -1.0
        elif slope[i - 1] < 0 and slope[i] > 0:
            sign = 1.0
        else:
            continue

        def objective(t, sign=sign):
            return sign * qsl_time(family, rho0, t, **qsl_options)

        points.append(refine_minimum(objective, grid[i - 1], grid[i], grid[i + 1]))
    logger.info(f'{family.label}: {len(points)} QSL turning points on [0, {t_max:g}]')
    return points


def run_config(config: RunConfig) -> RunResult:
    trajectory = sweep(config)
    thresholds = config.threshold_values()
    crossings = find_crossings(trajectory, thresholds, config)
    verdict = verify_hierarchy(crossings)
    logger.info(
        f"{config.name}: label={verdict.label}, decay_order_ok={verdict.decay_order_ok}, "
        f"revival_order_ok={verdict.revival_order_ok}"
    )
    return RunResult(config=config, trajectory=trajectory, crossings=crossings, verdict=verdict)
