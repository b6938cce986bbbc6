# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

"""
Experiment harness: replays keep-alive policies over arrival histories,
Monte-Carlo cost curves for a known process, and the trace protocol
producing Pareto curves of cold starts against wasted memory.
"""

import logging as log
import math

from attr import attrib, attrs, evolve
import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from keepalive.components.cost import realized_cost
from keepalive.components.errors import (DataError, InvalidParamsError,
    MissingParamsError, NumericError)
from keepalive.components.estimation import (FitOptions, MIN_FIT_ARRIVALS,
    fit, goodness_of_fit)
from keepalive.components.point_process import (SimConfig,
    as_history, simulate)
from keepalive.components.policy import (DEFAULT_TRUNCATION, CostParams,
    PolicyKind, PolicySpec, empty_history_window, history_weights,
    optimized_ttl, optimized_ttl_from_lengths, tau_approx, tau_fixed,
    windows_from_weights)
from keepalive.components.trace import DAY_MINUTES
from keepalive.util import derive_seeds, parallel_map


DEFAULT_C_CS_GRID = (5, 10, 20, 30, 45, 60, 90, 120)
DEFAULT_BASELINE_TTL = 10.0
PARETO_POLICIES = ('fixed', 'optimal', 'optimized_ttl', 'approx', 'offline')
POPULATIONS = ('treated', 'all')

@attrs(frozen=True)
class ReplayMetrics:
    """
    Replay totals for one arrival history. 'per_interarrival_costs' has one
    entry per inter-arrival time; 'boundary_cost' holds the first cold start
    and the memory paid after the last arrival.
    """

    cold_starts = attrib(converter=int)
    wasted_memory_time = attrib(converter=float)
    warm_time_before_hits = attrib(converter=float)
    per_interarrival_costs = attrib(converter=lambda v: np.asarray(v, float),
        eq=False)
    boundary_cost = attrib(default=0.0, converter=float)
    n_arrivals = attrib(default=0, converter=int)

    @property
    def total_cost(self):
        return float(np.sum(self.per_interarrival_costs)) + self.boundary_cost

    @property
    def mean_interarrival_cost(self):
        if len(self.per_interarrival_costs) == 0:
            return math.nan
        return float(np.mean(self.per_interarrival_costs))

    def to_dict(self):
        return {
            'n_arrivals': self.n_arrivals,
            'cold_starts': self.cold_starts,
            'wasted_memory_time': self.wasted_memory_time,
            'warm_time_before_hits': self.warm_time_before_hits,
            'boundary_cost': self.boundary_cost,
            'total_cost': self.total_cost,
            'per_interarrival_costs':
                [float(c) for c in self.per_interarrival_costs],
        }

def _empty_metrics():
    return ReplayMetrics(0, 0.0, 0.0, [], 0.0, 0)

def _replay_lengths(t, lengths, costs, day_length):
    # lengths[i] is the keep-alive window opened by arrival i
    gaps = np.diff(t)
    tau = lengths[:-1]
    hit = gaps <= tau
    cached = np.minimum(gaps, tau)
    per_gap = costs.c_p * cached + np.where(hit, 0.0, costs.c_cs)

    trailing = 0.0
    if day_length is not None:
        trailing = min(lengths[-1], max(0.0, day_length - t[-1]))
    return ReplayMetrics(
        cold_starts=1 + np.count_nonzero(~hit),
        wasted_memory_time=float(np.sum(cached[~hit])) + trailing,
        warm_time_before_hits=float(np.sum(cached[hit])),
        per_interarrival_costs=per_gap,
        boundary_cost=costs.c_cs + costs.c_p * trailing,
        n_arrivals=len(t))

def _replay_offline(t, costs):
    gaps = np.diff(t)
    cold = costs.c_cs <= costs.c_p * gaps
    return ReplayMetrics(
        cold_starts=1 + np.count_nonzero(cold),
        wasted_memory_time=0.0,
        warm_time_before_hits=float(np.sum(gaps[~cold])),
        per_interarrival_costs=np.where(cold, costs.c_cs, costs.c_p * gaps),
        boundary_cost=costs.c_cs,
        n_arrivals=len(t))

def _replay_schedule(t, schedule, costs, day_length):
    cold_starts = 1
    wasted = warm = 0.0
    per_gap = []
    for x in np.diff(t):
        outcome = realized_cost(x, schedule, costs)
        per_gap.append(outcome.cost)
        if outcome.cold_start:
            cold_starts += 1
            wasted += outcome.cached_time
        else:
            warm += outcome.cached_time

    trailing = 0.0
    if day_length is not None:
        trailing = schedule.cached_time(max(0.0, day_length - t[-1]))
    return ReplayMetrics(cold_starts, wasted + trailing, warm, per_gap,
        costs.c_cs + costs.c_p * trailing, len(t))

def optimal_lengths(params, arrivals, costs, truncation=DEFAULT_TRUNCATION):
    """
    Optimal window length opened after each arrival, computed on the
    truncated history up to that arrival.
    """

    weights = history_weights(arrivals, params.beta, truncation)
    return windows_from_weights(params, weights, costs)

def replay(arrivals, policy, costs, params=None, day_length=DAY_MINUTES):
    """
    Walks the inter-arrival times of one history under 'policy'.

    The first arrival is a cold start. A hit accounts its cached time as
    warm time, a miss accounts it as waste. When 'day_length' is set, the
    window opened by the last arrival is cut at the day end and counted
    as waste.
    """

    t = as_history(arrivals).arrivals
    if policy.requires_params and params is None:
        raise MissingParamsError(policy.kind.name)
    if len(t) == 0:
        return _empty_metrics()

    kind = policy.kind
    if kind == PolicyKind.offline:
        return _replay_offline(t, costs)
    if kind == PolicyKind.optimal:
        lengths = optimal_lengths(params, t, costs, policy.truncation)
        return _replay_lengths(t, lengths, costs, day_length)
    if kind in {PolicyKind.fixed, PolicyKind.approx, PolicyKind.optimized_ttl}:
        length = policy.constant_length(params, costs,
            horizon=day_length or DAY_MINUTES)
        return _replay_lengths(t, np.full(len(t), length), costs, day_length)
    return _replay_schedule(t, policy.schedule_for(t, params, costs), costs,
        day_length)


def _window_costs(gaps, tau, costs):
    # broadcasts over a grid of window lengths in the leading axis
    hit = gaps <= tau
    return costs.c_p * np.minimum(gaps, tau) + np.where(hit, 0.0, costs.c_cs)

@attrs(frozen=True)
class CostCurve:
    params = attrib()
    costs = attrib()
    ttl_grid = attrib(converter=lambda v: np.asarray(v, float), eq=False)
    fixed_mean = attrib(converter=lambda v: np.asarray(v, float), eq=False)
    fixed_stderr = attrib(converter=lambda v: np.asarray(v, float), eq=False)
    optimal_mean = attrib(converter=float)
    optimal_stderr = attrib(converter=float)
    optimized_ttl = attrib(converter=float)
    optimized_ttl_cost = attrib(converter=float)
    approx_ttl = attrib(converter=float)
    approx_cost = attrib(converter=float)
    fixed_ttl = attrib(converter=float)
    fixed_ttl_cost = attrib(converter=float)
    n_events = attrib(converter=int)
    n_realizations = attrib(converter=int)
    seed = attrib(default=None)

    @property
    def best_fixed_cost(self):
        return float(np.min(self.fixed_mean))

    def to_frame(self):
        return pd.DataFrame({
            'ttl': self.ttl_grid,
            'mean_cost': self.fixed_mean,
            'stderr': self.fixed_stderr,
        })

    def summary(self):
        return {
            'params': self.params.to_dict(),
            'costs': self.costs.to_dict(),
            'optimal_mean_cost': self.optimal_mean,
            'optimal_stderr': self.optimal_stderr,
            'optimized_ttl': self.optimized_ttl,
            'optimized_ttl_cost': self.optimized_ttl_cost,
            'approx_ttl': self.approx_ttl,
            'approx_cost': self.approx_cost,
            'fixed_ttl': self.fixed_ttl,
            'fixed_ttl_cost': self.fixed_ttl_cost,
            'best_fixed_ttl': float(self.ttl_grid[np.argmin(self.fixed_mean)]),
            'best_fixed_cost': self.best_fixed_cost,
            'n_events': self.n_events,
            'n_realizations': self.n_realizations,
            'seed': self.seed,
        }

def cost_curve_experiment(params, costs, ttl_grid, n_events=600,
        n_realizations=100, seed=None, truncation=DEFAULT_TRUNCATION,
        threads=None):
    """
    Mean cost per inter-arrival time of fixed keep-alive lengths over
    'ttl_grid', of the per-history optimal policy, and of the optimized,
    approximate and c_cs / c_p keep-alive lengths, averaged over
    simulated realizations.
    """

    ttl_grid = np.sort(np.asarray(ttl_grid, dtype=float))
    seeds = derive_seeds(seed, n_realizations + 1)

    ttl = optimized_ttl(params, costs,
        SimConfig(seed=seeds[-1], n_events=n_events), truncation=truncation)
    extra = np.array([ttl, tau_approx(params, costs), tau_fixed(costs)])
    lengths = np.concatenate([ttl_grid, extra])

    def run(realization_seed):
        t = simulate(params,
            SimConfig(seed=realization_seed, n_events=n_events)).arrivals
        gaps = np.diff(t)
        if len(gaps) == 0:
            return None
        fixed = _window_costs(gaps[None, :], lengths[:, None], costs)
        optimal = _window_costs(gaps,
            optimal_lengths(params, t, costs, truncation)[:-1], costs)
        return np.append(fixed.mean(axis=1), optimal.mean())

    rows = [r for r in parallel_map(run, seeds[:-1], threads) if r is not None]
    if not rows:
        raise DataError("No realization produced two arrivals")
    rows = np.array(rows)
    means = rows.mean(axis=0)
    if 1 < len(rows):
        stderr = rows.std(axis=0, ddof=1) / math.sqrt(len(rows))
    else:
        stderr = np.zeros(rows.shape[1])

    g = len(ttl_grid)
    return CostCurve(params=params, costs=costs, ttl_grid=ttl_grid,
        fixed_mean=means[:g], fixed_stderr=stderr[:g],
        optimal_mean=means[-1], optimal_stderr=stderr[-1],
        optimized_ttl=ttl, optimized_ttl_cost=means[g],
        approx_ttl=extra[1], approx_cost=means[g + 1],
        fixed_ttl=extra[2], fixed_ttl_cost=means[g + 2],
        n_events=n_events, n_realizations=len(rows), seed=seed)

SWEEP_DEFAULTS = {
    'alpha': (0.8, 1.4, 2.0),
    'lambda0': (0.5, 0.75, 1.0),
    'beta': (1.8, 2.4, 3.0),
}

def parameter_sweep(base_params, costs, vary, values=None, ttl_grid=None,
        **kwargs):
    """
    Runs cost_curve_experiment once per value of the parameter 'vary'.
    Non-stationary combinations are skipped.
    """

    if vary not in SWEEP_DEFAULTS:
        raise InvalidParamsError('vary', vary,
            "one of %s" % ', '.join(SWEEP_DEFAULTS))
    if values is None:
        values = SWEEP_DEFAULTS[vary]
    if ttl_grid is None:
        ttl_grid = np.linspace(0.0, 5.0 * tau_fixed(costs), 50)

    curves = []
    for value in values:
        params = evolve(base_params, **{ vary: value })
        if not params.is_stationary:
            log.warning("Skipping %s=%s: the process is not stationary "
                "(branching ratio %.3f)", vary, value, params.branching_ratio)
            continue
        log.info("Cost curve for %s=%s", vary, value)
        curves.append(cost_curve_experiment(params, costs, ttl_grid,
            **kwargs))
    return curves


@attrs(frozen=True)
class ParetoPoint:
    c_cs = attrib(converter=float)
    avg_cold_starts_per_app = attrib(converter=float)
    normalized_wasted_memory = attrib(converter=float)

    def to_dict(self):
        return {
            'c_cs': self.c_cs,
            'avg_cold_starts_per_app': self.avg_cold_starts_per_app,
            'normalized_wasted_memory': self.normalized_wasted_memory,
        }

@attrs(frozen=True)
class SavingsSummary:
    avg_cold_start_savings = attrib(converter=float)
    avg_memory_savings = attrib(converter=float)

    def to_dict(self):
        return {
            'avg_cold_start_savings': self.avg_cold_start_savings,
            'avg_memory_savings': self.avg_memory_savings,
        }

def _curve_arrays(curve):
    points = sorted(curve, key=lambda p: p.avg_cold_starts_per_app)
    x = np.array([p.avg_cold_starts_per_app for p in points])
    y = np.array([p.normalized_wasted_memory for p in points])
    return x, y

def savings(fixed_curve, other_curve):
    """
    Area between two Pareto curves over their common cold-start range,
    positive when 'other_curve' wastes less memory. The area is divided by
    the extent of the memory values over that range to give cold-start
    savings and by the extent of the range itself to give memory savings.
    """

    fx, fy = _curve_arrays(fixed_curve)
    ox, oy = _curve_arrays(other_curve)
    if len(fx) == 0 or len(ox) == 0:
        raise DataError("Can't compare empty Pareto curves")

    low = max(fx[0], ox[0])
    high = min(fx[-1], ox[-1])
    area = 0.0
    x_extent = 0.0
    y_extent = 0.0
    if low < high:
        xs = np.union1d(fx, ox)
        xs = xs[(low <= xs) & (xs <= high)]
        fixed_y = np.interp(xs, fx, fy)
        other_y = np.interp(xs, ox, oy)
        diff = fixed_y - other_y
        area = float(trapezoid(diff, xs))
        tol = 1e-12 * max(1.0, np.max(np.abs(diff)))
        if np.any(tol < diff) and np.any(diff < -tol):
            log.warning("Pareto curves cross, the savings are a signed area")

        x_extent = float(high - low)
        ys = np.concatenate([fixed_y, other_y])
        y_extent = float(np.max(ys) - np.min(ys))
    else:
        log.warning("Pareto curves don't overlap on the cold-start axis")

    return SavingsSummary(
        avg_cold_start_savings=area / y_extent if y_extent else 0.0,
        avg_memory_savings=area / x_extent if x_extent else 0.0)

def dominates(curve, other, tolerance=1e-9):
    """
    True if no point of 'other' is strictly better than the lower
    envelope of 'curve' in both axes.
    """

    cx, cy = _curve_arrays(curve)
    for point in other:
        x, y = point.avg_cold_starts_per_app, point.normalized_wasted_memory
        weakly_better = (cx <= x + tolerance) & (cy <= y + tolerance)
        if not np.any(weakly_better):
            # outside the curve's range, compare with the interpolation
            if x < cx[0] or cx[-1] < x:
                continue
            if y + tolerance < np.interp(x, cx, cy):
                return False
    return True


GofMode = ('fix', 'no_fix')

@attrs(frozen=True)
class Selection:
    """
    Apps ranked by goodness of fit. 'treated' is the best-scoring share
    of the population, 'excluded' maps apps that couldn't be fitted
    to the reason.
    """

    population = attrib(converter=list)
    fits = attrib(factory=dict)
    scores = attrib(factory=dict)
    treated = attrib(factory=list, converter=list)
    excluded = attrib(factory=dict)
    gof_mode = attrib(default='fix')

    def to_dict(self):
        return {
            'gof_mode': self.gof_mode,
            'population': len(self.population),
            'candidates': len(self.scores),
            'treated': list(self.treated),
            'excluded': dict(self.excluded),
            'scores': { a: self.scores[a] for a in sorted(self.scores) },
            'params': { a: self.fits[a].params.to_dict()
                for a in sorted(self.fits) },
        }

def _app_seeds(dataset, seed):
    return dict(zip(dataset.app_ids, derive_seeds(seed, len(dataset))))

def fit_population(dataset, apps, fit_day, min_arrivals=MIN_FIT_ARRIVALS,
        fit_opts=None, seed=None, threads=None):
    """
    Fits every app on 'fit_day'. Returns (fits, excluded) dictionaries.
    """

    if fit_opts is None:
        fit_opts = FitOptions()
    seeds = _app_seeds(dataset, seed)

    def fit_one(app):
        history = dataset.get(app, fit_day)
        if len(history) < max(min_arrivals, MIN_FIT_ARRIVALS):
            return app, None, "%s arrivals on the fit day" % len(history)
        try:
            result = fit(history, opts=evolve(fit_opts, seed=seeds[app]))
        except (DataError, NumericError) as e:
            return app, None, str(e)
        if not result.params.is_stationary:
            return app, None, "non-stationary fit, branching ratio %.4g" % \
                result.params.branching_ratio
        return app, result, None

    fits = {}
    excluded = {}
    for app, result, reason in parallel_map(fit_one, apps, threads):
        if result is None:
            excluded[app] = reason
        else:
            fits[app] = result
    if excluded:
        log.info("%s apps excluded from treatment", len(excluded))
        for app, reason in sorted(excluded.items()):
            log.debug("App '%s' excluded from treatment: %s", app, reason)
    return fits, excluded

def select_treated(dataset, fit_day, gof_day, treat_fraction=0.25,
        gof_mode='fix', population=None, fits=None, excluded=None,
        min_arrivals=MIN_FIT_ARRIVALS, fit_opts=None, seed=None,
        threads=None):
    """
    Ranks the fitted apps by the KS statistic of their residuals and
    treats the best 'treat_fraction' share of the population.

    With gof_mode 'fix' the residuals come from 'gof_day', a day not used
    for fitting, with 'no_fix' from the fit day itself.
    """

    if gof_mode not in GofMode:
        raise InvalidParamsError('gof_mode', gof_mode,
            "one of %s" % ', '.join(GofMode))
    if not 0 <= treat_fraction <= 1:
        raise InvalidParamsError('treat_fraction', treat_fraction,
            "a value in [0, 1]")
    if population is None:
        population = dataset.app_ids
    if fits is None:
        fits, excluded = fit_population(dataset, population, fit_day,
            min_arrivals=min_arrivals, fit_opts=fit_opts, seed=seed,
            threads=threads)
    excluded = dict(excluded or {})

    score_day = gof_day if gof_mode == 'fix' else fit_day
    scores = {}
    for app in population:
        if app not in fits:
            continue
        history = dataset.get(app, score_day)
        if len(history) < 2:
            excluded[app] = "%s arrivals on the goodness-of-fit day" % \
                len(history)
            continue
        scores[app] = goodness_of_fit(fits[app].params, history).ks_statistic

    ranked = sorted(scores, key=lambda a: (scores[a], a))
    count = min(len(ranked), int(round(treat_fraction * len(population))))
    log.info("Treating %s of %s apps (%s candidates)",
        count, len(population), len(ranked))
    return Selection(population=population,
        fits={ a: fits[a] for a in scores }, scores=scores,
        treated=ranked[:count], excluded=excluded, gof_mode=gof_mode)


@attrs(frozen=True)
class TraceExperimentResult:
    curves = attrib()
    savings = attrib()
    selection = attrib()
    config = attrib(factory=dict)

    def to_frame(self):
        rows = []
        for population, by_policy in self.curves.items():
            for policy, points in by_policy.items():
                for p in points:
                    row = { 'population': population, 'policy': policy }
                    row.update(p.to_dict())
                    rows.append(row)
        return pd.DataFrame(rows, columns=['population', 'policy', 'c_cs',
            'avg_cold_starts_per_app', 'normalized_wasted_memory'])

    def summary(self):
        return {
            'config': self.config,
            'selection': {
                'gof_mode': self.selection.gof_mode,
                'population': len(self.selection.population),
                'candidates': len(self.selection.scores),
                'treated': len(self.selection.treated),
                'excluded': len(self.selection.excluded),
            },
            'savings': { population: { policy: s.to_dict()
                    for policy, s in by_policy.items() }
                for population, by_policy in self.savings.items() },
        }

def _simulated_weights(params, seed, truncation, horizon):
    t = simulate(params, SimConfig(seed=seed, horizon=horizon)).arrivals
    return history_weights(t, params.beta, truncation)

def _optimized_length(params, weights, costs):
    if len(weights) < 2:
        return empty_history_window(params, costs).length
    return optimized_ttl_from_lengths(
        windows_from_weights(params, weights, costs))

def trace_experiment(dataset, fit_day=8, gof_day=7, eval_day=9,
        c_cs_grid=DEFAULT_C_CS_GRID, treat_fraction=0.25, c_p=1.0,
        truncation=DEFAULT_TRUNCATION, untreated_ttl=DEFAULT_BASELINE_TTL,
        baseline_ttl=DEFAULT_BASELINE_TTL, gof_mode='fix',
        min_arrivals=MIN_FIT_ARRIVALS, population=None, selection=None,
        fit_opts=None, seed=None, threads=None):
    """
    The trace protocol: fit each app on 'fit_day', rank the fits on
    'gof_day', treat the best share and evaluate every policy on
    'eval_day' for each cold-start cost in 'c_cs_grid'.

    Apps outside the treated set keep a fixed 'untreated_ttl' window, or
    follow the fixed policy of the current grid point if it is None.
    Wasted memory is normalized by that of a fixed 'baseline_ttl' window
    on the same population.
    """

    for day in (fit_day, gof_day, eval_day):
        if day not in dataset.days:
            raise DataError("Day %s is not in the dataset (days: %s)" % \
                (day, dataset.days))

    if population is None:
        population = dataset.apps_with(eval_day)
    if selection is None:
        selection = select_treated(dataset, fit_day, gof_day,
            treat_fraction=treat_fraction, gof_mode=gof_mode,
            population=population, min_arrivals=min_arrivals,
            fit_opts=fit_opts, seed=seed, threads=threads)
    treated = set(selection.treated) & set(population)
    unstable = sorted(app for app in treated
        if not selection.fits[app].params.is_stationary)
    for app in unstable:
        log.warning("App '%s' has a non-stationary fit (branching ratio "
            "%.4g), it stays on the untreated window", app,
            selection.fits[app].params.branching_ratio)
    treated.difference_update(unstable)

    day_length = dataset.day_length
    sim_seeds = _app_seeds(dataset, derive_seeds(seed, 2)[1])
    arrivals = { app: dataset.get(app, eval_day).arrivals
        for app in population }

    def prepare(app):
        params = selection.fits[app].params
        try:
            simulated = _simulated_weights(params, sim_seeds[app],
                truncation, day_length)
        except NumericError as e:
            log.warning("App '%s' stays on the untreated window: %s",
                app, e)
            return app, None
        return app, (
            history_weights(arrivals[app], params.beta, truncation),
            simulated)
    weights = { app: w
        for app, w in parallel_map(prepare, sorted(treated), threads)
        if w is not None }
    treated.intersection_update(weights)

    baseline = { app: _replay_constant(arrivals[app], baseline_ttl,
            CostParams(c_p, 1.0), day_length)
        for app in population }

    members = {
        'treated': sorted(treated),
        'all': sorted(population),
    }
    curves = { name: { policy: [] for policy in PARETO_POLICIES }
        for name in POPULATIONS }
    for c_cs in c_cs_grid:
        costs = CostParams(c_p, c_cs)
        metrics = { policy: {} for policy in PARETO_POLICIES }
        fallback = tau_fixed(costs) if untreated_ttl is None else untreated_ttl
        for app in population:
            t = arrivals[app]
            metrics['fixed'][app] = _replay_constant(t, tau_fixed(costs),
                costs, day_length)
            metrics['offline'][app] = replay(t, PolicySpec.offline(), costs)
            if app in treated:
                params = selection.fits[app].params
                history_w, simulated_w = weights[app]
                lengths = {
                    'optimal': windows_from_weights(params, history_w, costs),
                    'optimized_ttl': _optimized_length(params, simulated_w,
                        costs),
                    'approx': tau_approx(params, costs),
                }
                for policy, length in lengths.items():
                    metrics[policy][app] = _replay_constant(t, length, costs,
                        day_length)
            else:
                untreated = _replay_constant(t, fallback, costs, day_length)
                for policy in ('optimal', 'optimized_ttl', 'approx'):
                    metrics[policy][app] = untreated

        for name in POPULATIONS:
            apps = members[name]
            if not apps:
                continue
            base_waste = sum(baseline[a].wasted_memory_time for a in apps)
            for policy in PARETO_POLICIES:
                cold = sum(metrics[policy][a].cold_starts for a in apps)
                waste = sum(metrics[policy][a].wasted_memory_time
                    for a in apps)
                curves[name][policy].append(ParetoPoint(c_cs=c_cs,
                    avg_cold_starts_per_app=cold / len(apps),
                    normalized_wasted_memory=waste / base_waste \
                        if base_waste else math.nan))
        log.info("Evaluated c_cs=%s", c_cs)

    summary = {}
    for name in POPULATIONS:
        if not members[name]:
            log.warning("The '%s' population is empty", name)
            curves[name] = {}
            continue
        summary[name] = { policy: savings(curves[name]['fixed'],
                curves[name][policy])
            for policy in PARETO_POLICIES if policy != 'fixed' }

    config = {
        'fit_day': fit_day, 'gof_day': gof_day, 'eval_day': eval_day,
        'c_cs_grid': list(c_cs_grid), 'treat_fraction': treat_fraction,
        'c_p': c_p, 'truncation': truncation,
        'untreated_ttl': untreated_ttl, 'baseline_ttl': baseline_ttl,
        'gof_mode': selection.gof_mode, 'seed': seed,
    }
    return TraceExperimentResult(curves=curves, savings=summary,
        selection=selection, config=config)

def _replay_constant(t, length, costs, day_length):
    if len(t) == 0:
        return _empty_metrics()
    if not isinstance(length, np.ndarray):
        length = np.full(len(t), length)
    return _replay_lengths(t, length, costs, day_length)


@attrs(frozen=True)
class GofProtocolComparison:
    pool = attrib(converter=list)
    fix = attrib()
    no_fix = attrib()
    fix_result = attrib(default=None)
    no_fix_result = attrib(default=None)

    @property
    def overlap(self):
        return len(set(self.fix.treated) & set(self.no_fix.treated))

    @property
    def overlap_fraction(self):
        size = max(len(self.fix.treated), len(self.no_fix.treated))
        if size == 0:
            return math.nan
        return self.overlap / size

    def to_dict(self):
        d = {
            'pool': len(self.pool),
            'fix_selected': len(self.fix.treated),
            'no_fix_selected': len(self.no_fix.treated),
            'overlap': self.overlap,
            'overlap_fraction': self.overlap_fraction,
        }
        for name, result in (('fix', self.fix_result),
                ('no_fix', self.no_fix_result)):
            if result is not None and 'treated' in result.savings:
                d[name + '_optimized_ttl_savings'] = \
                    result.savings['treated']['optimized_ttl'].to_dict()
        return d

def gof_protocol_comparison(dataset, fit_day=8, gof_day=7, eval_day=9,
        treat_fraction=0.25, evaluate=True, seed=None, threads=None,
        **kwargs):
    """
    Compares treating apps selected by goodness of fit on a held-out day
    with selecting them on the fit day itself. The pool is the apps
    invoked on all three days.
    """

    pool = [app for app in dataset.app_ids
        if all(len(dataset.get(app, d)) for d in (fit_day, gof_day, eval_day))]
    fits, excluded = fit_population(dataset, pool, fit_day,
        min_arrivals=kwargs.get('min_arrivals', MIN_FIT_ARRIVALS),
        fit_opts=kwargs.get('fit_opts'), seed=seed, threads=threads)

    selections = { mode: select_treated(dataset, fit_day, gof_day,
            treat_fraction=treat_fraction, gof_mode=mode, population=pool,
            fits=fits, excluded=excluded)
        for mode in GofMode }

    results = {}
    if evaluate:
        for mode, selection in selections.items():
            results[mode] = trace_experiment(dataset, fit_day=fit_day,
                gof_day=gof_day, eval_day=eval_day, population=pool,
                selection=selection, seed=seed, threads=threads, **kwargs)

    return GofProtocolComparison(pool=pool, fix=selections['fix'],
        no_fix=selections['no_fix'], fix_result=results.get('fix'),
        no_fix_result=results.get('no_fix'))
