# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from enum import Enum
import math

from attr import attrib, attrs
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import bisect

from keepalive.components.errors import (DomainError, InsufficientDataError,
    InvalidParamsError)
from keepalive.components.point_process import (SimConfig, as_history,
    decayed_counts, simulate_many)
from keepalive.util import parse_str_enum_value
from keepalive.util.attrs_util import optional_cast, positive


DEFAULT_TRUNCATION = 200
DEFAULT_OPTIMIZED_TTL_HORIZON = 1440.0
BISECTION_TOLERANCE = 1e-9

@attrs(frozen=True)
class CostParams:
    c_p = attrib(converter=float, validator=positive)
    c_cs = attrib(converter=float, validator=positive)

    @property
    def ratio(self):
        return self.c_p / self.c_cs

    def to_dict(self):
        return { 'c_p': self.c_p, 'c_cs': self.c_cs }


WindowKind = Enum('WindowKind', ['zero', 'finite', 'infinite'])

@attrs(frozen=True)
class OptimalWindow:
    kind = attrib(converter=lambda v: parse_str_enum_value(v, WindowKind))
    tau = attrib(default=None, converter=optional_cast(float))

    def __attrs_post_init__(self):
        if self.kind == WindowKind.finite:
            if self.tau is None or not 0 < self.tau < math.inf:
                raise InvalidParamsError('tau', self.tau,
                    "a finite value > 0 for a finite window")
        elif self.tau is not None:
            raise InvalidParamsError('tau', self.tau,
                "no value for a %s window" % self.kind.name)

    @classmethod
    def zero(cls):
        return cls(WindowKind.zero)

    @classmethod
    def finite(cls, tau):
        return cls(WindowKind.finite, tau)

    @classmethod
    def infinite(cls):
        return cls(WindowKind.infinite)

    @classmethod
    def from_length(cls, length):
        if length <= 0:
            return cls.zero()
        if math.isinf(length):
            return cls.infinite()
        return cls.finite(length)

    @property
    def length(self):
        if self.kind == WindowKind.zero:
            return 0.0
        if self.kind == WindowKind.infinite:
            return math.inf
        return self.tau

    def to_schedule(self):
        return WindowSchedule.keep_alive(self.length)

    def to_dict(self):
        return { 'kind': self.kind.name, 'tau': self.tau }


def _as_windows(value):
    return tuple((float(start), float(end)) for start, end in value)

@attrs(frozen=True)
class WindowSchedule:
    """
    Keep-alive windows measured from the most recent arrival.
    Windows are closed intervals.
    """

    windows = attrib(converter=_as_windows, factory=tuple)

    @windows.validator
    def _check_windows(self, attribute, value):
        prev_end = None
        for start, end in value:
            if not (0 <= start < end) or math.isinf(start):
                raise InvalidParamsError('window', (start, end),
                    "0 <= start < end, finite start")
            if prev_end is not None and not prev_end < start:
                raise InvalidParamsError('window', (start, end),
                    "sorted, disjoint windows")
            prev_end = end

    @classmethod
    def keep_alive(cls, tau, prewarm=0.0):
        if tau <= 0:
            return cls()
        return cls([(prewarm, prewarm + tau)])

    @classmethod
    def always(cls):
        return cls([(0.0, math.inf)])

    def __len__(self):
        return len(self.windows)

    def __iter__(self):
        return iter(self.windows)

    @property
    def total_length(self):
        return sum(end - start for start, end in self.windows)

    def contains(self, x):
        return any(start <= x <= end for start, end in self.windows)

    def cached_time(self, x):
        return sum(max(0.0, min(end, x) - start)
            for start, end in self.windows)

    def to_list(self):
        return [list(w) for w in self.windows]


@attrs(frozen=True)
class WindowBounds:
    lower = attrib(converter=float)
    upper = attrib(converter=float)
    delta = attrib(converter=int)

    def to_dict(self):
        return { 'lower': self.lower, 'upper': self.upper,
            'delta': self.delta }


PolicyKind = Enum('PolicyKind', ['fixed', 'prewarm', 'schedule', 'optimal',
    'optimized_ttl', 'approx', 'offline'])

@attrs(frozen=True)
class PolicySpec:
    kind = attrib(converter=lambda v: parse_str_enum_value(v, PolicyKind))
    ttl = attrib(default=None, converter=optional_cast(float))
    prewarm = attrib(default=0.0, converter=float)
    schedule = attrib(default=None)
    truncation = attrib(default=DEFAULT_TRUNCATION, converter=int)
    seed = attrib(default=None)

    def __attrs_post_init__(self):
        if self.kind in {PolicyKind.fixed, PolicyKind.prewarm} and \
                (self.ttl is None or self.ttl < 0):
            raise InvalidParamsError('ttl', self.ttl,
                "a value >= 0 for the '%s' policy" % self.kind.name)
        if self.kind == PolicyKind.schedule and \
                not isinstance(self.schedule, WindowSchedule):
            raise InvalidParamsError('schedule', self.schedule,
                "a WindowSchedule")

    @classmethod
    def fixed(cls, ttl):
        return cls(PolicyKind.fixed, ttl=ttl)

    @classmethod
    def prewarmed(cls, prewarm, ttl):
        return cls(PolicyKind.prewarm, ttl=ttl, prewarm=prewarm)

    @classmethod
    def from_schedule(cls, schedule):
        return cls(PolicyKind.schedule, schedule=schedule)

    @classmethod
    def optimal(cls, truncation=DEFAULT_TRUNCATION):
        return cls(PolicyKind.optimal, truncation=truncation)

    @classmethod
    def optimized(cls, ttl=None, truncation=DEFAULT_TRUNCATION, seed=None):
        return cls(PolicyKind.optimized_ttl, ttl=ttl, truncation=truncation,
            seed=seed)

    @classmethod
    def approx(cls):
        return cls(PolicyKind.approx)

    @classmethod
    def offline(cls):
        return cls(PolicyKind.offline)

    @property
    def requires_params(self):
        return self.kind in {PolicyKind.optimal, PolicyKind.approx} or \
            (self.kind == PolicyKind.optimized_ttl and self.ttl is None)

    def constant_length(self, params=None, costs=None,
            horizon=DEFAULT_OPTIMIZED_TTL_HORIZON):
        """
        Keep-alive length of the history-independent single-window kinds.
        """

        if self.kind == PolicyKind.fixed:
            return self.ttl
        if self.kind == PolicyKind.approx:
            return tau_approx(params, costs)
        if self.kind == PolicyKind.optimized_ttl:
            if self.ttl is not None:
                return self.ttl
            return optimized_ttl(params, costs,
                SimConfig(seed=self.seed, horizon=horizon),
                truncation=self.truncation)
        raise DomainError("Policy '%s' has no constant keep-alive length" % \
            self.kind.name)

    def schedule_for(self, history, params=None, costs=None):
        if self.kind == PolicyKind.prewarm:
            return WindowSchedule.keep_alive(self.ttl, prewarm=self.prewarm)
        if self.kind == PolicyKind.schedule:
            return self.schedule
        if self.kind == PolicyKind.optimal:
            return optimal_hawkes_window(params, history, costs,
                truncation=self.truncation).to_schedule()
        if self.kind == PolicyKind.offline:
            raise DomainError("The offline policy depends on the next "
                "arrival and has no schedule")
        return WindowSchedule.keep_alive(self.constant_length(params, costs))

    def to_dict(self):
        d = { 'kind': self.kind.name }
        if self.ttl is not None:
            d['ttl'] = self.ttl
        if self.kind == PolicyKind.prewarm:
            d['prewarm'] = self.prewarm
        if self.kind == PolicyKind.schedule:
            d['windows'] = self.schedule.to_list()
        if self.kind in {PolicyKind.optimal, PolicyKind.optimized_ttl}:
            d['truncation'] = self.truncation
        return d


def windows_from_weights(params, weights, costs):
    """
    Closed-form optimal keep-alive lengths for an array of history
    weights sum_j exp(beta (t_j - t_last)). Zero windows are returned as 0,
    infinite ones as +inf.
    """

    weights = np.asarray(weights, dtype=float)
    margin = costs.ratio - params.lambda0
    if margin <= 0:
        return np.full(weights.shape, np.inf)
    if params.alpha == 0:
        return np.zeros(weights.shape)

    with np.errstate(divide='ignore'):
        tau = (math.log(params.alpha) + np.log(weights) - math.log(margin)) / \
            params.beta
    zero = (params.lambda0 + params.alpha * weights <= costs.ratio) | \
        ~(0 < tau)
    return np.where(zero, 0.0, tau)

def history_weights(arrivals, beta, truncation=DEFAULT_TRUNCATION,
        chunk_size=4096):
    """
    For every prefix of 'arrivals' returns the history weight over its
    'truncation' most recent arrivals. No truncation if it is None.
    """

    t = np.asarray(arrivals, dtype=float)
    if truncation is None or len(t) <= truncation:
        return decayed_counts(t, beta)

    padded = np.concatenate([np.full(truncation - 1, -np.inf), t])
    windows = sliding_window_view(padded, truncation)
    result = np.empty(len(t))
    for begin in range(0, len(t), chunk_size):
        end = min(begin + chunk_size, len(t))
        block = windows[begin:end]
        result[begin:end] = np.exp(beta * (block - t[begin:end, None])) \
            .sum(axis=1)
    return result

def optimal_hawkes_window(params, history, costs,
        truncation=DEFAULT_TRUNCATION):
    arrivals = as_history(history).arrivals
    if len(arrivals) == 0:
        raise DomainError("The history is empty, "
            "use the empty-history window instead")
    if truncation < 1:
        raise InvalidParamsError('truncation', truncation, "a value >= 1")

    recent = arrivals[-truncation:]
    weight = np.sum(np.exp(params.beta * (recent - recent[-1])))
    return OptimalWindow.from_length(
        float(windows_from_weights(params, weight, costs)))

def empty_history_window(params, costs):
    return OptimalWindow.from_length(
        float(windows_from_weights(params, 1.0, costs)))

def _gain_sign_states(values):
    # True where keeping is strictly profitable, zeros inherit the
    # neighbouring state so that touches without a sign change are ignored
    states = np.where(values < 0, 1, np.where(values > 0, -1, 0))
    nonzero = np.flatnonzero(states)
    if len(nonzero) == 0:
        return np.zeros(len(values), dtype=bool)
    filled = states.copy()
    filled[:nonzero[0]] = states[nonzero[0]]
    last = filled[0]
    for i in range(len(filled)):
        if filled[i] == 0:
            filled[i] = last
        last = filled[i]
    return filled > 0

def windows_from_hazard(hazard, costs, horizon, resolution=None):
    """
    Builds the optimal schedule for an arbitrary hazard function of the
    time elapsed since the last arrival, scanning the sign of
    c_p - c_cs * hazard(x) over [0, horizon]. A window still open at the
    horizon is extended to +inf.
    """

    if not 0 < horizon < math.inf:
        raise InvalidParamsError('horizon', horizon, "a finite value > 0")
    if resolution is None:
        resolution = horizon / 1e4
    if not 0 < resolution:
        raise InvalidParamsError('resolution', resolution, "a value > 0")

    def gain(x):
        return costs.c_p - costs.c_cs * float(hazard(x))

    steps = max(1, int(math.ceil(horizon / resolution)))
    grid = np.linspace(0.0, horizon, steps + 1)
    values = np.array([gain(x) for x in grid])
    if not np.all(np.isfinite(values)):
        raise DomainError("The hazard function has non-finite values "
            "on [0, %s]" % horizon)

    keep = _gain_sign_states(values)

    edges = [0.0] if keep[0] else []
    for i in np.flatnonzero(keep[1:] != keep[:-1]):
        a, b = grid[i], grid[i + 1]
        if values[i] * values[i + 1] < 0:
            edges.append(bisect(gain, a, b, xtol=BISECTION_TOLERANCE))
        elif values[i] == 0:
            edges.append(a)
        else:
            edges.append(b)
    if keep[-1]:
        edges.append(math.inf)

    return WindowSchedule(zip(edges[0::2], edges[1::2]))

def optimized_ttl(params, costs, sim=None, truncation=DEFAULT_TRUNCATION,
        n_realizations=1):
    """
    Mean of the per-arrival optimal window lengths over simulated arrivals.
    Zero windows count as 0, a single infinite window makes the result
    infinite.
    """

    if sim is None:
        sim = SimConfig(horizon=DEFAULT_OPTIMIZED_TTL_HORIZON)

    lengths = []
    for history in simulate_many(params, sim, n_realizations):
        if len(history) < 2:
            raise InsufficientDataError(2, len(history),
                'simulated arrivals')
        weights = history_weights(history.arrivals, params.beta, truncation)
        lengths.append(windows_from_weights(params, weights, costs))
    return optimized_ttl_from_lengths(np.concatenate(lengths))

def optimized_ttl_from_lengths(lengths):
    lengths = np.asarray(lengths, dtype=float)
    if np.any(np.isinf(lengths)):
        return math.inf
    return float(np.mean(lengths))

def _half_weight_count(weights):
    # 'weights' go from the most recent arrival backwards
    totals = np.cumsum(weights)
    return int(np.searchsorted(totals, 0.5 * totals[-1], side='left')) + 1

def window_bounds(params, history, costs, truncation=DEFAULT_TRUNCATION):
    """
    History-independent bounds on the optimal window length:
    lower <= tau_opt <= upper, where upper depends on the smallest count
    delta of the most recent arrivals carrying half of the history weight.
    """

    arrivals = as_history(history).arrivals
    if len(arrivals) == 0:
        raise DomainError("The history is empty")
    margin = costs.ratio - params.lambda0
    if margin <= 0:
        raise DomainError("Bounds exist only when c_p / c_cs > lambda0 "
            "(got %s <= %s)" % (costs.ratio, params.lambda0))

    if truncation is not None:
        arrivals = arrivals[-truncation:]
    weights = np.exp(params.beta * (arrivals[::-1] - arrivals[-1]))
    delta = _half_weight_count(weights)

    if params.alpha == 0:
        return WindowBounds(0.0, 0.0, delta)
    base = (math.log(params.alpha) - math.log(margin)) / params.beta
    return WindowBounds(lower=max(0.0, base),
        upper=max(0.0, base + (math.log(delta) + 1.0) / params.beta),
        delta=delta)

def tau_fixed(costs):
    return costs.c_cs / costs.c_p

def tau_approx(params, costs):
    tau_empty = empty_history_window(params, costs).length
    if math.isinf(tau_empty):
        return math.inf
    k = tau_fixed(costs)
    return math.sqrt(k * (tau_empty + k))

def approx_ratio_bound(params, costs):
    tau_empty = empty_history_window(params, costs).length
    if math.isinf(tau_empty):
        return 1.0
    return 1.0 + math.sqrt(1.0 / (costs.ratio * tau_empty + 1.0))

def ttl_ratio_bound(tau, tau_empty, costs):
    """
    Competitive ratio of a history-independent keep-alive length 'tau'
    against the per-history optimum, whose windows are all at least
    'tau_empty' long.
    """

    if math.isinf(tau_empty):
        first = 1.0
    else:
        first = 1.0 + costs.c_p * tau / (costs.c_p * tau_empty + costs.c_cs)
    if tau == 0:
        second = math.inf
    else:
        second = 1.0 + costs.c_cs / (costs.c_p * tau)
    return max(first, second)

def offline_optimal_cost(x, costs):
    if x < 0:
        raise DomainError("Inter-arrival time must be >= 0, got %s" % x)
    if costs.c_cs <= costs.c_p * x:
        return costs.c_cs
    return costs.c_p * x
