# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

"""
Exponential-kernel Hawkes processes: intensity, compensator, survival
of the next inter-arrival time and Ogata thinning simulation.

Time is measured in arbitrary units (minutes in the trace harness).
"""

import math

from attr import attrib, attrs, evolve
import numpy as np

from keepalive.components.errors import (CapExceededError, DomainError,
    InvalidParamsError)
from keepalive.util import derive_seeds
from keepalive.util.attrs_util import (non_negative, optional, optional_cast,
    positive)


DEFAULT_MAX_EVENTS = 10 ** 6

@attrs(frozen=True)
class HawkesParams:
    lambda0 = attrib(converter=float, validator=non_negative)
    alpha = attrib(converter=float, validator=non_negative)
    beta = attrib(converter=float, validator=positive)

    @classmethod
    def poisson(cls, rate, beta=1.0):
        return cls(lambda0=rate, alpha=0.0, beta=beta)

    @property
    def branching_ratio(self):
        return self.alpha / self.beta

    @property
    def is_stationary(self):
        return self.branching_ratio < 1

    @property
    def stationary_rate(self):
        """
        Long-run mean arrival rate, lambda0 / (1 - alpha / beta).
        """

        if not self.is_stationary:
            return math.inf
        return self.lambda0 / (1.0 - self.branching_ratio)

    def as_tuple(self):
        return (self.lambda0, self.alpha, self.beta)

    def to_dict(self):
        return { 'lambda0': self.lambda0, 'alpha': self.alpha,
            'beta': self.beta }


def _as_arrivals(value):
    if isinstance(value, History):
        return value.arrivals
    arrivals = np.array(value, dtype=float).reshape(-1)
    arrivals.setflags(write=False)
    return arrivals

@attrs(frozen=True, eq=False, repr=False)
class History:
    arrivals = attrib(converter=_as_arrivals)

    @arrivals.validator
    def _check_arrivals(self, attribute, value):
        if not np.all(np.isfinite(value)):
            raise DomainError("Arrival timestamps must be finite")
        if 1 < len(value) and not np.all(np.diff(value) > 0):
            raise DomainError("Arrival timestamps must be strictly increasing")

    def __len__(self):
        return len(self.arrivals)

    def __iter__(self):
        return iter(self.arrivals)

    def __eq__(self, other):
        if not isinstance(other, History):
            return False
        return np.array_equal(self.arrivals, other.arrivals)

    __hash__ = None

    def __repr__(self):
        return 'History(%s arrivals)' % len(self)

    @property
    def last(self):
        if len(self) == 0:
            return None
        return float(self.arrivals[-1])

    @property
    def gaps(self):
        return np.diff(self.arrivals)

    def prefix(self, count):
        return History(self.arrivals[:count])

    def truncated(self, count):
        """
        Keeps only the 'count' most recent arrivals.
        """

        if count < 1:
            raise InvalidParamsError('truncation', count, "a value >= 1")
        return History(self.arrivals[-count:])

    def shifted(self, offset):
        return History(self.arrivals + offset)

def as_history(value):
    if isinstance(value, History):
        return value
    return History(value)


@attrs(frozen=True)
class SimConfig:
    seed = attrib(default=None)
    n_events = attrib(default=None, converter=optional_cast(int),
        validator=optional(positive))
    horizon = attrib(default=None, converter=optional_cast(float),
        validator=optional(positive))
    max_events = attrib(default=DEFAULT_MAX_EVENTS, converter=int,
        validator=positive)

    def __attrs_post_init__(self):
        if self.n_events is None and self.horizon is None:
            raise InvalidParamsError('stop', None,
                "an event count or a time horizon")
        if self.n_events is not None and self.max_events < self.n_events:
            raise InvalidParamsError('n_events', self.n_events,
                "at most max_events (%s)" % self.max_events)


def decayed_counts(arrivals, beta):
    """
    For every arrival t_i returns S_i = sum_{j <= i} exp(-beta (t_i - t_j)).

    The running sum is accumulated in log space, relative to the last
    arrival, which keeps every exponent non-positive.
    """

    t = np.asarray(arrivals, dtype=float)
    if len(t) == 0:
        return np.empty(0)
    z = beta * (t - t[-1])
    return np.exp(np.logaddexp.accumulate(z) - z)

def last_excitation(params, arrivals):
    if len(arrivals) == 0 or params.alpha == 0:
        return 0.0
    return float(decayed_counts(arrivals, params.beta)[-1])

def _to_output(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value

def _elapsed(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("Elapsed time must be >= 0, got %s" % (x, ))
    return x

def elapsed_compensator(params, excitation, x):
    lambda0, alpha, beta = params.as_tuple()
    if lambda0 == 0:
        value = np.zeros_like(x)
    else:
        value = lambda0 * x
    if alpha != 0 and excitation != 0:
        value = value - (alpha / beta) * excitation * np.expm1(-beta * x)
    return value

def intensity(params, history, t):
    """
    Conditional intensity at 't', which must not precede the last arrival.
    An arrival exactly at 't' contributes its full jump.
    """

    arrivals = as_history(history).arrivals
    if len(arrivals) == 0:
        return params.lambda0
    last = arrivals[-1]
    if t < last:
        raise DomainError("Time %s precedes the last arrival %s" % (t, last))
    excitation = last_excitation(params, arrivals)
    return params.lambda0 + \
        params.alpha * excitation * math.exp(-params.beta * (t - last))

def compensator_increment(params, history, start, end):
    """
    Integral of the conditional intensity over [start, end].
    'end' may be +inf.
    """

    arrivals = as_history(history).arrivals
    if end < start:
        raise DomainError("Interval end %s precedes its start %s" % \
            (end, start))
    if len(arrivals) != 0 and start < arrivals[-1]:
        raise DomainError("Interval start %s precedes the last arrival %s" % \
            (start, arrivals[-1]))
    if end == start:
        return 0.0

    excitation = last_excitation(params, arrivals)
    if excitation:
        excitation *= math.exp(-params.beta * (start - arrivals[-1]))
    return float(elapsed_compensator(params, excitation,
        np.float64(end - start)))

def hazard(params, history, x):
    """
    Hazard rate of the next arrival, 'x' time units after the last one.
    """

    x = _elapsed(x)
    excitation = last_excitation(params, as_history(history).arrivals)
    value = params.lambda0 + \
        params.alpha * excitation * np.exp(-params.beta * x)
    return _to_output(value, x)

def survival(params, history, x):
    x = _elapsed(x)
    excitation = last_excitation(params, as_history(history).arrivals)
    return _to_output(
        np.exp(-elapsed_compensator(params, excitation, x)), x)

def density(params, history, x):
    x = _elapsed(x)
    excitation = last_excitation(params, as_history(history).arrivals)
    value = (params.lambda0 + \
            params.alpha * excitation * np.exp(-params.beta * x)) * \
        np.exp(-elapsed_compensator(params, excitation, x))
    return _to_output(value, x)

def sample_next_arrival(params, history, size, rng):
    """
    Draws 'size' next inter-arrival times by inverting the compensator.
    Returns +inf for draws where no further arrival happens, which is
    possible only when lambda0 = 0.
    """

    excitation = last_excitation(params, as_history(history).arrivals)
    mass = params.alpha / params.beta * excitation
    levels = rng.standard_exponential(size)

    if params.lambda0 == 0:
        reachable = levels < mass
    else:
        reachable = np.ones(size, dtype=bool)

    targets = levels[reachable]
    upper = np.full(len(targets), np.inf)
    if params.lambda0 != 0:
        upper = targets / params.lambda0
    if mass != 0:
        below = targets < mass
        upper[below] = np.minimum(upper[below],
            -np.log1p(-targets[below] / mass) / params.beta)
    lower = np.zeros(len(targets))
    for _ in range(100):
        mid = 0.5 * (lower + upper)
        under = elapsed_compensator(params, excitation, mid) < targets
        lower = np.where(under, mid, lower)
        upper = np.where(under, upper, mid)

    result = np.full(size, np.inf)
    result[reachable] = upper
    return result


class _Draws:
    def __init__(self, rng, batch=1024):
        self._rng = rng
        self._batch = batch
        self._exp = []
        self._uni = []

    def exponential(self):
        if not self._exp:
            self._exp = list(self._rng.standard_exponential(self._batch)[::-1])
        return self._exp.pop()

    def uniform(self):
        if not self._uni:
            self._uni = list(self._rng.random(self._batch)[::-1])
        return self._uni.pop()

def simulate(params, cfg):
    """
    Ogata thinning. The candidate bound is the intensity right after the
    latest candidate point, which dominates the intensity until the next
    arrival because the kernel only decays between arrivals.
    """

    lambda0, alpha, beta = params.as_tuple()
    horizon = math.inf if cfg.horizon is None else cfg.horizon
    target = cfg.n_events
    draws = _Draws(np.random.default_rng(cfg.seed))

    events = []
    t = 0.0
    excitation = 0.0
    while True:
        bound = lambda0 + alpha * excitation
        if bound <= 0:
            break # nothing can arrive anymore

        wait = draws.exponential() / bound
        if horizon < t + wait:
            break
        excitation *= math.exp(-beta * wait)
        t += wait

        if draws.uniform() * bound <= lambda0 + alpha * excitation:
            if events and t <= events[-1]:
                t = float(np.nextafter(events[-1], math.inf))
            events.append(t)
            excitation += 1.0

            if target is not None and target <= len(events):
                break
            if cfg.max_events <= len(events):
                raise CapExceededError(cfg.max_events, t)

    return History(events)

def simulate_many(params, cfg, count):
    """
    Runs 'count' independent realizations with seeds derived from cfg.seed.
    """

    return [simulate(params, evolve(cfg, seed=seed))
        for seed in derive_seeds(cfg.seed, count)]
