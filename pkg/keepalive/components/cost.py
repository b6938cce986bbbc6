# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import math
import warnings

from attr import attrib, attrs
import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from keepalive.components.errors import DomainError, IntegrationError
from keepalive.components.point_process import (elapsed_compensator,
    last_excitation, as_history, hazard, survival)


TAIL_SURVIVAL = 1e-10
RELATIVE_TOLERANCE = 1e-8

@attrs(frozen=True)
class RealizedOutcome:
    cost = attrib(converter=float)
    cold_start = attrib(converter=bool)
    cached_time = attrib(converter=float)

    def to_dict(self):
        return { 'cost': self.cost, 'cold_start': self.cold_start,
            'cached_time': self.cached_time }

def realized_cost(x, schedule, costs):
    """
    Cost paid for one inter-arrival time 'x' under 'schedule': memory for
    every cached moment before the arrival, plus a cold start if the
    arrival falls outside all windows.
    """

    if x < 0:
        raise DomainError("Inter-arrival time must be >= 0, got %s" % x)
    cached_time = schedule.cached_time(x)
    cold_start = not schedule.contains(x)
    return RealizedOutcome(
        cost=costs.c_p * cached_time + (costs.c_cs if cold_start else 0.0),
        cold_start=cold_start, cached_time=cached_time)

def offline_optimal_outcome(x, costs):
    if x < 0:
        raise DomainError("Inter-arrival time must be >= 0, got %s" % x)
    if costs.c_cs <= costs.c_p * x:
        return RealizedOutcome(costs.c_cs, True, 0.0)
    return RealizedOutcome(costs.c_p * x, False, x)

def instantaneous_cost_g(params, history, x, costs):
    """
    Rate of expected cost change from extending a window at elapsed
    time 'x'. Negative values mean keeping is profitable.
    """

    return survival(params, history, x) * \
        (costs.c_p - costs.c_cs * hazard(params, history, x))

def _tail_point(params, excitation, level):
    """
    Elapsed time where survival drops to 'level', or +inf if it never does.
    """

    target = -math.log(level)
    mass = params.alpha / params.beta * excitation
    if params.lambda0 == 0 and mass <= target:
        return math.inf

    def excess(x):
        return float(elapsed_compensator(params, excitation,
            np.float64(x))) - target

    upper = 1.0
    while excess(upper) < 0:
        upper *= 2.0
    return brentq(excess, 0.0, upper, xtol=1e-12)

def expected_cost(params, history, schedule, costs):
    """
    Expected cost of the next inter-arrival under 'schedule', given the
    arrival history: c_cs plus the integral of the instantaneous cost over
    the schedule windows.

    The cold-start part integrates the density and has a closed form, only
    the memory part goes through quadrature. Windows are cut where survival
    falls below TAIL_SURVIVAL.
    """

    history = as_history(history)
    excitation = last_excitation(params, history.arrivals)
    tail = _tail_point(params, excitation, TAIL_SURVIVAL)

    def survival_at(x):
        if math.isinf(x):
            return 0.0 if params.lambda0 != 0 else \
                math.exp(-params.alpha / params.beta * excitation)
        return math.exp(-elapsed_compensator(params, excitation, x))

    total = costs.c_cs
    for start, end in schedule:
        if math.isinf(end) and math.isinf(tail):
            # survival never vanishes, memory is paid forever
            return math.inf
        total -= costs.c_cs * (survival_at(start) - survival_at(end))

        end = min(end, tail)
        if end <= start:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter('error', IntegrationWarning)
            try:
                value, abserr = quad(survival_at, start, end,
                    epsabs=RELATIVE_TOLERANCE * costs.c_cs / costs.c_p,
                    epsrel=RELATIVE_TOLERANCE, limit=200)
            except IntegrationWarning as e:
                raise IntegrationError(start, end, None, None, str(e))
        if not math.isfinite(value):
            raise IntegrationError(start, end, value, abserr,
                "non-finite estimate")
        total += costs.c_p * value
    return total
