# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from enum import Enum
import logging as log
import math

from attr import attrib, attrs
import numpy as np
from scipy.optimize import minimize
from scipy.stats import kstwobign

from keepalive.components.errors import FitFailedError, InsufficientDataError
from keepalive.components.point_process import (HawkesParams, as_history,
    decayed_counts)
from keepalive.util import parse_str_enum_value
from keepalive.util.attrs_util import positive


MIN_FIT_ARRIVALS = 5

# Log-parameter box, keeps the simplex away from overflow
LOG_PARAM_BOUNDS = (-25.0, 12.0)

FitOrigin = Enum('FitOrigin', ['first_arrival', 'zero'])

@attrs(frozen=True)
class FitOptions:
    restarts = attrib(default=5, converter=int, validator=positive)
    seed = attrib(default=None)
    xatol = attrib(default=1e-6, converter=float)
    fatol = attrib(default=1e-9, converter=float)
    max_iterations = attrib(default=2000, converter=int)
    origin = attrib(default=FitOrigin.first_arrival,
        converter=lambda v: parse_str_enum_value(v, FitOrigin))

@attrs(frozen=True)
class FitResult:
    params = attrib()
    nll = attrib(converter=float)
    converged = attrib(converter=bool)
    iterations = attrib(converter=int)
    restarts = attrib(default=1, converter=int)
    n_arrivals = attrib(default=0, converter=int)

    def to_dict(self):
        return {
            'params': self.params.to_dict(),
            'nll': self.nll,
            'converged': self.converged,
            'iterations': self.iterations,
            'restarts': self.restarts,
            'n_arrivals': self.n_arrivals,
        }

@attrs(frozen=True)
class GofResult:
    ks_statistic = attrib(converter=float)
    p_value = attrib(converter=float)
    n_residuals = attrib(converter=int)

    def passes(self, level=0.05):
        return level <= self.p_value

    def to_dict(self):
        return {
            'ks_statistic': self.ks_statistic,
            'p_value': self.p_value,
            'n_residuals': self.n_residuals,
        }


def excitation_sums(arrivals, beta):
    """
    A(i) = sum_{j < i} exp(-beta (t_i - t_j)), with A(1) = 0.
    Equivalent to the recursion A(i) = exp(-beta (t_i - t_{i-1})) (1 + A(i-1)).
    """

    t = np.asarray(arrivals, dtype=float)
    if len(t) == 0:
        return np.empty(0)
    sums = np.empty(len(t))
    sums[0] = 0.0
    sums[1:] = np.exp(-beta * np.diff(t)) * decayed_counts(t[:-1], beta)
    return sums

def _log_likelihood(lambda0, alpha, beta, t):
    if alpha == 0:
        rates = np.full(len(t), lambda0)
    else:
        rates = lambda0 + alpha * excitation_sums(t, beta)
    if np.any(rates <= 0):
        return -math.inf

    t_k = t[-1]
    value = np.sum(np.log(rates)) - lambda0 * t_k
    if alpha != 0:
        value += alpha / beta * np.sum(np.expm1(-beta * (t_k - t)))
    return float(value)

def log_likelihood(params, arrivals):
    """
    Log-likelihood of the arrivals observed on [0, t_k].
    Returns -inf for parameters under which some arrival has zero intensity.
    """

    t = as_history(arrivals).arrivals
    if len(t) == 0:
        raise InsufficientDataError(1, 0)
    return _log_likelihood(params.lambda0, params.alpha, params.beta, t)

def initial_guess(arrivals):
    t = np.asarray(arrivals, dtype=float)
    beta = 1.0 / np.mean(np.diff(t))
    span = t[-1] - min(t[0], 0.0)
    return HawkesParams(lambda0=0.5 * len(t) / span, alpha=0.5 * beta,
        beta=beta)

def _simplex_converged(result, opts):
    simplex, values = result.final_simplex
    diameter = np.max(np.abs(simplex[1:] - simplex[0]))
    spread = np.max(np.abs(values[1:] - values[0]))
    return diameter < opts.xatol or spread < opts.fatol

def fit(arrivals, init=None, opts=None):
    """
    Maximum likelihood estimate by a multi-start Nelder-Mead search over
    log-parameters. The first start is 'init' (or a moment-based guess),
    the others jitter it by a factor within e^(+-1).
    """

    if opts is None:
        opts = FitOptions()
    t = as_history(arrivals).arrivals
    if len(t) < MIN_FIT_ARRIVALS:
        raise InsufficientDataError(MIN_FIT_ARRIVALS, len(t))
    if opts.origin == FitOrigin.first_arrival:
        t = t - t[0]
    if init is None:
        init = initial_guess(t)

    low, high = LOG_PARAM_BOUNDS
    def objective(theta):
        if np.any(theta < low) or np.any(high < theta):
            return math.inf
        lambda0, alpha, beta = np.exp(theta)
        with np.errstate(over='ignore', under='ignore', invalid='ignore'):
            value = -_log_likelihood(lambda0, alpha, beta, t)
        if not math.isfinite(value):
            return math.inf
        return value

    base = np.clip(np.log(np.maximum(init.as_tuple(), math.exp(low))),
        low, high)
    rng = np.random.default_rng(opts.seed)
    starts = [base] + [np.clip(base + rng.uniform(-1.0, 1.0, size=3),
        low, high) for _ in range(opts.restarts - 1)]

    best = None
    best_converged = False
    for i, start in enumerate(starts):
        result = minimize(objective, start, method='Nelder-Mead',
            options={
                'xatol': opts.xatol,
                'fatol': opts.fatol,
                'maxiter': opts.max_iterations,
                'maxfev': 2 * opts.max_iterations,
            })
        if not math.isfinite(result.fun):
            log.debug("Fit restart %s ended at an infeasible point", i)
            continue
        if best is None or result.fun < best.fun:
            best = result
            best_converged = _simplex_converged(result, opts)

    if best is None:
        raise FitFailedError(opts.restarts)

    return FitResult(params=HawkesParams(*np.exp(best.x)), nll=best.fun,
        converged=best_converged, iterations=best.nit,
        restarts=opts.restarts, n_arrivals=len(t))

def residuals(params, arrivals):
    """
    Compensator increments between consecutive arrivals. They are i.i.d.
    Exp(1) when the arrivals follow the model.
    """

    t = as_history(arrivals).arrivals
    if len(t) < 2:
        raise InsufficientDataError(2, len(t))

    gaps = np.diff(t)
    values = params.lambda0 * gaps
    if params.alpha != 0:
        values = values - params.alpha / params.beta * \
            decayed_counts(t[:-1], params.beta) * np.expm1(-params.beta * gaps)
    return values

def ks_test_exp1(values):
    """
    One-sample Kolmogorov-Smirnov test against Exp(1), with the
    asymptotic Kolmogorov distribution for the p-value.
    """

    x = np.sort(np.asarray(values, dtype=float))
    n = len(x)
    if n == 0:
        raise InsufficientDataError(1, 0, 'residuals')

    cdf = np.clip(-np.expm1(-x), 0.0, 1.0)
    ranks = np.arange(1, n + 1)
    statistic = max(np.max(ranks / n - cdf), np.max(cdf - (ranks - 1) / n))
    p_value = kstwobign.sf(math.sqrt(n) * statistic)
    return GofResult(statistic, p_value, n)

def goodness_of_fit(params, arrivals):
    return ks_test_exp1(residuals(params, arrivals))
