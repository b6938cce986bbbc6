# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse

from keepalive.components.errors import DomainError
from keepalive.components.policy import (empty_history_window,
    optimal_hawkes_window, tau_approx, tau_fixed, window_bounds)

from ..util import (CliException, MultilineFormatter, add_common_args,
    add_costs_args, add_params_args, add_truncation_arg, costs_from,
    params_from, read_arrivals, resolve_config, write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Compute the optimal keep-alive window",
        description="""
            Computes the window that minimizes the expected cost of the
            next inter-arrival time, given the arrival history.
            The result is Zero, a Finite length or Infinite, together with
            the history-independent bounds on the length.|n
            |n
            Examples:|n
            - Window after the arrivals of a file:|n
            |s|swindow arrivals.csv --lambda0 0.01 --alpha 0.5 --beta 1 --ccs 1|n
            |n
            - Window with no arrivals seen yet:|n
            |s|swindow --empty --lambda0 0.01 --alpha 0.5 --beta 1 --ccs 10
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('history', nargs='?', default=None,
        help="CSV file of arrival times")
    parser.add_argument('--empty', action='store_true',
        help="Compute the window for an empty history")
    add_params_args(parser)
    add_costs_args(parser)
    add_truncation_arg(parser)
    add_common_args(parser, out_help="Output JSON file (default: stdout)")
    parser.set_defaults(command=window_command)

    return parser

def window_command(args):
    config = resolve_config(args)
    params = params_from(config)
    costs = costs_from(config)

    if args.history is None:
        if not args.empty:
            raise CliException("Pass an arrival file or --empty")
        history = []
    else:
        history = read_arrivals(args.history)
        if len(history) == 0 and not args.empty:
            raise CliException("The arrival file '%s' is empty, pass "
                "--empty to compute the empty-history window" % args.history)

    if len(history) == 0:
        window = empty_history_window(params, costs)
    else:
        window = optimal_hawkes_window(params, history, costs,
            truncation=config.truncation)

    try:
        bounds = window_bounds(params, history, costs,
            truncation=config.truncation).to_dict()
    except DomainError:
        bounds = None

    write_json({
        'window': window.to_dict(),
        'bounds': bounds,
        'tau_fixed': tau_fixed(costs),
        'tau_approx': tau_approx(params, costs),
        'n_arrivals': len(history),
        'config': config.to_dict(),
    }, args.out)
    return 0
