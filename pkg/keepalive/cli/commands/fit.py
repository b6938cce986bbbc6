# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import logging as log

from keepalive.components.estimation import FitOptions, fit

from ..util import (MultilineFormatter, add_common_args, read_arrivals,
    resolve_config, write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Estimate process parameters from arrivals",
        description="""
            Maximum likelihood estimate of the Hawkes process parameters,
            by a multi-start Nelder-Mead search.|n
            |n
            Examples:|n
            - Fit a simulated stream:|n
            |s|sfit arrivals.csv --restarts 5 --seed 1 --out fit.json
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('history', help="CSV file of arrival times")
    parser.add_argument('--restarts', type=int, default=None,
        help="Number of optimizer starts (default: 5)")
    add_common_args(parser, out_help="Output JSON file (default: stdout)")
    parser.set_defaults(command=fit_command)

    return parser

def fit_command(args):
    config = resolve_config(args)
    history = read_arrivals(args.history)

    result = fit(history, opts=FitOptions(restarts=config.restarts,
        seed=config.seed))
    if not result.converged:
        log.warning("The optimizer hasn't converged in %s iterations",
            result.iterations)

    d = result.to_dict()
    d['config'] = config.to_dict()
    write_json(d, args.out)
    return 0
