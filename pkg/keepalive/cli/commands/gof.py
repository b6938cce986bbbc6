# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import json

from keepalive.components.estimation import goodness_of_fit

from ..util import (CliException, MultilineFormatter, add_common_args,
    add_params_args, params_from, read_arrivals, resolve_config, write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Check a fit with the residual KS test",
        description="""
            Transforms the arrivals with the compensator of the given
            process and tests the residuals against Exp(1) with the
            Kolmogorov-Smirnov test.|n
            |n
            Parameters come from the flags or from the output of
            the 'fit' command.|n
            |n
            Examples:|n
            - Check a fit on another day of arrivals:|n
            |s|sgof day7.csv --fit fit.json
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('history', help="CSV file of arrival times")
    parser.add_argument('--fit', dest='fit_file', default=None,
        help="JSON output of the 'fit' command to take parameters from")
    parser.add_argument('--level', type=float, default=0.05,
        help="Significance level of the test (default: %(default)s)")
    add_params_args(parser)
    add_common_args(parser, out_help="Output JSON file (default: stdout)")
    parser.set_defaults(command=gof_command)

    return parser

def _fitted_params(path):
    try:
        with open(path) as f:
            return json.load(f)['params']
    except (OSError, ValueError, KeyError) as e:
        raise CliException("Can't read parameters from '%s': %s" % (path, e))

def gof_command(args):
    extra = _fitted_params(args.fit_file) if args.fit_file else None
    if extra:
        # explicit flags still take precedence
        extra = { k: v for k, v in extra.items()
            if getattr(args, k, None) is None }
    config = resolve_config(args, extra)
    params = params_from(config)

    result = goodness_of_fit(params, read_arrivals(args.history))
    d = result.to_dict()
    d['passes'] = result.passes(args.level)
    d['level'] = args.level
    d['config'] = config.to_dict()
    write_json(d, args.out)
    return 0
