# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import logging as log
import os.path as osp

import numpy as np

from keepalive.components.evaluator import (SWEEP_DEFAULTS,
    cost_curve_experiment, parameter_sweep)
from keepalive.components.policy import tau_fixed

from ..util import (MultilineFormatter, add_common_args, add_costs_args,
    add_params_args, add_threads_arg, add_truncation_arg, costs_from,
    float_list, output_dir, params_from, resolve_config, write_frame,
    write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Compute Monte-Carlo cost curves",
        description="""
            Simulates the process and computes the mean cost per
            inter-arrival time of fixed keep-alive lengths over a grid,
            of the per-history optimal policy and of the optimized,
            approximate and c_cs / c_p fixed lengths.|n
            |n
            With --vary, repeats the experiment for several values of one
            parameter. Writes 'curve*.csv' files and 'summary.json' into
            the output directory.|n
            |n
            Examples:|n
            - One cost curve:|n
            |s|ssweep --lambda0 0.01 --alpha 0.5 --beta 1 --ccs 10 --seed 1|n
            |n
            - Vary the excitation jump size:|n
            |s|ssweep --lambda0 0.6 --alpha 1.2 --beta 2.4 --ccs 1.25 --vary alpha
        """,
        formatter_class=MultilineFormatter)

    add_params_args(parser)
    add_costs_args(parser)
    parser.add_argument('--events', type=int, default=None,
        help="Arrivals per realization (default: 600)")
    parser.add_argument('--realizations', type=int, default=None,
        help="Number of realizations (default: 100)")
    parser.add_argument('--ttl-grid', dest='ttl_grid', type=float_list,
        default=None, help="Comma-separated keep-alive lengths "
            "(default: 50 points from 0 to 5 c_cs / c_p)")
    parser.add_argument('--vary', choices=sorted(SWEEP_DEFAULTS),
        default=None, help="Parameter to sweep")
    parser.add_argument('--values', type=float_list, default=None,
        help="Comma-separated values of the swept parameter")
    add_truncation_arg(parser)
    add_threads_arg(parser)
    add_common_args(parser, out_help="Output directory "
        "(default: a new 'sweep*' dir in the current dir)")
    parser.set_defaults(command=sweep_command)

    return parser

def sweep_command(args):
    config = resolve_config(args)
    params = params_from(config)
    costs = costs_from(config)

    ttl_grid = config.ttl_grid
    if ttl_grid is None:
        ttl_grid = np.linspace(0.0, 5.0 * tau_fixed(costs), 50)
    options = {
        'n_events': config.events or 600,
        'n_realizations': config.realizations,
        'seed': config.seed,
        'truncation': config.truncation,
        'threads': config.threads,
    }

    if args.vary:
        curves = parameter_sweep(params, costs, args.vary, values=args.values,
            ttl_grid=ttl_grid, **options)
    else:
        curves = [cost_curve_experiment(params, costs, ttl_grid, **options)]

    dst_dir = output_dir(args.out, 'sweep')
    summaries = []
    for i, curve in enumerate(curves):
        name = 'curve.csv' if len(curves) == 1 else 'curve_%s.csv' % i
        write_frame(curve.to_frame(), osp.join(dst_dir, name))
        summary = curve.summary()
        summary['file'] = name
        summaries.append(summary)
        log.info("optimal: %.6g, optimized TTL %.6g: %.6g, "
            "best fixed: %.6g", curve.optimal_mean, curve.optimized_ttl,
            curve.optimized_ttl_cost, curve.best_fixed_cost)

    write_json({
        'vary': args.vary,
        'curves': summaries,
        'config': config.to_dict(),
    }, osp.join(dst_dir, 'summary.json'))
    return 0
