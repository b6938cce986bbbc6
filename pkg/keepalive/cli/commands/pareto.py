# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import os.path as osp

from keepalive.components.estimation import FitOptions
from keepalive.components.evaluator import (gof_protocol_comparison,
    trace_experiment)

from ..util import (MultilineFormatter, add_common_args, add_threads_arg,
    add_truncation_arg, float_list, load_dataset, output_dir,
    resolve_config, write_frame, write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Run the trace experiment",
        description="""
            Fits every app on the fit day, ranks the fits by the residual
            KS statistic on the goodness-of-fit day, treats the best
            share of apps and replays all policies on the evaluation day
            for each cold-start cost of the grid.|n
            |n
            Writes 'pareto.csv' (one row per curve point), 'summary.json'
            (savings against the fixed policy) and 'selection.json'
            into the output directory.|n
            |n
            The trace is a JSON dataset from the 'synth' command,
            a trace CSV file or a directory of day files.|n
            |n
            Examples:|n
            - Run on a synthetic trace:|n
            |s|spareto --trace trace.json --seed 1 --out results|n
            |n
            - Also compare with selecting apps on the fit day:|n
            |s|spareto --trace azure/ --compare-gof --threads 8
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('--trace', required=False, default=None,
        help="Trace to evaluate on")
    parser.add_argument('--fit-day', dest='fit_day', type=int, default=None,
        help="Day to fit parameters on (default: 8)")
    parser.add_argument('--gof-day', dest='gof_day', type=int, default=None,
        help="Day to check the fits on (default: 7)")
    parser.add_argument('--eval-day', dest='eval_day', type=int, default=None,
        help="Day to replay the policies on (default: 9)")
    parser.add_argument('--treat-frac', dest='treat_fraction', type=float,
        default=None, help="Share of apps to treat (default: 0.25)")
    parser.add_argument('--cp', dest='c_p', type=float, default=None,
        help="Memory cost per minute (default: 1)")
    parser.add_argument('--ccs-grid', dest='c_cs_grid', type=float_list,
        default=None, help="Comma-separated cold-start costs "
            "(default: 5,10,20,30,45,60,90,120)")
    parser.add_argument('--untreated-ttl', dest='untreated_ttl', type=float,
        default=None, help="Keep-alive length of untreated apps "
            "(default: 10)")
    parser.add_argument('--gof-mode', dest='gof_mode',
        choices=['fix', 'no_fix'], default=None,
        help="Rank fits on the held-out day ('fix') or on the fit day "
            "('no_fix') (default: fix)")
    parser.add_argument('--placement', choices=['mid', 'uniform'],
        default=None, help="Position of arrivals within a minute "
            "for CSV traces (default: mid)")
    parser.add_argument('--compare-gof', action='store_true',
        help="Also compare both goodness-of-fit protocols")
    add_truncation_arg(parser)
    add_threads_arg(parser)
    add_common_args(parser, out_help="Output directory "
        "(default: a new 'pareto*' dir in the current dir)")
    parser.set_defaults(command=pareto_command)

    return parser

def pareto_command(args):
    config = resolve_config(args)
    dataset = load_dataset(args.trace, config)

    options = {
        'fit_day': config.fit_day,
        'gof_day': config.gof_day,
        'eval_day': config.eval_day,
        'treat_fraction': config.treat_fraction,
        'seed': config.seed,
        'threads': config.threads,
    }
    experiment = {
        'c_cs_grid': config.c_cs_grid,
        'c_p': config.c_p,
        'truncation': config.truncation,
        'untreated_ttl': config.untreated_ttl,
        'min_arrivals': config.min_fit_arrivals,
        'fit_opts': FitOptions(restarts=config.restarts),
    }

    result = trace_experiment(dataset, gof_mode=config.gof_mode,
        **options, **experiment)

    dst_dir = output_dir(args.out, 'pareto')
    write_frame(result.to_frame(), osp.join(dst_dir, 'pareto.csv'))
    summary = result.summary()
    summary['config'] = config.to_dict()
    write_json(summary, osp.join(dst_dir, 'summary.json'))
    write_json(result.selection.to_dict(),
        osp.join(dst_dir, 'selection.json'))

    if args.compare_gof:
        comparison = gof_protocol_comparison(dataset, **options, **experiment)
        d = comparison.to_dict()
        d['config'] = config.to_dict()
        write_json(d, osp.join(dst_dir, 'gof_comparison.json'))
    return 0
