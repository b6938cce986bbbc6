# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import logging as log

from keepalive.components.point_process import SimConfig, simulate

from ..util import (CliException, MultilineFormatter, add_common_args,
    add_params_args, generate_next_file_name, params_from, resolve_config,
    write_arrivals)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Simulate an arrival stream",
        description="""
            Simulates a Hawkes process with an exponential kernel and
            writes the arrival times to a CSV file with a 'time' column.|n
            |n
            Examples:|n
            - Simulate 600 arrivals:|n
            |s|ssimulate --lambda0 0.01 --alpha 0.5 --beta 1 --events 600 --seed 7|n
            |n
            - Simulate a Poisson stream over 100 time units:|n
            |s|ssimulate --lambda0 2 --alpha 0 --beta 1 --horizon 100
        """,
        formatter_class=MultilineFormatter)

    add_params_args(parser)
    parser.add_argument('--events', type=int, default=None,
        help="Stop after this many arrivals")
    parser.add_argument('--horizon', type=float, default=None,
        help="Stop at this time")
    parser.add_argument('--max-events', dest='max_events', type=int,
        default=None, help="Fail when a run exceeds this many arrivals "
            "(default: 10^6)")
    add_common_args(parser, out_help="Output CSV file "
        "(default: a new 'arrivals*.csv' in the current dir)")
    parser.set_defaults(command=simulate_command)

    return parser

def simulate_command(args):
    config = resolve_config(args)
    params = params_from(config)
    if config.events is None and config.horizon is None:
        raise CliException("Pass --events or --horizon to stop the simulation")

    history = simulate(params, SimConfig(seed=config.seed,
        n_events=config.events, horizon=config.horizon,
        max_events=config.max_events))

    dst_file = args.out
    if dst_file is None:
        dst_file = generate_next_file_name('arrivals', ext='.csv')
    write_arrivals(history, dst_file)
    log.info("Written %s arrivals to '%s'", len(history), dst_file)
    return 0
