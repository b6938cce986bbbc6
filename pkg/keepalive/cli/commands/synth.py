# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import logging as log
import os.path as osp

from keepalive.components.trace import random_app_params, synth_trace

from ..util import (CliException, MultilineFormatter, add_common_args,
    add_params_args, generate_next_file_name, int_list, params_from,
    resolve_config, write_json)


def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Generate a synthetic trace",
        description="""
            Simulates a population of apps over several days, bins the
            arrivals to minutes like the public invocation traces and
            saves the dataset as JSON, ready for the 'pareto' command.|n
            |n
            With process parameters given, every app shares them.
            Otherwise each app draws its own stationary parameters.|n
            |n
            Examples:|n
            - 50 apps with random parameters over days 7-9:|n
            |s|ssynth --apps 50 --days 7,8,9 --seed 3 --out trace.json
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('--apps', type=int, default=20,
        help="Number of apps (default: %(default)s)")
    parser.add_argument('--days', type=int_list, default=[7, 8, 9],
        help="Comma-separated days (default: 7,8,9)")
    parser.add_argument('--placement', choices=['mid', 'uniform'],
        default=None, help="Position of arrivals within a minute "
            "(default: mid)")
    add_params_args(parser)
    add_common_args(parser, out_help="Output JSON file "
        "(default: a new 'trace*.json' in the current dir)")
    parser.set_defaults(command=synth_command)

    return parser

def synth_command(args):
    config = resolve_config(args)
    if args.apps < 1:
        raise CliException("--apps must be positive")

    given = [config.get(k) is not None for k in ('lambda0', 'alpha', 'beta')]
    if all(given):
        params = params_from(config)
        population = { 'app%04d' % i: params for i in range(args.apps) }
    elif any(given):
        raise CliException("Pass all of --lambda0, --alpha and --beta, "
            "or none of them")
    else:
        population = random_app_params(args.apps, seed=config.seed)

    dataset = synth_trace(population, args.days, seed=config.seed,
        placement=config.placement, day_length=config.day_length)

    dst_file = args.out
    if dst_file is None:
        dst_file = generate_next_file_name('trace', ext='.json')
    dataset.save(dst_file)
    log.info("Written %s apps, %s arrivals to '%s'", len(dataset),
        dataset.total_arrivals(), dst_file)

    base, _ = osp.splitext(dst_file)
    write_json({
        'apps': { app: p.to_dict() for app, p in population.items() },
        'days': dataset.days,
        'config': config.to_dict(),
    }, base + '.params.json')
    return 0
