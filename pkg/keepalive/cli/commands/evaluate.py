# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse

from keepalive.components.evaluator import replay
from keepalive.components.policy import PolicyKind, PolicySpec

from ..util import (CliException, MultilineFormatter, add_common_args,
    add_costs_args, add_params_args, add_truncation_arg, costs_from,
    params_from, read_arrivals, resolve_config, write_json)


_POLICIES = [k.name for k in PolicyKind if k != PolicyKind.schedule]

def build_parser(parser_ctor=argparse.ArgumentParser):
    parser = parser_ctor(help="Replay a policy over arrivals",
        description="""
            Replays a keep-alive policy over the inter-arrival times of
            an arrival file and reports cold starts, wasted memory time
            and the realized costs.|n
            |n
            Policies:|n
            - fixed: keep alive for --ttl after each arrival|n
            - prewarm: evict, then cache from --prewarm to --prewarm + --ttl|n
            - optimal: the per-history optimal window (needs parameters)|n
            - optimized_ttl: the best fixed length for the process, or --ttl|n
            - approx: the approximate fixed length (needs parameters)|n
            - offline: the clairvoyant lower bound|n
            |n
            Examples:|n
            - Replay a 10-minute keep-alive:|n
            |s|sevaluate day9.csv --policy fixed --ttl 10 --ccs 10
        """,
        formatter_class=MultilineFormatter)

    parser.add_argument('history', help="CSV file of arrival times")
    parser.add_argument('--policy', choices=_POLICIES, default='fixed',
        help="Policy to replay (default: %(default)s)")
    parser.add_argument('--ttl', type=float, default=None,
        help="Keep-alive length of the fixed and prewarm policies")
    parser.add_argument('--prewarm', type=float, default=0.0,
        help="Pre-warming delay of the prewarm policy (default: 0)")
    parser.add_argument('--day-length', dest='day_length', type=float,
        default=None, help="Cut the last window at this time "
            "(default: 1440)")
    parser.add_argument('--no-day-end', action='store_true',
        help="Don't account the window opened by the last arrival")
    add_params_args(parser)
    add_costs_args(parser)
    add_truncation_arg(parser)
    add_common_args(parser, out_help="Output JSON file (default: stdout)")
    parser.set_defaults(command=evaluate_command)

    return parser

def _make_policy(args, config):
    kind = PolicyKind[args.policy]
    if kind in {PolicyKind.fixed, PolicyKind.prewarm} and args.ttl is None:
        raise CliException("The '%s' policy requires --ttl" % kind.name)
    if kind == PolicyKind.fixed:
        return PolicySpec.fixed(args.ttl)
    if kind == PolicyKind.prewarm:
        return PolicySpec.prewarmed(args.prewarm, args.ttl)
    if kind == PolicyKind.optimal:
        return PolicySpec.optimal(truncation=config.truncation)
    if kind == PolicyKind.optimized_ttl:
        return PolicySpec.optimized(ttl=args.ttl,
            truncation=config.truncation, seed=config.seed)
    if kind == PolicyKind.approx:
        return PolicySpec.approx()
    return PolicySpec.offline()

def evaluate_command(args):
    config = resolve_config(args)
    policy = _make_policy(args, config)
    costs = costs_from(config)
    params = params_from(config) if policy.requires_params else None

    day_length = None if args.no_day_end else config.day_length
    metrics = replay(read_arrivals(args.history), policy, costs,
        params=params, day_length=day_length)

    d = metrics.to_dict()
    d['policy'] = policy.to_dict()
    d['config'] = config.to_dict()
    write_json(d, args.out)
    return 0
