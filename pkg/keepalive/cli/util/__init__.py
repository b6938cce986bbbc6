# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import argparse
import json
import logging as log
import os
import os.path as osp
import re
import sys
import textwrap

import numpy as np
import pandas as pd

from keepalive.components.config_model import RunConfig
from keepalive.components.errors import ConfigError, TraceLoadError
from keepalive.components.point_process import HawkesParams, History
from keepalive.components.policy import CostParams
from keepalive.components.trace import TraceDataset, load_trace
from keepalive.util import cast


class CliException(ConfigError): pass

def add_subparser(subparsers, name, builder):
    return builder(lambda **kwargs: subparsers.add_parser(name, **kwargs))

class MultilineFormatter(argparse.HelpFormatter):
    """
    Keeps line breaks introduced with '|n' separator
    and spaces introduced with '|s'.
    """

    def __init__(self, keep_natural=False, **kwargs):
        super().__init__(**kwargs)
        self._keep_natural = keep_natural

    def _fill_text(self, text, width, indent):
        text = self._whitespace_matcher.sub(' ', text).strip()
        text = text.replace('|s', ' ')

        paragraphs = text.split('|n ')
        if self._keep_natural:
            paragraphs = sum((p.split('\n ') for p in paragraphs), [])

        multiline_text = ''
        for paragraph in paragraphs:
            formatted_paragraph = textwrap.fill(paragraph, width,
                initial_indent=indent, subsequent_indent=indent) + '\n'
            multiline_text += formatted_paragraph
        return multiline_text


def generate_next_file_name(basename, basedir='.', sep='.', ext=''):
    """
    If basedir does not contain basename, returns basename,
    otherwise generates a name by appending sep to the basename
    and the number, next to the last used number in the basedir for
    files with basename prefix. Optionally, appends ext.
    """

    return generate_next_name(os.listdir(basedir), basename, sep, ext)

def generate_next_name(names, basename, sep='.', suffix='', default=None):
    pattern = re.compile(r'%s(?:%s(\d+))?%s$' % \
        tuple(map(re.escape, [basename, sep, suffix])))
    matches = [match for match in (pattern.match(n) for n in names) if match]

    max_idx = max([cast(match[1], int, 0) for match in matches], default=None)
    if max_idx is None:
        if default is not None:
            idx = sep + str(default)
        else:
            idx = ''
    else:
        idx = sep + str(max_idx + 1)
    return basename + idx + suffix


def float_list(s):
    try:
        return [float(v) for v in s.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "Expected a comma-separated list of numbers, got '%s'" % s)

def int_list(s):
    try:
        return [int(v) for v in s.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "Expected a comma-separated list of integers, got '%s'" % s)

def add_common_args(parser, out_help="Output path"):
    parser.add_argument('--config', default=None,
        help="JSON or YAML file with run parameters; "
            "explicit flags override its values")
    parser.add_argument('--seed', type=int, default=None,
        help="Master random seed")
    parser.add_argument('--out', default=None,
        help=out_help)
    return parser

def add_params_args(parser):
    group = parser.add_argument_group("Process parameters")
    group.add_argument('--lambda0', type=float, default=None,
        help="Baseline intensity")
    group.add_argument('--alpha', type=float, default=None,
        help="Excitation jump size")
    group.add_argument('--beta', type=float, default=None,
        help="Excitation decay rate")
    return parser

def add_costs_args(parser):
    group = parser.add_argument_group("Costs")
    group.add_argument('--cp', dest='c_p', type=float, default=None,
        help="Memory cost per time unit (default: 1)")
    group.add_argument('--ccs', dest='c_cs', type=float, default=None,
        help="Cold-start cost")
    return parser

def add_threads_arg(parser):
    parser.add_argument('--threads', type=int, default=None,
        help="Worker count for per-app and per-realization tasks "
            "(default: 1)")
    return parser

def add_truncation_arg(parser):
    parser.add_argument('--truncation', type=int, default=None,
        help="Number of most recent arrivals the optimal window "
            "looks at (default: 200)")
    return parser

# argparse destinations which are not run config keys
_NON_CONFIG_ARGS = {'command', 'config', 'out', 'loglevel'}

def resolve_config(args, extra=None):
    """
    Run config from schema defaults, then the --config file,
    then the flags given on the command line.
    """

    overrides = { k: v for k, v in vars(args).items()
        if k not in _NON_CONFIG_ARGS and k in RunConfig().keys() }
    if extra:
        overrides.update(extra)
    config = RunConfig.resolve(getattr(args, 'config', None), overrides)
    log.debug("Resolved config: %s", config.to_dict())
    return config

def require(config, *keys):
    missing = [k for k in keys if config.get(k) is None]
    if missing:
        raise CliException("Missing required parameters: %s. Pass them as "
            "flags or in the --config file" % \
                ', '.join("'%s'" % k for k in missing))

def params_from(config):
    require(config, 'lambda0', 'alpha', 'beta')
    return HawkesParams(config.lambda0, config.alpha, config.beta)

def costs_from(config):
    require(config, 'c_p', 'c_cs')
    return CostParams(config.c_p, config.c_cs)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError("Object of type %s is not JSON serializable" % \
        type(value).__name__)

def dump_json(data, f):
    json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
    f.write('\n')

def write_json(data, path=None):
    """
    Writes to 'path', or to stdout when it is None.
    """

    if path is None:
        dump_json(data, sys.stdout)
        return
    dirname = osp.dirname(path)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    with open(path, 'w') as f:
        dump_json(data, f)
    log.info("Written '%s'", path)

def output_dir(path, basename):
    if path is None:
        path = generate_next_file_name(basename)
    os.makedirs(path, exist_ok=True)
    return path

def write_frame(df, path):
    df.to_csv(path, index=False, float_format='%.17g')
    log.info("Written '%s'", path)


def write_arrivals(history, path):
    arrivals = getattr(history, 'arrivals', history)
    pd.DataFrame({ 'time': np.asarray(arrivals, dtype=float) }).to_csv(path,
        index=False, float_format='%.17g')

def read_arrivals(path):
    if not osp.isfile(path):
        raise CliException("Arrival file '%s' does not exist" % path)
    try:
        df = pd.read_csv(path, dtype=float)
    except pd.errors.EmptyDataError:
        return History([])
    except ValueError as e:
        raise TraceLoadError(path, [(None, str(e))])
    if 'time' not in df.columns:
        raise TraceLoadError(path, [(1, "expected a 'time' column")])
    return History(df['time'].to_numpy())

def load_dataset(path, config):
    """
    Loads a saved TraceDataset JSON, or raw trace CSVs.
    """

    if path is None:
        raise CliException("A trace is required, pass it with --trace")
    if not osp.exists(path):
        raise CliException("Trace path '%s' does not exist" % path)
    if osp.isfile(path) and path.lower().endswith('.json'):
        return TraceDataset.load(path)
    return load_trace(path, placement=config.placement, seed=config.seed)
