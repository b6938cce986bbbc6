# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from enum import Enum
from glob import glob
import json
import logging as log
import os.path as osp
import re

from attr import attrib, attrs
import numpy as np
import pandas as pd

from keepalive.components.errors import DomainError, TraceLoadError
from keepalive.components.point_process import (HawkesParams, History,
    SimConfig, simulate)
from keepalive.util import derive_seeds, parse_str_enum_value


DAY_MINUTES = 1440

Placement = Enum('Placement', ['mid', 'uniform'])
TraceLayout = Enum('TraceLayout', ['wide', 'long'])

def _minute_columns():
    return [str(i) for i in range(1, DAY_MINUTES + 1)]

@attrs(frozen=True)
class TraceSchema:
    """
    Column mapping of a trace CSV.

    'wide' is the public Azure Functions layout: one row per
    (app, function) with per-minute count columns, one file per day.
    'long' has one row per (app, function, day, minute) with a count.
    """

    layout = attrib(default=TraceLayout.wide,
        converter=lambda v: parse_str_enum_value(v, TraceLayout))
    app_column = attrib(default='HashApp')
    function_column = attrib(default='HashFunction')
    day_column = attrib(default=None)
    minute_columns = attrib(factory=_minute_columns, converter=list)
    minute_column = attrib(default='minute')
    count_column = attrib(default='count')

    @classmethod
    def long(cls):
        return cls(layout=TraceLayout.long, app_column='app',
            function_column='function', day_column='day')

    @property
    def required_columns(self):
        if self.layout == TraceLayout.wide:
            return [self.app_column, self.function_column] + \
                self.minute_columns
        return [self.app_column, self.function_column, self.day_column,
            self.minute_column, self.count_column]


def _as_day_map(value):
    return { int(day): (h if isinstance(h, History) else History(h))
        for day, h in value.items() }

@attrs(frozen=True, eq=False)
class TraceDataset:
    """
    Per-application arrival histories, one per day, in minutes
    since the start of that day.
    """

    apps = attrib(factory=dict,
        converter=lambda d: { str(a): _as_day_map(v) for a, v in d.items() })
    days = attrib(factory=list,
        converter=lambda v: sorted(set(int(d) for d in v)))
    day_length = attrib(default=DAY_MINUTES, converter=float)

    def __attrs_post_init__(self):
        for app, per_day in self.apps.items():
            for day, history in per_day.items():
                if day not in self.days:
                    raise DomainError("App '%s' has arrivals on day %s, "
                        "which is not in the dataset" % (app, day))
                if len(history) and not (0 <= history.arrivals[0] and
                        history.arrivals[-1] < self.day_length):
                    raise DomainError("App '%s', day %s: arrivals must lie "
                        "in [0, %s)" % (app, day, self.day_length))

    def __len__(self):
        return len(self.apps)

    def __eq__(self, other):
        if not isinstance(other, TraceDataset):
            return False
        return self.days == other.days and \
            self.day_length == other.day_length and \
            self.to_dict() == other.to_dict()

    __hash__ = None

    @property
    def app_ids(self):
        return sorted(self.apps)

    def get(self, app, day):
        return self.apps.get(app, {}).get(day, History([]))

    def apps_with(self, day, min_arrivals=1):
        return [app for app in self.app_ids
            if min_arrivals <= len(self.get(app, day))]

    def total_arrivals(self, day=None):
        return sum(len(h) for per_day in self.apps.values()
            for d, h in per_day.items() if day is None or d == day)

    def to_dict(self):
        return {
            'day_length': self.day_length,
            'days': list(self.days),
            'apps': { app: { str(day): [float(t) for t in history]
                    for day, history in sorted(self.apps[app].items()) }
                for app in self.app_ids },
        }

    @classmethod
    def from_dict(cls, d):
        return cls(apps=d.get('apps', {}), days=d.get('days', []),
            day_length=d.get('day_length', DAY_MINUTES))

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, sort_keys=True)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                return cls.from_dict(json.load(f))
        except (ValueError, KeyError, TypeError) as e:
            raise TraceLoadError(path, [(None, str(e))])

    @classmethod
    def from_bins(cls, bins, days=None, placement=Placement.mid, seed=None,
            day_length=DAY_MINUTES):
        """
        Builds a dataset from { app: { day: per-minute counts } }.
        """

        placement = parse_str_enum_value(placement, Placement)
        keys = [(app, day) for app in sorted(bins) for day in sorted(bins[app])]
        seeds = derive_seeds(seed, len(keys))
        apps = {}
        for (app, day), app_seed in zip(keys, seeds):
            apps.setdefault(app, {})[day] = expand_bins(bins[app][day],
                placement=placement, rng=np.random.default_rng(app_seed))
        if days is None:
            days = set(day for _, day in keys)
        return cls(apps=apps, days=days, day_length=day_length)


def expand_bins(bins, placement=Placement.mid, rng=None):
    """
    Turns per-minute counts into arrival times. With 'mid' placement the
    k arrivals of bin b land at b + (j + 0.5) / k, with 'uniform' they are
    sorted uniform draws within the bin.
    """

    counts = np.asarray(bins)
    if counts.size and (not np.all(np.mod(counts, 1) == 0) or
            np.any(counts < 0)):
        raise DomainError("Bin counts must be non-negative integers")
    counts = counts.astype(np.int64).reshape(-1)
    total = int(counts.sum())
    if total == 0:
        return History([])

    placement = parse_str_enum_value(placement, Placement)
    bin_index = np.repeat(np.arange(len(counts), dtype=float), counts)
    if placement == Placement.mid:
        first = np.repeat(np.cumsum(counts) - counts, counts)
        rank = np.arange(total) - first
        offsets = (rank + 0.5) / np.repeat(counts, counts)
        return History(bin_index + offsets)

    if rng is None:
        rng = np.random.default_rng()
    return History(np.sort(bin_index + rng.random(total)))

def bin_arrivals(history, n_bins=DAY_MINUTES):
    arrivals = np.asarray(getattr(history, 'arrivals', history), dtype=float)
    index = np.floor(arrivals).astype(np.int64)
    index = index[(0 <= index) & (index < n_bins)]
    return np.bincount(index, minlength=n_bins)


_DAY_PATTERN = re.compile(r'd(\d+)\.csv$')

def _day_from_path(path):
    match = _DAY_PATTERN.search(osp.basename(path))
    if match:
        return int(match.group(1))
    return None

def _trace_files(path):
    if isinstance(path, (list, tuple)):
        return list(path)
    if osp.isdir(path):
        return sorted(glob(osp.join(path, '*.csv')))
    return [path]

def _read_counts(df, columns, path, offenders):
    counts = df[columns].apply(pd.to_numeric, errors='coerce')
    values = counts.to_numpy(dtype=float)
    bad_value = np.isnan(values) | (np.mod(values, 1) != 0)
    negative = values < 0
    for row in np.flatnonzero(bad_value.any(axis=1)):
        offenders.append((int(row) + 2,
            "%s: counts must be integers" % osp.basename(path)))
    for row in np.flatnonzero(negative.any(axis=1)):
        offenders.append((int(row) + 2,
            "%s: counts must be non-negative" % osp.basename(path)))
    return np.nan_to_num(values).astype(np.int64)

def _load_wide(df, path, day, schema, bins, offenders, seen):
    if day is None:
        offenders.append((None, "%s: can't determine the day, "
            "expected a '...dNN.csv' file name" % osp.basename(path)))
        return
    keys = [schema.app_column, schema.function_column]
    for row in np.flatnonzero(df.duplicated(keys, keep='first')):
        offenders.append((int(row) + 2, "%s: duplicate (app, function, day) "
            "row for day %s" % (osp.basename(path), day)))

    # (app, function, day) keys are unique across files as well
    rows = df[keys].astype(str).itertuples(index=False, name=None)
    for row, (app, function) in enumerate(rows):
        first = seen.setdefault((app, function, day), path)
        if first != path:
            offenders.append((row + 2, "%s: duplicate (app, function, day) "
                "row for day %s, already in %s" % \
                (osp.basename(path), day, osp.basename(first))))

    values = _read_counts(df, schema.minute_columns, path, offenders)
    apps = df[schema.app_column].astype(str).to_numpy()
    for app in np.unique(apps):
        app_bins = values[apps == app].sum(axis=0)
        per_day = bins.setdefault(app, {})
        per_day[day] = per_day.get(day, 0) + app_bins

def _load_long(df, path, schema, bins, offenders):
    keys = [schema.app_column, schema.function_column, schema.day_column,
        schema.minute_column]
    for row in np.flatnonzero(df.duplicated(keys, keep='first')):
        offenders.append((int(row) + 2, "%s: duplicate (app, function, day, "
            "minute) row" % osp.basename(path)))

    counts = _read_counts(df, [schema.count_column], path, offenders)[:, 0]
    minutes = pd.to_numeric(df[schema.minute_column], errors='coerce')
    out_of_day = ~minutes.between(0, DAY_MINUTES - 1)
    for row in np.flatnonzero(out_of_day.to_numpy()):
        offenders.append((int(row) + 2, "%s: minute must be in [0, %s)" % \
            (osp.basename(path), DAY_MINUTES)))
    if out_of_day.any():
        return

    frame = pd.DataFrame({
        'app': df[schema.app_column].astype(str),
        'day': df[schema.day_column].astype(int),
        'minute': minutes.astype(int),
        'count': counts,
    })
    grouped = frame.groupby(['app', 'day', 'minute'])['count'].sum()
    for (app, day, minute), count in grouped.items():
        per_day = bins.setdefault(app, {})
        if day not in per_day:
            per_day[day] = np.zeros(DAY_MINUTES, dtype=np.int64)
        per_day[day][minute] += count

def load_trace(path, schema=None, day=None, days=None,
        placement=Placement.mid, seed=None):
    """
    Loads invocation counts from CSV, sums the functions of each
    application and expands the per-minute bins into arrivals.

    'path' can be a file, a list of files or a directory of day files.
    'day' sets the day of a single wide file without a day in its name.
    'days' limits the loaded days.
    """

    if schema is None:
        schema = TraceSchema()

    bins = {}
    offenders = []
    seen = {}
    for file_path in _trace_files(path):
        try:
            df = pd.read_csv(file_path, dtype={schema.app_column: str,
                schema.function_column: str})
        except pd.errors.EmptyDataError:
            log.info("Trace file '%s' is empty", file_path)
            continue
        except OSError as e:
            raise TraceLoadError(file_path, [(None, str(e))])

        missing = [c for c in schema.required_columns if c not in df.columns]
        if missing:
            shown = ', '.join(missing[:5]) + \
                (', ...' if 5 < len(missing) else '')
            offenders.append((None, "%s: missing columns: %s" % \
                (osp.basename(file_path), shown)))
            continue

        if schema.layout == TraceLayout.wide:
            file_day = _day_from_path(file_path)
            if file_day is None:
                file_day = day
            if days is not None and file_day not in days:
                continue
            _load_wide(df, file_path, file_day, schema, bins, offenders,
                seen)
        else:
            if days is not None:
                df = df[df[schema.day_column].isin(days)] \
                    .reset_index(drop=True)
            _load_long(df, file_path, schema, bins, offenders)

    if offenders:
        raise TraceLoadError(path, offenders)

    loaded_days = set(d for per_day in bins.values() for d in per_day)
    dataset = TraceDataset.from_bins(bins, days=loaded_days,
        placement=placement, seed=seed)
    log.info("Loaded %s apps, %s arrivals over days %s",
        len(dataset), dataset.total_arrivals(), dataset.days)
    return dataset


def synth_trace(params, days, seed=None, placement=Placement.mid,
        day_length=DAY_MINUTES):
    """
    Simulates every app on every day, bins the arrivals to minutes and
    expands them back, as a stand-in for a real trace.

    'params' maps app ids to HawkesParams.
    """

    days = sorted(set(int(d) for d in days))
    keys = [(app, day) for app in params for day in days]
    seeds = derive_seeds(seed, len(keys))

    bins = {}
    for (app, day), sim_seed in zip(keys, seeds):
        history = simulate(params[app],
            SimConfig(seed=sim_seed, horizon=day_length))
        bins.setdefault(app, {})[day] = bin_arrivals(history,
            n_bins=int(day_length))
    return TraceDataset.from_bins(bins, days=days, placement=placement,
        seed=None if seed is None else derive_seeds(seed, len(keys) + 1)[-1],
        day_length=day_length)

def random_app_params(n_apps, seed=None, rate_range=(0.05, 0.5),
        branching_range=(0.3, 0.8), beta_range=(0.5, 3.0)):
    """
    Draws a population of stationary per-app parameters (per minute),
    keyed 'app0000', 'app0001', ...
    """

    rng = np.random.default_rng(seed)
    population = {}
    for i in range(n_apps):
        beta = rng.uniform(*beta_range)
        ratio = rng.uniform(*branching_range)
        rate = rng.uniform(*rate_range)
        population['app%04d' % i] = HawkesParams(
            lambda0=rate * (1.0 - ratio), alpha=ratio * beta, beta=beta)
    return population
