# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from keepalive.components.config import Config, SchemaBuilder as _SchemaBuilder
from keepalive.components.evaluator import (DEFAULT_BASELINE_TTL,
    DEFAULT_C_CS_GRID)
from keepalive.components.estimation import MIN_FIT_ARRIVALS
from keepalive.components.point_process import DEFAULT_MAX_EVENTS
from keepalive.components.policy import DEFAULT_TRUNCATION
from keepalive.components.trace import DAY_MINUTES


RUN_SCHEMA = _SchemaBuilder() \
    .add('seed', lambda: None, kind=int) \
    .add('threads', lambda: 1, kind=int) \
    .add('truncation', lambda: DEFAULT_TRUNCATION, kind=int) \
    \
    .add('lambda0', lambda: None, kind=float) \
    .add('alpha', lambda: None, kind=float) \
    .add('beta', lambda: None, kind=float) \
    .add('c_p', lambda: 1.0, kind=float) \
    .add('c_cs', lambda: None, kind=float) \
    \
    .add('events', lambda: None, kind=int) \
    .add('horizon', lambda: None, kind=float) \
    .add('max_events', lambda: DEFAULT_MAX_EVENTS, kind=int) \
    .add('realizations', lambda: 100, kind=int) \
    .add('ttl_grid', lambda: None, kind=list) \
    .add('restarts', lambda: 5, kind=int) \
    \
    .add('fit_day', lambda: 8, kind=int) \
    .add('gof_day', lambda: 7, kind=int) \
    .add('eval_day', lambda: 9, kind=int) \
    .add('treat_fraction', lambda: 0.25, kind=float) \
    .add('c_cs_grid', lambda: list(DEFAULT_C_CS_GRID), kind=list) \
    .add('untreated_ttl', lambda: DEFAULT_BASELINE_TTL, kind=float) \
    .add('min_fit_arrivals', lambda: MIN_FIT_ARRIVALS, kind=int) \
    .add('gof_mode', lambda: 'fix', kind=str) \
    .add('placement', lambda: 'mid', kind=str) \
    .add('day_length', lambda: float(DAY_MINUTES), kind=float) \
    .build()

class RunConfig(Config):
    """
    Fully-resolved parameters of one command run: schema defaults,
    then the config file, then explicit flags.
    """

    def __init__(self, config=None):
        super().__init__(config, schema=RUN_SCHEMA)

    @classmethod
    def resolve(cls, path=None, overrides=None):
        config = cls()
        if path:
            config.update(Config.parse(path))
        if overrides:
            config.update({ k: v for k, v in overrides.items()
                if v is not None })
        return config
