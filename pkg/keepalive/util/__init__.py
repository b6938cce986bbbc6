# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from concurrent.futures import ThreadPoolExecutor

import numpy as np


NOTSET = object()

def cast(value, type_conv, default=None):
    if value is None:
        return default
    try:
        return type_conv(value)
    except Exception:
        return default

def parse_str_enum_value(value, enum_class, default=NOTSET,
        unknown_member_error=None):
    if value is None and default is not NOTSET:
        value = default
    elif isinstance(value, str):
        try:
            value = enum_class[value]
        except KeyError:
            raise ValueError((unknown_member_error or
                    "Unknown element of {cls} '{value}'. "
                    "The only known are: {available}") \
                .format(
                    cls=enum_class.__name__,
                    value=value,
                    available=', '.join(e.name for e in enum_class)
                )
            )
    elif isinstance(value, enum_class):
        pass
    else:
        raise TypeError("Expected value type string or %s, but got %s" % \
            (enum_class.__name__, type(value).__name__))
    return value

def derive_seeds(seed, count):
    """
    Produces 'count' independent integer seeds from a master seed.
    The result depends only on (seed, count) prefix order: the i-th
    derived seed is the same for any count > i.
    """

    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]

def parallel_map(func, items, threads=None):
    """
    Ordered map over 'items'. Runs in the calling thread when
    'threads' is None or 1.
    """

    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
