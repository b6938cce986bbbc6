# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import math

from keepalive.components.errors import InvalidParamsError


def _checked(pred, requirement):
    def validator(inst, attribute, value):
        if not pred(value):
            raise InvalidParamsError(attribute.name, value, requirement)
    return validator

non_negative = _checked(lambda v: v >= 0 and not math.isinf(v),
    "a finite value >= 0")
positive = _checked(lambda v: 0 < v and not math.isinf(v),
    "a finite value > 0")

def optional(validator):
    def wrapped(inst, attribute, value):
        if value is not None:
            validator(inst, attribute, value)
    return wrapped

def optional_cast(conv):
    def converter(value):
        if value is None:
            return None
        return conv(value)
    return converter
