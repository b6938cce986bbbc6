# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from . import (
    simulate, window,
    fit, gof,
    evaluate, sweep,
    synth, pareto
)
