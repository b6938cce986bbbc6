# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT
