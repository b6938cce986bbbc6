# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

import sys

from keepalive.cli.__main__ import main


if __name__ == '__main__':
    sys.exit(main())
