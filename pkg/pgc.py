#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import sys

import pgc.cli


if __name__ == '__main__':
    sys.exit(pgc.cli.main())
