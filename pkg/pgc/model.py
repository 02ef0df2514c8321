# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import enum


class ExitCode(enum.IntEnum):
    SUCCESS = 0
    INVALID_CONFIG = 2
    NOT_CONVERGED = 3
    VERIFICATION_FAILED = 4


class InadmissibleError(ValueError):
    '''
    raised for parameters outside the range where a minimizer (and hence a surface) exists,
    e.g. beta outside (beta*, 4), sign mismatches between beta and sigma(K), divergent masses
    '''
    pass


class QuadratureError(RuntimeError):
    pass


class BracketError(RuntimeError):
    pass


class Verdict(enum.Enum):
    RADIAL = 'radial'
    NON_RADIAL = 'non-radial'
    INCONCLUSIVE = 'inconclusive'


class FailureKind(enum.Enum):
    NONE = 'none'
    STATISTICAL = 'statistical-failure'
    POSSIBLE_NON_UNIQUENESS = 'possible-non-uniqueness'
