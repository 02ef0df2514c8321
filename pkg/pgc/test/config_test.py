# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import math

import pytest

import pgc.closedforms as closedforms
import pgc.config as config


def test_parse_flat():
    examinee = config.parse_flat(
        '''
        # comments and blank lines are skipped
        curvature.type = special_curvature
        curvature.kwargs.gamma = 0.6

        solver.beta = 2.4   # trailing comment
        mc.seed = 7
        harmonic.a = [0.0, 1.0]
        verify.fast = true
        '''
    )

    assert examinee == {
        'curvature.type': 'special_curvature',
        'curvature.kwargs.gamma': 0.6,
        'solver.beta': 2.4,
        'mc.seed': 7,
        'harmonic.a': [0.0, 1.0],
        'verify.fast': True,
    }


def test_parse_flat_rejects_malformed_input():
    with pytest.raises(ValueError):
        config.parse_flat('solver.beta = 1\nsolver.beta = 2')
    with pytest.raises(ValueError):
        config.parse_flat('upload.prefix = a/prefix')
    with pytest.raises(ValueError):
        config.parse_flat('solver.beta')
    with pytest.raises(ValueError):
        config.parse_flat('beta = 1')


def test_load_yaml_config(tmpdir):
    path = tmpdir.join('run.yaml')
    path.write('solver:\n  beta: -2\n  tolerance: 1.0e-9\ngrid:\n  geometry: radial\n')

    examinee = config.load_config(str(path))

    assert examinee == {
        'solver.beta': -2,
        'solver.tolerance': 1e-9,
        'grid.geometry': 'radial',
    }


def test_load_flat_config(tmpdir):
    path = tmpdir.join('run.cfg')
    path.write('family.name = chakie\nfamily.n = 2\n')

    assert config.load_config(str(path)) == {'family.name': 'chakie', 'family.n': 2}


def test_merge_flags_win_and_kappa_converts():
    examinee = config.merge(
        {'solver.tolerance': 1e-8, 'mc.seed': 1},
        {'mc.seed': 5, 'solver.kappa': 2 * math.pi, 'grid.geometry': None},
    )

    assert examinee['mc.seed'] == 5
    assert examinee['solver.beta'] == pytest.approx(2.0)
    assert 'solver.kappa' not in examinee
    assert 'grid.geometry' not in examinee

    with pytest.raises(ValueError):
        config.merge({'solver.beta': 1.0}, {'solver.kappa': 2 * math.pi})


def test_get_casts():
    cfg = {'grid.domain_radius': '1e3'}

    assert config.get(cfg, 'grid.domain_radius', cast=float) == 1e3
    assert config.get(cfg, 'grid.missing', default=None, cast=float) is None
    with pytest.raises(ValueError):
        config.get({'mc.seed': 'abc'}, 'mc.seed', cast=int)


def test_curvature_spec():
    examinee = config.curvature_spec({
        'curvature.type': 'power_curvature',
        'curvature.kwargs.m': 3,
    })

    assert examinee.tail is closedforms.Tail.POWER
    assert examinee.tail_exponent == 3.0

    family = config.curvature_spec({'family.name': 'chakie', 'family.n': 2})
    assert family.family.n == 2

    with pytest.raises(ValueError):
        config.curvature_spec({'curvature.type': 'HarmonicSpec'})
    with pytest.raises(ValueError):
        config.curvature_spec({'curvature.type': 'power_curvature', 'curvature.kwargs.q': 1})
    with pytest.raises(ValueError):
        config.curvature_spec({})


def test_harmonic_spec():
    examinee = config.harmonic_spec({'harmonic.a': '0.5,1', 'harmonic.b': [0.0, 2.0]})

    assert examinee.a == (0.5, 1.0)
    assert tuple(examinee.b) == (0.0, 2.0)
    assert config.harmonic_spec({}).is_constant
    assert config.harmonic_spec({'harmonic.a': 1.5}).constant == 1.5
