# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import pgc.cli as cli
import pgc.model as model
import pgc.util as util


@pytest.fixture
def run(tmpdir):
    def _run(*argv):
        return cli.main(['-q', '-o', str(tmpdir)] + list(argv))
    return _run


@pytest.fixture
def output(tmpdir):
    def _output(name):
        path = tmpdir.join(name)
        if name.endswith('.json'):
            return json.loads(path.read())
        return str(path)
    return _output


def test_closed_form(run, output):
    code = run('closed-form', '--family', 'chakie', '--n', '1', '--window', '1', '--h', '0.05')

    assert code == model.ExitCode.SUCCESS
    summary = output('closed_form.json')
    assert summary['family'] == 'chakie'
    assert summary['max_value'] == pytest.approx(1.0)
    assert summary['max_locations'] == [pytest.approx([0.0, 0.0])]
    assert summary['integral_curvature'] == pytest.approx(4 * math.pi, rel=1e-5)

    field = util.read_planar_csv(output('closed_form.csv'))
    assert field.values.shape == (40, 40)
    assert np.max(field.values) <= 1.0


def test_solve_from_config_file(run, output, tmpdir):
    cfg = tmpdir.join('special.cfg')
    cfg.write(
        'curvature.type = special_curvature\n'
        'curvature.kwargs.gamma = 0.5\n'
        'grid.domain_radius = 1e3\n'
        'grid.r_max = 1e3\n'
        'grid.n_points = 1000\n'
    )

    code = run('-c', str(cfg), 'solve', '--kappa', str(2 * math.pi))

    assert code == model.ExitCode.SUCCESS
    summary = output('solve.json')
    assert summary['converged']
    assert summary['beta'] == pytest.approx(2.0)
    assert summary['integral_curvature'] == pytest.approx(2 * math.pi, rel=1e-8)
    assert summary['F'] <= summary['F_initial']

    rho = util.read_radial_csv(output('rho.csv'))
    assert rho.integrate(rho.values) == pytest.approx(1.0, rel=1e-8)
    with open(output('trace.csv')) as f:
        assert f.readline().strip() == util.TRACE_HEADER


def test_flat_solve(run, output):
    code = run('solve', '--curvature', 'zero_curvature', '--beta', '0', '--harmonic-a', '0.5')

    assert code == model.ExitCode.SUCCESS
    U = util.read_radial_csv(output('U.csv'))
    assert U.values == pytest.approx(np.full(U.values.shape, 0.5))
    assert output('solve.json')['kappa'] == 0.0


def test_sample(run, output):
    code = run(
        'sample',
        '--curvature', 'disk_curvature',
        '--beta', '1',
        '--n-particles', '3',
        '--sweeps', '500',
        '--chains', '2',
        '--seed', '1',
        '--bins', '4',
    )

    assert code == model.ExitCode.SUCCESS
    summary = output('sample.json')
    assert summary['N'] == 3
    assert len(summary['chains']) == 2
    marginal = util.read_radial_csv(output('marginal.csv'))
    assert marginal.radii.size == 4


def test_sample_is_reproducible(tmpdir):
    def sample(name):
        out = tmpdir.join(name)
        code = cli.main([
            '-q', '-o', str(out),
            'sample',
            '--curvature', 'disk_curvature',
            '--beta', '1',
            '--n-particles', '4',
            '--sweeps', '300',
            '--chains', '3',
            '--seed', '21',
            '--bins', '5',
            '--dump-samples',
        ])
        assert code == model.ExitCode.SUCCESS
        return out

    first, second = sample('first'), sample('second')

    for name in ('sample.json', 'marginal.csv', 'samples.csv'):
        assert first.join(name).read_binary() == second.join(name).read_binary()


def test_solver_not_converged(run, output):
    code = run('solve', '--curvature', 'disk_curvature', '--beta', '1', '--max-iterations', '1')

    assert code == model.ExitCode.NOT_CONVERGED
    assert not output('solve.json')['converged']
    with open(output('trace.csv')) as f:
        assert f.readline().strip() == util.TRACE_HEADER


def test_quadrature_failure_exits_not_converged(run):
    # the mass of a gaussian of width 0.01 is not resolved by the a-priori quadrature
    code = run(
        'solve',
        '--curvature', 'gaussian_curvature',
        '--curvature-arg', 'width=0.01',
        '--beta', '1',
        '--geometry', 'radial',
        '--max-iterations', '5',
    )

    assert code == model.ExitCode.NOT_CONVERGED


def test_invalid_input_exits_with_config_error(run):
    # beta beyond 4
    assert run(
        'solve',
        '--curvature', 'special_curvature',
        '--curvature-arg', 'gamma=0.5',
        '--domain-radius', '1e3',
        '--beta', '4.5',
    ) == model.ExitCode.INVALID_CONFIG
    assert run('solve', '--curvature', 'disk_curvature', '--beta', '1', '--kappa', '1') == (
        model.ExitCode.INVALID_CONFIG
    )
    assert run('solve', '--curvature', 'no_such_curvature', '--beta', '1') == model.ExitCode.INVALID_CONFIG
    assert run('verify', '--suite', 'nonsense') == model.ExitCode.INVALID_CONFIG
