# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import pgc.closedforms as closedforms
import pgc.fields as fields
import pgc.meanfield as meanfield
import pgc.model as model
import pgc.verify as verify


def test_curvature_integrals_suite():
    examinee = verify.run_suite('curvature-integrals')

    assert examinee.passed, [c for c in examinee.checks if not c.passed]
    names = [c.name for c in examinee.checks]
    assert 'stuart: truncated integral doubles with r_max' in names
    assert len(names) == 7


def test_run_suite_keeps_completed_checks(monkeypatch):
    def aborting_suite(fast=False):
        yield verify.below('first', 0.5, 1.0)
        raise model.QuadratureError('levels differ')

    monkeypatch.setitem(verify.SUITES, 'aborting', aborting_suite)

    examinee = verify.run_suite('aborting')

    assert not examinee.passed
    assert [c.name for c in examinee.checks] == ['first', 'suite completed']
    assert examinee.checks[0].passed
    assert 'QuadratureError' in examinee.checks[1].detail
    assert verify.exit_code([examinee]) == model.ExitCode.VERIFICATION_FAILED


def test_checks():
    assert verify.below('b', 1.0, 2.0).passed
    assert not verify.below('b', 2.0, 2.0).passed
    assert verify.within('w', 1.05, 1.0, rel=0.1).passed
    assert not verify.within('w', 1.2, 1.0, rel=0.1).passed
    assert verify.holds('h', True).value is None


def test_resolve():
    assert verify.resolve(['all']) == list(verify.SUITES)
    assert verify.resolve(['barrier', 'figures']) == ['barrier', 'figures']
    with pytest.raises(ValueError):
        verify.resolve(['barrier', 'nonsense'])


def test_marginal_distance_of_independent_particles():
    tau = meanfield.build_apriori(closedforms.disk_curvature(radius=1.0))
    uniform = fields.RadialProfile.log_spaced(r_min=1e-3, r_max=1.0, n_points=2000)
    uniform = uniform.with_values(np.full(2000, 1 / math.pi))

    examinee, runs = verify._marginal_distance(
        tau,
        uniform,
        n_particles=10,
        beta=0.0,
        sweeps=3000,
        thin=2,
        seed=5,
        edges=np.linspace(0.0, 1.0, 11),
    )

    assert examinee.n == 10
    assert len(runs) == 4
    assert examinee.l1 < 0.05
    assert 0 < examinee.stderr < 0.05
    assert examinee.kind is model.FailureKind.NONE
