# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import pgc.closedforms as closedforms
import pgc.diagnostics as diagnostics
import pgc.fields as fields
import pgc.model as model


@pytest.fixture
def family():
    def _family(name='chakie', **kwargs):
        return closedforms.FamilyInstance(family=name, **kwargs)
    return _family


def test_kappa_lower_bound():
    # K_1 is the constant 4: int (1 + |x|)^-q converges for q > 2
    examinee = diagnostics.kappa_lower_bound(closedforms.special_curvature(gamma=1.0))

    assert examinee.kappa == pytest.approx(2 * math.pi, rel=1e-2)
    assert diagnostics.kappa_lower_bound(closedforms.power_curvature(3)).kappa == 0.0
    assert diagnostics.kappa_lower_bound(closedforms.disk_curvature()).kappa == 0.0


def test_kappa_sup_star():
    declared = diagnostics.kappa_sup_star(closedforms.power_curvature(3), closedforms.HarmonicSpec())
    numeric = diagnostics.kappa_sup_star(
        closedforms.power_curvature(3),
        closedforms.HarmonicSpec(),
        use_declared_tail=False,
    )

    assert declared.beta_star == pytest.approx(-2.0)
    assert declared.kappa_star == pytest.approx(-2 * math.pi)
    assert numeric.q_star == pytest.approx(1.0, rel=1e-2)

    rapid = diagnostics.kappa_sup_star(closedforms.exponential_curvature(), closedforms.HarmonicSpec())
    assert rapid.unbounded
    assert rapid.beta_star == -math.inf


def test_kappa_sup_star_rejects_inadmissible_input():
    with pytest.raises(model.InadmissibleError):
        diagnostics.kappa_sup_star(closedforms.zero_curvature(), closedforms.HarmonicSpec())
    with pytest.raises(model.InadmissibleError):
        diagnostics.kappa_sup_star(closedforms.log_curvature(), closedforms.HarmonicSpec())
    # e^{-r + 2 x1} grows along the positive x1 axis
    with pytest.raises(model.InadmissibleError):
        diagnostics.kappa_sup_star(
            closedforms.exponential_curvature(),
            closedforms.HarmonicSpec(a=(0.0, 1.0)),
        )


def test_asymptotic_slope_of_round_sphere(family):
    inst = family(n=1)

    examinee = diagnostics.asymptotic_slope(inst.u, closedforms.HarmonicSpec(), r1=1e2, r2=1e3)

    assert examinee.kappa == pytest.approx(4 * math.pi, rel=1e-3)
    assert examinee.conclusive

    with pytest.raises(ValueError):
        diagnostics.asymptotic_slope(inst.u, closedforms.HarmonicSpec(), r1=1e2, r2=5e2)


def test_comparison_g_closed_form():
    # w = s^-5 gives g(e) = 5 / 27 e^-2
    profile = fields.RadialProfile.log_spaced(r_min=1.0, r_max=1e3, n_points=4000)
    profile = profile.with_values(profile.radii ** -5.0)

    examinee = diagnostics.comparison_g(profile, tail_exponent=5.0)

    assert float(examinee.g_at(math.e)) == pytest.approx(5 / 27 * math.exp(-2), abs=1e-6)
    assert examinee.ode_residual < 1e-6
    assert examinee.positive
    assert examinee.sublinear

    with pytest.raises(model.InadmissibleError):
        diagnostics.comparison_g(profile, tail_exponent=2.0)


def test_comparison_g_residual_shrinks_under_refinement():
    def residual(n_points):
        profile = fields.RadialProfile.log_spaced(r_min=1.0, r_max=1e3, n_points=n_points)
        profile = profile.with_values(profile.radii ** -5.0)
        return diagnostics.comparison_g(profile, tail_exponent=5.0).ode_residual

    coarse, fine = residual(501), residual(1001)

    # second order at least: halving the step divides the residual by ~4 or more
    assert fine < coarse
    assert coarse / fine > 3.0


def test_deviation_constant_stabilizes(family):
    inst = family(n=1, zeta=1.0)
    radii = np.geomspace(1e-2, 50.0, 400)

    near = diagnostics.deviation_constant(inst.u, radii[radii <= 25.0])
    examinee = diagnostics.deviation_constant(inst.u, radii)

    # the deviation decays like 2 tanh(1) / r, the maximum sits near |x| = tanh(1)
    assert examinee > 0.5
    assert examinee == near
    assert diagnostics.alpha_star(0.0) == 2.0
    assert diagnostics.alpha_star(examinee) == pytest.approx(2 * math.exp(2 * examinee))


def test_barrier_needs_large_alpha():
    profile = fields.RadialProfile.log_spaced(r_min=1.0, r_max=1e3, n_points=200)
    report = diagnostics.comparison_g(profile.with_values(profile.radii ** -5.0), tail_exponent=5.0)

    with pytest.raises(model.InadmissibleError):
        diagnostics.barrier_check(
            report,
            u=lambda x: np.zeros(x.shape[:-1]),
            curvature=lambda x: np.ones(x.shape[:-1]),
            alpha=1.5,
            c_u=0.0,
        )


def test_reflection_scan_brackets_symmetry_line():
    def u(x):
        return -(x[..., 0] - 1) ** 2 - x[..., 1] ** 2

    examinee = diagnostics.reflection_scan(u, lambdas=[2.0, 0.0, 1.5, 0.5])

    assert [lam for lam, _, _ in examinee.entries] == [0.0, 0.5, 1.5, 2.0]
    assert examinee.entries[1][2] == pytest.approx(0.0, abs=1e-12)
    assert examinee.crossing == (0.5, 1.5)


def test_radial_asymmetry_verdicts(family):
    radial = family(n=1, zeta=1.0, y=(1.0, 0.0))
    non_radial = family(n=2, zeta=1.0, y=(1.0, 0.0))
    radii = [0.2, 0.5, 1.0]

    examinee = diagnostics.radial_asymmetry(
        radial.u,
        diagnostics.candidate_centers(radial.u, family=radial),
        radii,
    )

    assert examinee.verdict is model.Verdict.RADIAL
    assert examinee.best_center == pytest.approx([math.tanh(1.0), 0.0])

    examinee = diagnostics.radial_asymmetry(
        non_radial.u,
        diagnostics.candidate_centers(non_radial.u, family=non_radial),
        radii,
    )

    assert examinee.verdict is model.Verdict.NON_RADIAL


def test_radial_asymmetry_invariances(family):
    inst = family(n=2, zeta=1.0)
    center = np.array([0.3, -0.2])
    radii = [0.5, 1.0, 1.5]
    n_angles = 64
    # a whole number of angular steps maps the sampled circles onto themselves
    turn = 2 * math.pi * 5 / n_angles
    rotation = np.array([
        [math.cos(turn), -math.sin(turn)],
        [math.sin(turn), math.cos(turn)],
    ])

    def shifted(x):
        return inst.u(x) + 5.0

    def rotated(x):
        return inst.u(center + (x - center) @ rotation.T)

    def asymmetry(u):
        report = diagnostics.radial_asymmetry(u, centers=[center], radii=radii, n_angles=n_angles)
        return report.radial_asymmetry

    examinee = asymmetry(inst.u)

    assert examinee > 1e-3
    assert asymmetry(shifted) == pytest.approx(examinee, abs=1e-12)
    assert asymmetry(rotated) == pytest.approx(examinee, abs=1e-12)


def test_uplus_l1():
    centers = [np.zeros(2), np.array([3.0, 0.0])]

    assert diagnostics.uplus_l1(lambda x: -np.sum(x ** 2, axis=-1), 2.0, centers) == 0.0
    assert diagnostics.uplus_l1(lambda x: np.ones(x.shape[:-1]), 2.0, centers) == pytest.approx(4 * math.pi)


def test_proposition_check(family):
    inst = family(n=1)
    surfaces = [diagnostics.Surface(name='round', u=inst.u, r_max=50.0, tail_exponent=4.0)]

    (examinee,) = diagnostics.proposition_check(closedforms.chakie_curvature(n=1), surfaces)

    assert examinee.holds
    assert examinee.integral == pytest.approx(4 * math.pi, rel=1e-5)
    assert examinee.kappa_lower == pytest.approx(2 * math.pi, rel=1e-2)
