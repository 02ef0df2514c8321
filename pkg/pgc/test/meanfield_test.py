# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import dataclasses
import math

import numpy as np
import pytest

import pgc.closedforms as closedforms
import pgc.meanfield as meanfield
import pgc.model as model


@pytest.fixture
def unit_disk():
    def _unit_disk(geometry):
        points = geometry.points()
        inside = np.hypot(points[:, 0], points[:, 1]) <= 1.0
        return geometry.normalize(np.where(inside, 1.0, 0.0))
    return _unit_disk


@pytest.fixture
def exponential_run():
    tau = meanfield.build_apriori(closedforms.exponential_curvature())
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=100.0, n_points=500)

    def _exponential_run(harmonic=None, **kwargs):
        run_tau = tau
        if harmonic is not None:
            run_tau = meanfield.build_apriori(closedforms.exponential_curvature(), harmonic=harmonic)
        cfg = meanfield.SolverConfig(beta=-2.0, geometry=geometry, **kwargs)
        return meanfield.solve_minimizer(cfg, run_tau), run_tau
    return _exponential_run


def test_radial_log_potential_of_uniform_disk(unit_disk):
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=2.0, n_points=4000)
    rho = unit_disk(geometry)

    examinee = meanfield.log_potential(rho, geometry)

    # exterior: ln r; center: int_0^1 2 s ln s ds = -1/2
    assert examinee[-1] == pytest.approx(math.log(2.0), rel=1e-10)
    assert examinee[0] == pytest.approx(-0.5, abs=1e-3)


def test_planar_log_potential_far_field(unit_disk):
    geometry = meanfield.PlanarGeometry(halfwidth=2.0, n_cells=80)
    rho = unit_disk(geometry)

    examinee = meanfield.log_potential(rho, geometry, x=np.array([[10.0, 0.0], [0.0, -20.0]]))

    assert examinee == pytest.approx([math.log(10.0), math.log(20.0)], abs=1e-4)


def test_log_potential_requires_normalized_density():
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=2.0, n_points=100)

    with pytest.raises(ValueError):
        meanfield.log_potential(np.ones(100), geometry)


def test_apriori_mass():
    disk = meanfield.build_apriori(closedforms.disk_curvature(radius=1.0))
    exponential = meanfield.build_apriori(closedforms.exponential_curvature())

    assert disk.mass == pytest.approx(math.pi, rel=1e-10)
    assert exponential.mass == pytest.approx(2 * math.pi, rel=1e-6)
    assert disk.radial


def test_apriori_mass_on_truncated_domain():
    # K_gamma = 4 gamma (1 + r^2)^-(2 - 2 gamma) decays too slowly for gamma = 0.6
    curvature = closedforms.special_curvature(gamma=0.6)

    with pytest.raises(model.InadmissibleError):
        meanfield.build_apriori(curvature)

    examinee = meanfield.build_apriori(curvature, domain_radius=10.0)

    assert examinee.mass == pytest.approx(2 * math.pi * 6 * (101 ** 0.2 - 1), rel=1e-6)
    assert examinee.density(np.array([[11.0, 0.0]])) == pytest.approx([0.0])


def test_apriori_rejects_divergent_and_flat_input():
    # (1 + r^2)^-3/2 e^{2 x1} grows along the positive x1 axis
    with pytest.raises(model.InadmissibleError):
        meanfield.build_apriori(
            closedforms.power_curvature(3),
            harmonic=closedforms.HarmonicSpec(a=(0.0, 1.0)),
        )
    with pytest.raises(model.InadmissibleError):
        meanfield.build_apriori(closedforms.zero_curvature())


def test_beta_range():
    meanfield.check_beta(-1.0, -2.0)
    meanfield.check_beta(3.9, -math.inf)

    with pytest.raises(model.InadmissibleError):
        meanfield.check_beta(4.5, -math.inf)
    with pytest.raises(model.InadmissibleError):
        meanfield.check_beta(-3.0, -2.0)

    tau = meanfield.build_apriori(closedforms.power_curvature(3))
    assert meanfield.beta_star_of(tau) == pytest.approx(-2.0)

    truncated = meanfield.build_apriori(closedforms.power_curvature(3), domain_radius=5.0)
    assert meanfield.beta_star_of(truncated) == -math.inf


def test_solver_config_validation():
    geometry = meanfield.RadialGeometry(n_points=10)

    with pytest.raises(ValueError):
        meanfield.SolverConfig(beta=1.0, geometry=geometry, damping=0.0)
    with pytest.raises(ValueError):
        meanfield.SolverConfig(beta=1.0, geometry=geometry, initial='user-supplied')
    with pytest.raises(ValueError):
        meanfield.SolverConfig(beta=1.0, geometry=geometry, initial='nonsense')


def test_radial_geometry_needs_radial_input():
    tau = meanfield.build_apriori(
        closedforms.disk_curvature(radius=1.0),
        harmonic=closedforms.HarmonicSpec(a=(0.0, 1.0)),
    )
    cfg = meanfield.SolverConfig(beta=1.0, geometry=meanfield.RadialGeometry(n_points=100))

    assert not tau.radial
    with pytest.raises(ValueError):
        meanfield.solve_minimizer(cfg, tau)


def test_free_energy_of_mu_one():
    tau = meanfield.build_apriori(closedforms.exponential_curvature())
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=100.0, n_points=500)
    mu1 = meanfield.mu_one_on(tau, geometry)

    examinee = meanfield.free_energy(mu1, -2.0, tau, geometry)

    assert examinee.S1 == pytest.approx(0.0, abs=1e-12)
    assert examinee.F == pytest.approx(-2.0 * examinee.E)


def test_special_family_fixed_point():
    # for K_1/2 and beta = 2 the minimizer is rho = (1 / pi) (1 + r^2)^-2
    curvature = closedforms.special_curvature(gamma=0.5)
    tau = meanfield.build_apriori(curvature, domain_radius=1e3)
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1e3, n_points=1500)
    cfg = meanfield.SolverConfig(beta=2.0, geometry=geometry)

    result = meanfield.solve_minimizer(cfg, tau)

    assert result.converged
    assert result.residual < 1e-10
    assert meanfield.fixed_point_residual(result, tau) < 1e-9
    assert result.free_energy.S1 <= 0
    assert result.free_energy.F <= result.initial_free_energy.F

    exact = 1 / math.pi / (1 + geometry.radii ** 2) ** 2
    assert geometry.integrate(np.abs(result.rho - exact)) < 1e-2

    examinee = meanfield.reconstruct_u(result, curvature, closedforms.HarmonicSpec(), tau=tau)

    assert examinee.kappa == pytest.approx(2 * math.pi)
    assert meanfield.integral_curvature_of(examinee, curvature) == pytest.approx(2 * math.pi, rel=1e-8)
    assert examinee.pde_residual < 1e-2
    # U is the half sphere -ln(1 + r^2) / 2 up to a constant
    near = geometry.radii <= 100.0
    offset = examinee.U[near] + 0.5 * np.log1p(geometry.radii[near] ** 2)
    assert np.ptp(offset) < 1e-3


def test_harmonic_constant_shifts_only_u0(exponential_run):
    plain, tau = exponential_run()
    shifted, shifted_tau = exponential_run(harmonic=closedforms.HarmonicSpec().shifted(0.7))

    assert plain.converged and shifted.converged
    assert np.max(np.abs(plain.rho - shifted.rho)) < 1e-8

    curvature = closedforms.exponential_curvature()
    plain = meanfield.reconstruct_u(plain, curvature, tau.harmonic, tau=tau)
    shifted = meanfield.reconstruct_u(shifted, curvature, shifted_tau.harmonic, tau=shifted_tau)
    assert shifted.U == pytest.approx(plain.U, abs=1e-6)


def test_reconstruct_u_sign_checks(exponential_run):
    result, tau = exponential_run()

    with pytest.raises(model.InadmissibleError):
        meanfield.reconstruct_u(result, closedforms.special_curvature(gamma=0.5), tau.harmonic)
    with pytest.raises(model.InadmissibleError):
        meanfield.reconstruct_u(result, closedforms.zero_curvature(), tau.harmonic)

    flat = meanfield.reconstruct_u(
        result,
        closedforms.zero_curvature(),
        closedforms.HarmonicSpec(a=(1.5,)),
        beta=0,
    )
    assert flat.U == pytest.approx(np.full_like(result.rho, 1.5))
    assert flat.pde_residual == 0.0


def test_multi_start_agrees_for_negative_beta(exponential_run):
    _, tau = exponential_run()
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=100.0, n_points=500)
    cfg = meanfield.SolverConfig(beta=-2.0, geometry=geometry)
    initials = [
        cfg,
        dataclasses.replace(cfg, initial=meanfield.InitialDensity.UNIFORM_DISK, disk_radius=2.0),
        dataclasses.replace(
            cfg,
            initial=meanfield.InitialDensity.USER,
            initial_density=np.exp(-geometry.radii / 3),
        ),
    ]

    results = meanfield.multi_start(cfg, tau, initials=initials)

    assert all(result.converged for result in results)
    assert meanfield.distinct_limits(results, tolerance=1e-8) == [0]
    # beta < 0 pushes mass outwards: rho stays radially non-increasing
    assert np.all(np.diff(results[0].rho) <= 1e-14)


def test_uniform_disk_pair_moment():
    tau = meanfield.build_apriori(closedforms.disk_curvature(radius=1.0))
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1.0, n_points=2000)

    examinee = meanfield.apriori_pair_moment(tau, geometry)

    assert examinee == pytest.approx(-0.25, abs=1e-3)
