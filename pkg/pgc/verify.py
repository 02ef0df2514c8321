# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
verification suites: each suite yields numerical checks on closed-form and computed solutions,
every check carrying its measured value and the limit it is held against.
'''

import dataclasses
import logging
import math
import typing

import numpy as np
import scipy.ndimage
import scipy.optimize

import pgc.closedforms as closedforms
import pgc.diagnostics as diagnostics
import pgc.fields as fields
import pgc.loggas as loggas
import pgc.meanfield as meanfield
import pgc.model as model

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float = None
    limit: float = None
    detail: str = ''


@dataclasses.dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: typing.List[Check]

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            'suite': self.suite,
            'passed': self.passed,
            'checks': [dataclasses.asdict(c) for c in self.checks],
        }


def below(name: str, value: float, limit: float, detail: str = '') -> Check:
    return Check(
        name=name,
        passed=bool(value < limit),
        value=float(value),
        limit=float(limit),
        detail=detail,
    )


def within(name: str, value: float, expected: float, rel: float, abs_: float = 0.0) -> Check:
    error = abs(value - expected)
    limit = rel * abs(expected) + abs_
    return Check(
        name=name,
        passed=bool(error <= limit),
        value=float(value),
        limit=float(limit),
        detail=f'expected {expected:.8g}, |error| {error:.3g}',
    )


def holds(name: str, condition: bool, value: float = None, detail: str = '') -> Check:
    return Check(
        name=name,
        passed=bool(condition),
        value=None if value is None else float(value),
        detail=detail,
    )


# grid helpers for the figure configurations

def count_local_maxima(field: fields.PlanarField) -> typing.Tuple[int, np.ndarray]:
    '''
    number of strict-or-plateau local maxima (3x3 neighbourhood) of the sampled values; plateaus
    of equal values count once. returns the count and the label array.
    '''
    values = field.values
    peak = scipy.ndimage.maximum_filter(values, size=3, mode='constant', cval=-np.inf)
    labels, count = scipy.ndimage.label(values == peak)
    return count, labels


def superlevel_components(field: fields.PlanarField, level: float) -> int:
    _, count = scipy.ndimage.label(field.values >= level)
    return count


def refine_maximum(fn: fields.Evaluator, start: np.ndarray) -> typing.Tuple[np.ndarray, float]:
    result = scipy.optimize.minimize(
        lambda x: -float(fn(np.asarray(x))),
        x0=np.asarray(start, dtype=float),
        method='Nelder-Mead',
        options={
            'xatol': 1e-10,
            'fatol': 1e-14,
            'maxiter': 4000,
        },
    )
    return result.x, -float(result.fun)


def level_line_variation(
    inst: closedforms.FamilyInstance,
    s: float,
    n_points: int = 721,
) -> float:
    '''
    max - min of u along the line {<v, x - y> = s |v|} over one period of the v' direction
    '''
    v, v_prime = inst.frame()
    v_hat = v / np.linalg.norm(v)
    v_prime_hat = v_prime / np.linalg.norm(v_prime)
    period = 2 * math.pi / math.sqrt(inst.K0)
    b = np.linspace(0.0, period, n_points)
    points = np.asarray(inst.y) + s * v_hat + b[:, None] * v_prime_hat
    values = inst.u(points)
    return float(np.ptp(values))


# suites

PDE_CASES = (
    ('chakie n=1 zeta=0', dict(family='chakie', n=1, zeta=0.0)),
    ('chakie n=1 zeta=1', dict(family='chakie', n=1, zeta=1.0)),
    ('chakie n=2 zeta=0', dict(family='chakie', n=2, zeta=0.0)),
    ('chakie n=2 zeta=1', dict(family='chakie', n=2, zeta=1.0)),
    ('stuart zeta=1 K0=1', dict(family='stuart', zeta=1.0, K0=1.0, y=(0.0, -1.0))),
    ('special gamma=0.6', dict(family='special', gamma=0.6)),
    ('special gamma=1', dict(family='special', gamma=1.0)),
)


def _family_residual(inst: closedforms.FamilyInstance, halfwidth: float, h: float) -> float:
    '''
    sup of the 5-point residual relative to sup K e^{2u} on the interior cells
    '''
    n_cells = fields.n_cells_for(halfwidth, h)
    u = fields.PlanarField.sample(inst.u, halfwidth=halfwidth, n_cells=n_cells)
    residual = fields.pde_residual(u, inst.curvature)
    source = np.abs(inst.curvature(u.points()) * np.exp(2 * u.values))
    return residual.sup_norm() / float(np.max(source[residual.mask]))


def pde_residual_suite(fast: bool = False) -> typing.Iterator[Check]:
    for name, kwargs in PDE_CASES:
        inst = closedforms.FamilyInstance(**kwargs)
        coarse = _family_residual(inst, halfwidth=3.0, h=0.01)
        fine = _family_residual(inst, halfwidth=3.0, h=0.005)
        yield below(f'{name}: relative residual at h=0.01', coarse, 1e-3)
        yield within(f'{name}: residual ratio h -> h/2', coarse / fine, 4.0, rel=0.2)


def curvature_integrals_suite(fast: bool = False) -> typing.Iterator[Check]:
    for n in (1, 2):
        for zeta in (0.0, 1.0):
            inst = closedforms.FamilyInstance(family='chakie', n=n, zeta=zeta)
            integral = fields.integral_curvature(
                K_eval=inst.curvature,
                u_eval=inst.u,
                r_max=50.0,
                tail_exponent=2 * n + 2,
            )
            yield within(
                f'chakie n={n} zeta={zeta}: integral curvature',
                integral.value,
                4 * math.pi * n,
                rel=0.01,
            )

    for gamma in (0.6, 1.0):
        inst = closedforms.FamilyInstance(family='special', gamma=gamma)
        integral = fields.integral_curvature(
            K_eval=inst.curvature,
            u_eval=inst.u,
            r_max=50.0,
            tail_exponent=4.0,
        )
        yield within(
            f'special gamma={gamma}: integral curvature',
            integral.value,
            4 * math.pi * gamma,
            rel=0.01,
        )

    inst = closedforms.FamilyInstance(family='stuart', zeta=1.0, K0=1.0, y=(0.0, -1.0))

    # quadrature levels differ by ~1e-4 relative at r_max = 60
    def truncated(r_max):
        return fields.integral_curvature(
            K_eval=inst.curvature,
            u_eval=inst.u,
            r_max=r_max,
            tolerance=1e-3,
        ).value

    i30, i60 = truncated(30.0), truncated(60.0)
    yield within('stuart: truncated integral doubles with r_max', i60 / i30, 2.0, rel=0.15)


def _special_oracle_run(n_points: int = 2000):
    curvature = closedforms.special_curvature(gamma=0.6)
    harmonic = closedforms.HarmonicSpec()
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1e4, n_points=n_points)
    tau = meanfield.build_apriori(curvature, harmonic, domain_radius=1e4)
    config = meanfield.SolverConfig(beta=2.4, geometry=geometry, tolerance=1e-10)
    result = meanfield.solve_minimizer(config, tau)
    result = meanfield.reconstruct_u(result, curvature, harmonic, tau=tau)
    return curvature, harmonic, tau, geometry, result


def solver_oracle_suite(fast: bool = False) -> typing.Iterator[Check]:
    curvature, harmonic, tau, geometry, result = _special_oracle_run()
    r = geometry.radii
    exact = 1 / math.pi / (1 + r ** 2) ** 2
    l1 = geometry.integrate(np.abs(result.rho - exact))

    yield holds('converged', result.converged, value=result.iterations)
    yield below('fixed-point residual', result.residual, 1e-10)
    yield below('independent residual re-evaluation', meanfield.fixed_point_residual(result, tau), 1e-9)
    yield below('L1 distance to (1/pi)(1+r^2)^-2', l1, 1e-2)
    yield below('PDE residual of reconstructed U', result.pde_residual, 1e-3)

    slope = diagnostics.asymptotic_slope(result.u_evaluator, harmonic, r1=1e2, r2=1e3)
    yield within('asymptotic slope', slope.kappa, 2.4 * math.pi, rel=0.02)
    yield within(
        'integral curvature of U on the grid',
        meanfield.integral_curvature_of(result, curvature),
        result.kappa,
        rel=1e-8,
    )
    yield holds(
        'free energy not above the initial density',
        result.free_energy.F <= result.initial_free_energy.F + 1e-12,
        value=result.free_energy.F,
    )
    yield holds('relative entropy non-positive', result.free_energy.S1 <= 1e-12, value=result.free_energy.S1)


def _exponential_runs(geometry: meanfield.GeometryBase, tolerance: float = 1e-10):
    curvature = closedforms.exponential_curvature(sign=-1)
    harmonic = closedforms.HarmonicSpec()
    tau = meanfield.build_apriori(curvature, harmonic)
    base = meanfield.SolverConfig(beta=-2.0, geometry=geometry, tolerance=tolerance)

    points = geometry.points()
    user = np.exp(-np.hypot(points[:, 0], points[:, 1]) / 3)
    initials = [
        dataclasses.replace(base, initial=meanfield.InitialDensity.APRIORI),
        dataclasses.replace(base, initial=meanfield.InitialDensity.UNIFORM_DISK, disk_radius=2.0),
        dataclasses.replace(base, initial=meanfield.InitialDensity.USER, initial_density=user),
    ]
    runs = meanfield.multi_start(base, tau, initials=initials)
    runs = [meanfield.reconstruct_u(run, curvature, harmonic, tau=tau) for run in runs]
    return curvature, tau, runs


def uniqueness_suite(fast: bool = False) -> typing.Iterator[Check]:
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1e2, n_points=1000)
    _, _, runs = _exponential_runs(geometry)

    for i, run in enumerate(runs):
        yield holds(f'run {i} converged', run.converged, value=run.iterations)
    distance = max(
        float(np.max(np.abs(a.rho - b.rho)))
        for i, a in enumerate(runs) for b in runs[i + 1:]
    )
    yield below('pairwise sup distance of limits', distance, 1e-8)

    rho = runs[0].rho
    yield holds(
        'rho non-increasing in r',
        np.all(np.diff(rho) <= 1e-10),
        value=float(np.max(np.diff(rho))),
    )
    yield holds(
        'U non-decreasing in r',
        np.all(np.diff(runs[0].U) >= -1e-10),
        value=float(np.min(np.diff(runs[0].U))),
    )

    planar = meanfield.PlanarGeometry(halfwidth=12.8, n_cells=64 if fast else 128)
    curvature = closedforms.exponential_curvature(sign=-1)
    tau = meanfield.build_apriori(curvature, closedforms.HarmonicSpec())
    planar_run = meanfield.solve_minimizer(
        meanfield.SolverConfig(beta=-2.0, geometry=planar, tolerance=1e-10),
        tau,
    )
    points = planar.points()
    radial_rho = runs[0].density.interpolate(np.hypot(points[:, 0], points[:, 1]))
    l1 = planar.integrate(np.abs(planar_run.rho - radial_rho))
    yield below('planar run matches radial run (L1)', l1, 1e-2)


def symmetry_suite(fast: bool = False) -> typing.Iterator[Check]:
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1e2, n_points=1000)
    _, _, runs = _exponential_runs(geometry)
    rho = runs[0].density_evaluator()

    lambdas = (-3.0, -2.0, -1.0, -0.5, -0.1)
    minima = [diagnostics.reflection_min(rho, lam, direction=0.0) for lam in lambdas]
    yield holds(
        'reflection minima of rho vanish for lambda < 0',
        all(abs(m) <= 1e-10 for m in minima),
        value=max(abs(m) for m in minima),
    )

    chakie = closedforms.FamilyInstance(family='chakie', n=2, zeta=1.0)
    scan = diagnostics.reflection_scan(chakie.u, lambdas=np.linspace(-1.5, 1.5, 7))
    lowest = min(m for _, _, m in scan.entries)
    yield holds('chakie n=2 zeta=1 has negative reflection minima', lowest < -1e-6, value=lowest)

    inst = closedforms.FamilyInstance(family='chakie', n=1, zeta=1.0)
    halfwidth, n_cells = 2.0, 40
    report = diagnostics.radial_asymmetry(
        inst.u,
        centers=diagnostics.center_lattice(halfwidth=halfwidth, n_cells=n_cells),
        radii=(0.5, 1.0, 1.5),
    )
    expected = closedforms.symmetry_center(inst)
    offset = float(np.max(np.abs(report.best_center - expected)))
    yield below(
        'chakie n=1 zeta=1 symmetry center located',
        offset,
        2 * halfwidth / n_cells + 1e-12,
        detail=f'best center {report.best_center.tolist()}, expected {expected.tolist()}',
    )


def _disk_planar_run(harmonic: closedforms.HarmonicSpec, n_cells: int):
    curvature = closedforms.disk_curvature(radius=1.0)
    tau = meanfield.build_apriori(curvature, harmonic)
    geometry = meanfield.PlanarGeometry(halfwidth=1.25, n_cells=n_cells)
    config = meanfield.SolverConfig(beta=2.0, geometry=geometry, tolerance=1e-10)
    result = meanfield.solve_minimizer(config, tau)
    return meanfield.reconstruct_u(result, curvature, harmonic, tau=tau)


def symmetry_breaking_suite(fast: bool = False) -> typing.Iterator[Check]:
    n_cells = 50 if fast else 100
    broken_harmonic = closedforms.HarmonicSpec(a=(0.0, 1.0))
    broken = _disk_planar_run(broken_harmonic, n_cells)
    yield holds('converged (H = Re z)', broken.converged, value=broken.iterations)
    radial = _disk_planar_run(closedforms.HarmonicSpec(), n_cells)
    yield holds('converged (H = 0)', radial.converged, value=radial.iterations)

    radii = (2.0, 3.0, 4.0, 5.0)
    floor = diagnostics.radial_asymmetry(radial.u_evaluator, centers=[np.zeros(2)], radii=radii)
    asymmetry = diagnostics.radial_asymmetry(broken.u_evaluator, centers=[np.zeros(2)], radii=radii)
    ratio = asymmetry.radial_asymmetry / max(floor.radial_asymmetry, 1e-300)
    yield Check(
        name='asymmetry above 1e3 x radial floor',
        passed=bool(ratio > 1e3),
        value=float(ratio),
        limit=1e3,
    )

    far = fields.polar_points(np.geomspace(1e2, 1e4, 9), 32)
    kappa = broken.kappa
    remainder = (
        broken.u_evaluator(far) - broken_harmonic(far)
        + kappa / (2 * math.pi) * np.log(np.hypot(far[..., 0], far[..., 1]))
    )
    yield below('U - H + (kappa/2pi) ln|x| variation on [1e2, 1e4]', float(np.ptp(remainder)), 0.05)


def _lower_bound_checks(
    curvature: closedforms.CurvatureSpec,
    surfaces: typing.Sequence[diagnostics.Surface],
) -> typing.Iterator[Check]:
    for result in diagnostics.proposition_check(curvature, surfaces):
        yield holds(
            f'{result.name}: integral curvature >= kappa_*',
            result.holds,
            value=result.integral,
            detail=f'kappa_* = {result.kappa_lower:.6g}',
        )


def kappa_bounds_suite(fast: bool = False) -> typing.Iterator[Check]:
    for gamma in (0.4, 0.75, 1.0):
        bound = diagnostics.kappa_lower_bound(closedforms.special_curvature(gamma=gamma))
        expected = 2 * math.pi * max(2 * gamma - 1, 0.0)
        logger.info(f'kappa_*(K_{gamma}) = {bound.kappa:.6g} (2 pi (2 gamma - 1)^+ = {expected:.6g})')
        yield within(
            f'kappa_*(K_gamma), gamma={gamma}',
            bound.kappa,
            expected,
            rel=0.05,
            abs_=0.01,
        )

    for n in (1, 2):
        surfaces = [
            diagnostics.Surface(
                name=f'chakie n={n} zeta={zeta}',
                u=closedforms.FamilyInstance(family='chakie', n=n, zeta=zeta).u,
                r_max=50.0,
                tail_exponent=2 * n + 2,
            )
            for zeta in (0.0, 1.0)
        ]
        yield from _lower_bound_checks(closedforms.chakie_curvature(n), surfaces)

    for gamma in (0.6, 1.0):
        surfaces = [diagnostics.Surface(
            name=f'special gamma={gamma}',
            u=closedforms.FamilyInstance(family='special', gamma=gamma).u,
            r_max=50.0,
            tail_exponent=4.0,
        )]
        yield from _lower_bound_checks(closedforms.special_curvature(gamma), surfaces)


def barrier_suite(fast: bool = False) -> typing.Iterator[Check]:
    profile = fields.RadialProfile.log_spaced(r_min=1.0, r_max=1e3, n_points=4000)
    w = profile.radii ** -5.0
    report = diagnostics.comparison_g(profile.with_values(w), tail_exponent=5.0)
    yield within('g(e) for w = s^-5 on s >= 1', float(report.g_at(math.e)), 5 / 27 * math.exp(-2), rel=0, abs_=1e-6)

    inst = closedforms.FamilyInstance(family='special', gamma=0.6)
    profile = fields.RadialProfile.log_spaced(r_min=1e-3, r_max=1e4, n_points=4000)
    points = fields.polar_points(profile.radii, 16)
    w = np.mean(inst.curvature(points) * np.exp(2 * inst.u(points)), axis=1)
    report = diagnostics.comparison_g(profile.with_values(w), tail_exponent=4.0)
    r = report.radii

    yield below('Euler ODE residual (relative)', report.ode_residual, 1e-6)
    yield holds('g >= 0 for r > 1', report.positive, value=float(np.min(report.g.values[r > 1])))
    yield below('g(r)/r at r = 1e3', float(report.g_at(1e3)) / 1e3, 1e-4)

    r_cap = 1e3
    c_u = diagnostics.deviation_constant(inst.u, radii=r[r <= r_cap])
    alpha_star = diagnostics.alpha_star(c_u)
    checked = diagnostics.barrier_check(
        report,
        u=inst.u,
        curvature=inst.curvature,
        alpha=2 * alpha_star,
        c_u=c_u,
        r_cap=r_cap,
    )
    yield below(
        'barrier margin for alpha = 2 alpha*',
        checked.margin,
        0.0,
        detail=f'c(u) = {c_u:.3g}, alpha* = {checked.alpha_star:.6g}, R(alpha) = {checked.R_alpha:.6g}',
    )


@dataclasses.dataclass(frozen=True)
class MarginalDistance:
    n: int
    l1: float
    stderr: float
    kind: model.FailureKind


def _marginal_distance(
    tau: meanfield.AprioriMeasure,
    density: fields.RadialProfile,
    n_particles: int,
    beta: float,
    sweeps: int,
    thin: int,
    seed: int,
    edges: np.ndarray,
    threshold: float = 0.1,
    n_chains: int = 4,
) -> typing.Tuple[MarginalDistance, typing.List[loggas.ChainRun]]:
    runs = loggas.run_chains(
        tau=tau,
        n_particles=n_particles,
        beta=beta,
        sweeps=sweeps,
        edges=edges,
        seed=seed,
        n_chains=n_chains,
        thin=thin,
    )
    distances = np.array([loggas.l1_distance(run.histogram, density) for run in runs])
    distance = MarginalDistance(
        n=n_particles,
        l1=loggas.l1_distance(loggas.merged_histogram(runs), density),
        stderr=float(np.std(distances, ddof=1) / math.sqrt(distances.size)),
        kind=loggas.classify_l1_failure(distances, threshold=threshold),
    )
    logger.info(f'N={n_particles}: L1 {distance.l1:.4g} +- {distance.stderr:.2g} ({distance.kind.value})')
    return distance, runs


def mc_consistency_suite(fast: bool = False) -> typing.Iterator[Check]:
    harmonic = closedforms.HarmonicSpec()
    disk = meanfield.build_apriori(closedforms.disk_curvature(radius=1.0), harmonic)

    # N = 2 against the exact distance distribution
    runs = loggas.run_chains(
        tau=disk,
        n_particles=2,
        beta=1.0,
        sweeps=20_000 if fast else 200_000,
        edges=np.linspace(0.0, 1.0, 11),
        seed=11,
        n_chains=4,
        thin=2,
    )
    moment = loggas.pooled_pair_moment(runs)
    yield within(
        'N=2 pair log moment vs quadrature',
        moment.value,
        loggas.disk_pair_log_moment(1.0),
        rel=0,
        abs_=3 * moment.stderr,
    )

    # beta = 0: independent particles
    runs = loggas.run_chains(
        tau=disk,
        n_particles=20,
        beta=0.0,
        sweeps=2_000 if fast else 10_000,
        edges=np.linspace(0.0, 1.0, 11),
        seed=12,
        n_chains=2,
        keep_samples=True,
    )
    samples = np.concatenate([run.samples for run in runs])
    ks = loggas.ks_distance(samples, lambda r: np.clip(r, 0.0, 1.0) ** 2)
    yield below('beta=0 KS distance to mu1', ks, 0.02)
    mu_one = meanfield.RadialGeometry(r_min=1e-3, r_max=1.0, n_points=1000)
    profile = mu_one.field(meanfield.mu_one_on(disk, mu_one))
    yield below('beta=0 L1 distance to mu1', loggas.l1_distance(loggas.merged_histogram(runs), profile), 0.05)

    # special family K_0.5 at beta = 2 against the mean-field density
    curvature = closedforms.special_curvature(gamma=0.5)
    tau = meanfield.build_apriori(curvature, harmonic, domain_radius=1e3)
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1e3, n_points=2000)
    solved = meanfield.solve_minimizer(
        meanfield.SolverConfig(beta=2.0, geometry=geometry, tolerance=1e-10),
        tau,
    )
    edges = np.linspace(0.0, 6.0, 31)
    main, runs = _marginal_distance(
        tau,
        solved.density,
        n_particles=100,
        beta=2.0,
        sweeps=4_000 if fast else 250_000,
        thin=2 if fast else 10,
        seed=13,
        edges=edges,
    )
    yield below('N=100 marginal vs mean-field density (L1)', main.l1, 0.1, detail=main.kind.value)

    moment = loggas.pooled_pair_moment(runs)
    product = meanfield.apriori_pair_moment(tau, geometry)
    yield holds(
        'pair moment below the product-measure moment',
        2.0 * moment.value <= 2.0 * product + 3 * 2.0 * moment.stderr,
        value=moment.value,
        detail=f'mu1 x mu1 moment {product:.6g}',
    )

    # consistency in N: equal sweep budgets, the marginal moves towards the density
    trend = [
        _marginal_distance(
            tau,
            solved.density,
            n_particles=n,
            beta=2.0,
            sweeps=2_000 if fast else 20_000,
            thin=2 if fast else 5,
            seed=14,
            edges=edges,
        )[0]
        for n in ((25, 50) if fast else (25, 50, 100, 200))
    ]
    rises = [
        b.l1 - a.l1 - 3 * math.hypot(a.stderr, b.stderr)
        for a, b in zip(trend[:-1], trend[1:])
    ]
    yield Check(
        name='L1 to mean-field density non-increasing in N',
        passed=bool(max(rises) <= 0),
        value=float(max(rises)),
        limit=0.0,
        detail=', '.join(f'N={d.n}: {d.l1:.4g} +- {d.stderr:.2g}' for d in trend),
    )

    a = loggas.run_chain(loggas.new_chain(disk, 5, 1.0, seed=3), sweeps=200, edges=np.linspace(0, 1, 5))
    b = loggas.run_chain(loggas.new_chain(disk, 5, 1.0, seed=3), sweeps=200, edges=np.linspace(0, 1, 5))
    yield holds(
        'identical seeds give identical chains',
        np.array_equal(a.pair_moments, b.pair_moments) and np.array_equal(a.histogram.counts, b.histogram.counts),
    )


def figures_suite(fast: bool = False) -> typing.Iterator[Check]:
    chakie = closedforms.FamilyInstance(family='chakie', n=2, y=(1.0, 0.0), zeta=1.0)
    halfwidth = 2.0
    field = fields.PlanarField.sample(
        chakie.conformal_factor,
        halfwidth=halfwidth,
        n_cells=fields.n_cells_for(halfwidth, 0.01),
    )
    count, labels = count_local_maxima(field)
    expected = math.cosh(1.0) ** 2

    yield holds('two local maxima of e^2u', count == 2, value=count)
    yield holds(
        'mirror symmetric under theta -> theta + pi',
        np.allclose(field.values, np.rot90(field.values, 2), rtol=1e-12, atol=0),
    )
    yield holds('two islands at level 2', superlevel_components(field, 2.0) == 2)

    points = field.points()
    refined = []
    for label in range(1, count + 1):
        start = points[labels == label][0]
        refined.append(refine_maximum(chakie.conformal_factor, start))
    for location, value in refined:
        yield within(f'maximum at {np.round(location, 6).tolist()}', value, expected, rel=0, abs_=1e-6)
    if len(refined) == 2:
        (xa, _), (xb, _) = refined
        yield below('maxima are antipodal', float(np.max(np.abs(xa + xb))), 1e-6)

    stuart = closedforms.FamilyInstance(family='stuart', K0=1.0, zeta=1.0, y=(0.0, -1.0))
    for s in (-6.0, 6.0):
        yield below(
            f'stuart level line <v, x - y> = {s}: variation of u',
            level_line_variation(stuart, s),
            0.01,
        )


SUITES = {
    'pde-residual': pde_residual_suite,
    'curvature-integrals': curvature_integrals_suite,
    'solver-oracle': solver_oracle_suite,
    'uniqueness': uniqueness_suite,
    'symmetry': symmetry_suite,
    'symmetry-breaking': symmetry_breaking_suite,
    'kappa-bounds': kappa_bounds_suite,
    'barrier': barrier_suite,
    'mc-consistency': mc_consistency_suite,
    'figures': figures_suite,
}


def resolve(names: typing.Sequence[str]) -> typing.List[str]:
    if 'all' in names:
        return list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f'unknown suite(s): {", ".join(unknown)}; choose from all, {", ".join(SUITES)}')
    return list(names)


def run_suite(name: str, fast: bool = False) -> SuiteResult:
    '''
    collects the checks a suite yields; an error ends the suite with a failed check appended to
    those already completed
    '''
    logger.info(f'running suite {name} ({fast=})')
    checks = []
    try:
        for check in SUITES[name](fast=fast):
            checks.append(check)
    except (ValueError, RuntimeError) as e:
        logger.error(f'suite {name} aborted after {len(checks)} checks: {e}')
        checks.append(Check(name='suite completed', passed=False, detail=f'{type(e).__name__}: {e}'))

    result = SuiteResult(suite=name, checks=checks)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.warning(f'suite {name} failed: {", ".join(failed)}')
    else:
        logger.info(f'suite {name} passed ({len(checks)} checks)')
    return result


def run_suites(names: typing.Sequence[str], fast: bool = False) -> typing.List[SuiteResult]:
    return [run_suite(name, fast=fast) for name in resolve(names)]


def report(results: typing.Sequence[SuiteResult]) -> dict:
    return {
        'passed': all(r.passed for r in results),
        'suites': [r.as_dict() for r in results],
    }


def exit_code(results: typing.Sequence[SuiteResult]) -> model.ExitCode:
    if all(r.passed for r in results):
        return model.ExitCode.SUCCESS
    return model.ExitCode.VERIFICATION_FAILED
