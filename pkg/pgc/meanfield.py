# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
constructs solutions u = U of  laplacian(u) + K e^{2u} = 0  with integral curvature
kappa = beta * pi from minimizers of the free energy

    F(rho) = beta E(rho) - S(rho),
    E(rho) = 1/2 int int ln|x - y| rho(x) rho(y),
    S(rho) = -int rho ln(rho / mu1),   mu1 = Upsilon e^{2H} / M,

whose minimizers solve  rho = Upsilon exp(-beta Phi[rho] + 2H) / Z,  Phi[rho] = int ln|x - y| rho(y).
'''

import abc
import concurrent.futures
import dataclasses
import enum
import logging
import math
import typing

import numpy as np
import scipy.interpolate
import scipy.signal
import scipy.special

import pgc.closedforms as closedforms
import pgc.diagnostics as diagnostics
import pgc.fields as fields
import pgc.model as model

logger = logging.getLogger(__name__)

BETA_MAX = 4.0
BETA_MARGIN = 1e-6
DAMPING_FLOOR = 1 / 64
NORMALIZATION_TOLERANCE = 1e-8
# mean of ln|x| over the unit square centered at the origin
UNIT_CELL_LOG_MEAN = math.pi / 4 - math.log(2) / 2 - 1.5


@dataclasses.dataclass(frozen=True)
class AprioriMeasure:
    '''
    tau(dx) = Upsilon(x) e^{2H(x)} dx restricted to the disk of radius domain_radius (whole
    plane if None); mass is the total mass M of tau, mu1 = tau / M
    '''
    curvature: closedforms.CurvatureSpec
    harmonic: closedforms.HarmonicSpec
    mass: float
    domain_radius: float = None

    @property
    def radial(self) -> bool:
        return self.curvature.radial and self.harmonic.is_constant

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        values = self.curvature.log_magnitude(x) + 2 * self.harmonic(x)
        if self.domain_radius is not None:
            outside = np.hypot(x[..., 0], x[..., 1]) > self.domain_radius
            values = np.where(outside, -np.inf, values)
        return values

    def density(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.log_density(x))

    def mu_one(self, x: np.ndarray) -> np.ndarray:
        return self.density(x) / self.mass


def build_apriori(
    curvature: closedforms.CurvatureSpec,
    harmonic: closedforms.HarmonicSpec = closedforms.HarmonicSpec(),
    domain_radius: float = None,
    n_angles: int = 256,
    tolerance: float = 1e-6,
) -> AprioriMeasure:
    if curvature.is_zero:
        raise model.InadmissibleError('Upsilon vanishes identically: flat case, nothing to solve')

    def density(x):
        return np.exp(curvature.log_magnitude(x) + 2 * harmonic(x))

    radius = domain_radius
    if curvature.support_radius is not None:
        radius = curvature.support_radius if radius is None else min(radius, curvature.support_radius)

    def mass_at(level):
        if radius is not None:
            return fields.polar_integral(density, r_max=radius, n_angles=n_angles, level=level)
        inner = fields.polar_integral(density, r_max=1.0, n_angles=n_angles, level=level)
        shells = fields.shell_log_integrals(
            lambda x: curvature.log_magnitude(x) + 2 * harmonic(x),
            n_angles=n_angles * 2 ** level,
            n_nodes=fields.GAUSS_NODES * 2 ** level,
        )
        if not fields.tail_verdict(shells).finite:
            raise model.InadmissibleError(
                f'divergent mass: Upsilon e^(2H) is not integrable for {curvature.name}'
            )
        with np.errstate(over='ignore'):
            return inner + float(np.exp(scipy.special.logsumexp(shells)))

    coarse = mass_at(0)
    mass = mass_at(1)
    if not (math.isfinite(mass) and mass > 0):
        raise model.InadmissibleError(f'mass of tau must be positive and finite, got {mass}')
    if abs(mass - coarse) > tolerance * mass:
        logger.warning(f'mass quadrature levels disagree: {coarse=} {mass=}')
        raise model.QuadratureError(f'mass quadrature did not converge ({coarse} vs {mass})')

    logger.debug(f'a-priori mass of {curvature.name}: {mass}')
    return AprioriMeasure(
        curvature=curvature,
        harmonic=harmonic,
        mass=mass,
        domain_radius=domain_radius,
    )


class GeometryBase:
    '''
    a discretization of the plane: nodes with quadrature weights, and the logarithmic
    potential of a density given at the nodes
    '''
    @property
    @abc.abstractmethod
    def radial(self) -> bool:
        pass

    @abc.abstractmethod
    def points(self) -> np.ndarray:
        '''
        nodes as an (n, 2) array
        '''
        pass

    @abc.abstractmethod
    def weights(self) -> np.ndarray:
        pass

    @abc.abstractmethod
    def potential(self, rho: np.ndarray) -> np.ndarray:
        '''
        Phi = int ln|x - y| rho(y) dy at the nodes
        '''
        pass

    @abc.abstractmethod
    def potential_evaluator(self, rho: np.ndarray) -> fields.Evaluator:
        '''
        Phi at arbitrary points
        '''
        pass

    @abc.abstractmethod
    def field(self, values: np.ndarray) -> typing.Union[fields.RadialProfile, fields.PlanarField]:
        pass

    @abc.abstractmethod
    def outer_share(self, rho: np.ndarray) -> float:
        '''
        mass of rho near the outer edge of the discretized domain
        '''
        pass

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights(), values))

    def normalize(self, rho: np.ndarray) -> np.ndarray:
        mass = self.integrate(rho)
        if not mass > 0:
            raise ValueError(f'density has non-positive mass {mass}')
        return rho / mass

    def check_normalized(self, rho: np.ndarray):
        mass = self.integrate(rho)
        if abs(mass - 1) > NORMALIZATION_TOLERANCE:
            raise ValueError(f'density is not normalized: mass {mass}')


class RadialGeometry(GeometryBase):
    '''
    log-spaced radial grid; the angular average of ln|x - s e^{i theta}| is ln max(|x|, s)
    '''
    def __init__(
        self,
        r_min: float = 1e-3,
        r_max: float = 1e4,
        n_points: int = 2000,
    ):
        self.grid = fields.RadialProfile.log_spaced(r_min=r_min, r_max=r_max, n_points=n_points)

    @property
    def radial(self) -> bool:
        return True

    @property
    def radii(self) -> np.ndarray:
        return self.grid.radii

    def points(self) -> np.ndarray:
        return np.stack((self.radii, np.zeros_like(self.radii)), axis=-1)

    def weights(self) -> np.ndarray:
        return self.grid.weights

    def potential(self, rho: np.ndarray) -> np.ndarray:
        masses = self.grid.weights * rho
        log_r = self.grid.log_radii
        # Phi(r_i) = ln r_i * sum_{j <= i} m_j + sum_{j > i} m_j ln r_j
        inner = np.cumsum(masses)
        weighted = np.cumsum(masses * log_r)
        return log_r * inner + (weighted[-1] - weighted)

    def potential_evaluator(self, rho: np.ndarray) -> fields.Evaluator:
        phi = self.potential(rho)
        log_r = self.grid.log_radii
        spline = scipy.interpolate.CubicSpline(log_r, phi)
        total = self.integrate(rho)

        def evaluate(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            r = np.hypot(x[..., 0], x[..., 1])
            with np.errstate(divide='ignore'):
                t = np.log(r)
            inside = np.clip(t, log_r[0], log_r[-1])
            # constant inside r_min, exterior potential of the total mass beyond r_max
            return np.where(t > log_r[-1], total * t, spline(inside))

        return evaluate

    def field(self, values: np.ndarray) -> fields.RadialProfile:
        return self.grid.with_values(values)

    def outer_share(self, rho: np.ndarray) -> float:
        outer = self.radii > self.radii[-1] / 10
        return float(np.dot(self.grid.weights[outer], rho[outer]))


class PlanarGeometry(GeometryBase):
    '''
    cell-centered square grid; ln|x - y| is summed over cells with the self-cell term replaced
    by the mean of ln over the cell
    '''
    def __init__(
        self,
        halfwidth: float,
        n_cells: int,
    ):
        self.template = fields.PlanarField(
            halfwidth=halfwidth,
            values=np.zeros((n_cells, n_cells)),
        )
        h = self.template.h
        offsets = np.arange(-(n_cells - 1), n_cells) * h
        d1, d2 = np.meshgrid(offsets, offsets, indexing='ij')
        with np.errstate(divide='ignore'):
            kernel = 0.5 * np.log(d1 ** 2 + d2 ** 2)
        kernel[n_cells - 1, n_cells - 1] = math.log(h) + UNIT_CELL_LOG_MEAN
        self.kernel = kernel

    @property
    def radial(self) -> bool:
        return False

    @property
    def n_cells(self) -> int:
        return self.template.n_cells

    @property
    def h(self) -> float:
        return self.template.h

    def points(self) -> np.ndarray:
        return self.template.points().reshape(-1, 2)

    def weights(self) -> np.ndarray:
        return np.full(self.n_cells ** 2, self.h ** 2)

    def potential(self, rho: np.ndarray) -> np.ndarray:
        n = self.n_cells
        masses = rho.reshape(n, n) * self.h ** 2
        full = scipy.signal.fftconvolve(masses, self.kernel, mode='full')
        return full[n - 1:2 * n - 1, n - 1:2 * n - 1].ravel()

    def potential_evaluator(self, rho: np.ndarray) -> fields.Evaluator:
        centers = self.points()
        masses = rho * self.h ** 2
        support = masses != 0
        centers = centers[support]
        masses = masses[support]

        def evaluate(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            flat = x.reshape(-1, 2)
            out = np.empty(flat.shape[0])
            for start in range(0, flat.shape[0], 256):
                chunk = flat[start:start + 256]
                d2 = (
                    (chunk[:, None, 0] - centers[None, :, 0]) ** 2
                    + (chunk[:, None, 1] - centers[None, :, 1]) ** 2
                )
                with np.errstate(divide='ignore'):
                    out[start:start + 256] = 0.5 * np.log(d2) @ masses
            return out.reshape(x.shape[:-1])

        return evaluate

    def field(self, values: np.ndarray) -> fields.PlanarField:
        return self.template.with_values(values.reshape(self.n_cells, self.n_cells))

    def outer_share(self, rho: np.ndarray) -> float:
        n = self.n_cells
        ring = max(1, n // 20)
        grid = rho.reshape(n, n) * self.h ** 2
        inner = grid[ring:n - ring, ring:n - ring].sum()
        return float(grid.sum() - inner)


class InitialDensity(enum.Enum):
    APRIORI = 'apriori'
    UNIFORM_DISK = 'uniform-disk'
    USER = 'user-supplied'


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    beta: float
    geometry: GeometryBase
    damping: float = 1.0
    tolerance: float = 1e-10
    max_iterations: int = 1000
    initial: InitialDensity = InitialDensity.APRIORI
    initial_density: np.ndarray = None
    disk_radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'initial', InitialDensity(self.initial))
        if not 0 < self.damping <= 1:
            raise ValueError(f'damping must lie in (0, 1], got {self.damping=}')
        if not self.tolerance > 0:
            raise ValueError(f'tolerance must be positive, got {self.tolerance=}')
        if self.max_iterations < 1:
            raise ValueError(f'max_iterations must be positive, got {self.max_iterations=}')
        if self.initial is InitialDensity.USER and self.initial_density is None:
            raise ValueError('user-supplied initial density missing')


@dataclasses.dataclass(frozen=True)
class FreeEnergy:
    E: float
    S1: float
    F: float


@dataclasses.dataclass(frozen=True)
class TraceEntry:
    iteration: int
    residual: float
    F: float
    damping: float


@dataclasses.dataclass(frozen=True, eq=False)
class MinimizerResult:
    beta: float
    kappa: float
    rho: np.ndarray
    geometry: GeometryBase
    free_energy: FreeEnergy
    initial_free_energy: FreeEnergy
    trace: typing.List[TraceEntry]
    converged: bool
    residual: float
    tail_share: float
    U: np.ndarray = None
    U0: float = None
    u_evaluator: fields.Evaluator = None
    pde_residual: float = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def density(self) -> typing.Union[fields.RadialProfile, fields.PlanarField]:
        return self.geometry.field(self.rho)

    @property
    def U_field(self) -> typing.Union[fields.RadialProfile, fields.PlanarField]:
        return self.geometry.field(self.U)

    def density_evaluator(self) -> fields.Evaluator:
        if self.geometry.radial:
            return self.density.evaluator()
        return self.density.interpolator()

    def summary(self) -> dict:
        return {
            'beta': self.beta,
            'kappa': self.kappa,
            'E': self.free_energy.E,
            'S1': self.free_energy.S1,
            'F': self.free_energy.F,
            'U0': self.U0,
            'iterations': self.iterations,
            'converged': self.converged,
            'residual': self.residual,
            'tail_share': self.tail_share,
            'pde_residual': self.pde_residual,
        }


def log_potential(
    rho: np.ndarray,
    geometry: GeometryBase,
    x: np.ndarray = None,
) -> np.ndarray:
    '''
    int ln|x - y| rho(y) dy at the geometry's nodes, or at the points x (shape (..., 2))
    '''
    rho = np.asarray(rho, dtype=float)
    geometry.check_normalized(rho)
    if x is None:
        return geometry.potential(rho)
    return geometry.potential_evaluator(rho)(x)


def _log_tau(tau: AprioriMeasure, geometry: GeometryBase) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return tau.log_density(geometry.points())


def _normalized_exp(log_values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    finite = np.isfinite(log_values)
    if not np.any(finite):
        raise ValueError('density vanishes on the whole grid')
    shifted = np.where(finite, np.exp(log_values - np.max(log_values[finite])), 0.0)
    return shifted / np.dot(weights, shifted)


def fixed_point_step(
    rho: np.ndarray,
    beta: float,
    tau: AprioriMeasure,
    geometry: GeometryBase,
    log_tau: np.ndarray = None,
) -> np.ndarray:
    '''
    P(rho) = Upsilon exp(-beta Phi[rho] + 2H), normalized to unit mass on the grid
    '''
    if log_tau is None:
        log_tau = _log_tau(tau, geometry)
    if beta == 0:
        return _normalized_exp(log_tau, geometry.weights())
    phi = log_potential(rho, geometry)
    return _normalized_exp(log_tau - beta * phi, geometry.weights())


def mu_one_on(tau: AprioriMeasure, geometry: GeometryBase) -> np.ndarray:
    '''
    mu1 = tau / M with M the grid mass of tau, so that S(mu1) = 0 on the grid
    '''
    return _normalized_exp(_log_tau(tau, geometry), geometry.weights())


def free_energy(
    rho: np.ndarray,
    beta: float,
    tau: AprioriMeasure,
    geometry: GeometryBase,
    mu1: np.ndarray = None,
) -> FreeEnergy:
    if mu1 is None:
        mu1 = mu_one_on(tau, geometry)
    weights = geometry.weights()

    E = 0.5 * float(np.dot(weights * rho, log_potential(rho, geometry)))

    occupied = rho > 0
    if np.any(occupied & (mu1 <= 0)):
        S1 = -math.inf
    else:
        # 0 ln 0 = 0
        S1 = -float(np.sum(weights[occupied] * rho[occupied] * np.log(rho[occupied] / mu1[occupied])))

    F = beta * E - S1
    return FreeEnergy(E=E, S1=S1, F=F)


def check_beta(beta: float, beta_star: float):
    if not beta_star + BETA_MARGIN < beta < BETA_MAX:
        raise model.InadmissibleError(
            f'{beta=} outside the admissible range ({beta_star}, {BETA_MAX}): '
            'the free energy is unbounded below'
        )


def beta_star_of(tau: AprioriMeasure) -> float:
    if tau.domain_radius is not None or tau.curvature.support_radius is not None:
        # all moments of a compactly supported measure are finite
        return -math.inf
    return diagnostics.kappa_sup_star(tau.curvature, tau.harmonic).beta_star


def initial_density(
    config: SolverConfig,
    tau: AprioriMeasure,
    mu1: np.ndarray,
) -> np.ndarray:
    geometry = config.geometry
    if config.initial is InitialDensity.APRIORI:
        return mu1.copy()
    if config.initial is InitialDensity.UNIFORM_DISK:
        points = geometry.points()
        inside = np.hypot(points[:, 0], points[:, 1]) <= config.disk_radius
        rho = np.where(inside & (mu1 > 0), 1.0, 0.0)
        return geometry.normalize(rho)
    rho = np.asarray(config.initial_density, dtype=float).ravel()
    if rho.shape != mu1.shape or np.any(rho < 0):
        raise ValueError('user-supplied initial density must be non-negative and match the grid')
    return geometry.normalize(np.where(mu1 > 0, rho, 0.0))


def solve_minimizer(
    config: SolverConfig,
    tau: AprioriMeasure,
    beta_star: float = None,
) -> MinimizerResult:
    '''
    damped iteration rho <- (1 - delta) rho + delta P(rho); delta is halved (down to 1/64) when
    a step would increase the free energy. converged once sup|rho - P(rho)| < tolerance.
    '''
    geometry = config.geometry
    beta = config.beta
    if beta_star is None:
        beta_star = beta_star_of(tau)
    check_beta(beta, beta_star)
    if geometry.radial and not tau.radial:
        raise ValueError('radial geometry requires a radial Upsilon and a constant H')

    log_tau = _log_tau(tau, geometry)
    mu1 = _normalized_exp(log_tau, geometry.weights())
    rho = initial_density(config, tau, mu1)
    energy = free_energy(rho, beta, tau, geometry, mu1=mu1)
    initial_energy = energy

    trace = []
    delta = config.damping
    converged = False
    residual = math.inf

    for iteration in range(config.max_iterations):
        proposal = fixed_point_step(rho, beta, tau, geometry, log_tau=log_tau)
        residual = float(np.max(np.abs(rho - proposal)))
        trace.append(TraceEntry(iteration=iteration, residual=residual, F=energy.F, damping=delta))
        logger.debug(f'{iteration=} {residual=:.3e} F={energy.F:.12g} {delta=}')

        if residual < config.tolerance:
            converged = True
            break

        while True:
            candidate = geometry.normalize((1 - delta) * rho + delta * proposal)
            candidate_energy = free_energy(candidate, beta, tau, geometry, mu1=mu1)
            increase = candidate_energy.F - energy.F
            if increase <= 1e-12 * (1 + abs(energy.F)) or delta <= DAMPING_FLOOR:
                break
            delta = max(delta / 2, DAMPING_FLOOR)
            logger.info(f'free energy increased by {increase:.3e}, damping halved to {delta}')

        rho, energy = candidate, candidate_energy

    if converged:
        logger.info(f'converged after {len(trace)} iterations: {beta=} {residual=:.3e}')
    else:
        logger.warning(f'no convergence after {config.max_iterations} iterations: {residual=:.3e}')

    return MinimizerResult(
        beta=beta,
        kappa=beta * math.pi,
        rho=rho,
        geometry=geometry,
        free_energy=energy,
        initial_free_energy=initial_energy,
        trace=trace,
        converged=converged,
        residual=residual,
        tail_share=geometry.outer_share(rho),
    )


def fixed_point_residual(
    result: MinimizerResult,
    tau: AprioriMeasure,
) -> float:
    '''
    independent re-evaluation of sup|rho - P(rho)| for a returned result
    '''
    proposal = fixed_point_step(result.rho, result.beta, tau, result.geometry)
    return float(np.max(np.abs(result.rho - proposal)))


def reconstruct_u(
    result: MinimizerResult,
    curvature: closedforms.CurvatureSpec,
    harmonic: closedforms.HarmonicSpec,
    beta: float = None,
    tau: AprioriMeasure = None,
    verification_halfwidth: float = 3.0,
    verification_h: float = 0.01,
) -> MinimizerResult:
    '''
    U = H - (beta / 2) Phi[rho] + U0 with U0 fixed by int K e^{2U} = kappa = beta pi.
    the PDE residual of U is evaluated with the 5-point stencil on a verification grid.
    '''
    if beta is None:
        beta = result.beta
    geometry = result.geometry
    kappa = beta * math.pi

    if curvature.is_zero:
        if beta != 0:
            raise model.InadmissibleError(f'K vanishes identically but {kappa=} != 0')
        H = harmonic(geometry.points())
        return dataclasses.replace(
            result,
            kappa=0.0,
            U=H,
            U0=0.0,
            u_evaluator=harmonic,
            pde_residual=0.0,
        )
    if beta == 0:
        raise model.InadmissibleError('kappa = 0 requires K to vanish identically')
    if (beta > 0) != (curvature.sign > 0):
        raise model.InadmissibleError(
            f'sign mismatch: {beta=} requires sigma(K) = {1 if beta > 0 else -1}, '
            f'got {curvature.sign}'
        )

    if tau is None:
        tau = AprioriMeasure(curvature=curvature, harmonic=harmonic, mass=1.0)

    phi = log_potential(result.rho, geometry)
    log_tau = _log_tau(tau, geometry)
    finite = np.isfinite(log_tau)
    # ln int Upsilon e^{2(H - beta Phi / 2)}
    log_integral = float(scipy.special.logsumexp(
        log_tau[finite] - beta * phi[finite],
        b=geometry.weights()[finite],
    ))
    U0 = 0.5 * (math.log(abs(kappa)) - log_integral)

    points = geometry.points()
    U = harmonic(points) - beta / 2 * phi + U0
    potential = geometry.potential_evaluator(result.rho)

    def u_evaluator(x):
        return harmonic(x) - beta / 2 * potential(x) + U0

    effective = curvature
    if tau.domain_radius is not None:
        def effective(x):
            inside = np.hypot(x[..., 0], x[..., 1]) <= tau.domain_radius
            return np.where(inside, curvature(x), 0.0)

    if geometry.radial:
        n_cells = fields.n_cells_for(verification_halfwidth, verification_h)
        sampled = fields.PlanarField.sample(
            u_evaluator,
            halfwidth=verification_halfwidth,
            n_cells=n_cells,
        )
    else:
        # off-grid evaluation of the discrete potential is singular at occupied cell centers
        sampled = geometry.field(U)
    pde_residual = fields.pde_residual(sampled, effective).sup_norm()

    logger.info(f'reconstructed U: {U0=:.6g} {kappa=:.6g} {pde_residual=:.3e}')
    return dataclasses.replace(
        result,
        kappa=kappa,
        U=U,
        U0=U0,
        u_evaluator=u_evaluator,
        pde_residual=pde_residual,
    )


def integral_curvature_of(
    result: MinimizerResult,
    curvature: closedforms.CurvatureSpec,
) -> float:
    '''
    int K e^{2U} on the solver grid
    '''
    values = curvature(result.geometry.points()) * np.exp(2 * result.U)
    return result.geometry.integrate(values)


def apriori_pair_moment(
    tau: AprioriMeasure,
    geometry: GeometryBase,
) -> float:
    '''
    <ln|x - y|> under mu1 x mu1, i.e. twice the energy of mu1
    '''
    mu1 = mu_one_on(tau, geometry)
    return float(np.dot(geometry.weights() * mu1, log_potential(mu1, geometry)))


def multi_start(
    config: SolverConfig,
    tau: AprioriMeasure,
    initials: typing.Sequence[SolverConfig] = None,
    max_workers: int = 4,
) -> typing.List[MinimizerResult]:
    '''
    runs the solver from several initializations concurrently; limits are reported, not merged
    '''
    if initials is None:
        initials = [
            dataclasses.replace(config, initial=InitialDensity.APRIORI),
            dataclasses.replace(config, initial=InitialDensity.UNIFORM_DISK),
        ]
    beta_star = beta_star_of(tau)

    def run(cfg):
        return solve_minimizer(cfg, tau, beta_star=beta_star)

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(run, initials))


def distinct_limits(
    results: typing.Sequence[MinimizerResult],
    tolerance: float,
) -> typing.List[int]:
    '''
    indices of results whose densities differ (sup distance > tolerance) from all earlier ones
    '''
    distinct = []
    for index, result in enumerate(results):
        if all(np.max(np.abs(result.rho - results[d].rho)) > tolerance for d in distinct):
            distinct.append(index)
    return distinct
