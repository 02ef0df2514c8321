# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
grid representations, discrete calculus and quadrature for conformal factors e^{2u} of metrics
ds^2 = e^{2u} |dx|^2 on the plane.

all evaluators used in this package map an array of points with shape (..., 2) to an array of
values with shape (...).
'''

import dataclasses
import functools
import logging
import math
import typing

import numpy as np
import scipy.interpolate
import scipy.special

import pgc.model as model

logger = logging.getLogger(__name__)

Evaluator = typing.Callable[[np.ndarray], np.ndarray]

GAUSS_NODES = 16
# width (in ln r) of the outer quadrature panels
LOG_PANEL_WIDTH = 0.125


@dataclasses.dataclass(frozen=True, eq=False)
class PlanarField:
    '''
    scalar samples at the cell centers of a uniform square grid over [-L, L]^2.

    values[i, j] is the sample at (centers[i], centers[j]). cells where mask is False carry a
    sentinel value (0) and are excluded from norms (e.g. the boundary ring of a laplacian).
    '''
    halfwidth: float
    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f'planar field must be square, got {values.shape=}')
        if values.shape[0] < 2 or values.shape[0] % 2:
            raise ValueError(f'n_cells must be a positive even integer, got {values.shape[0]}')
        if not self.halfwidth > 0:
            raise ValueError(f'halfwidth must be positive, got {self.halfwidth=}')
        if not np.all(np.isfinite(values)):
            raise ValueError('planar field values must be finite')

        if self.mask is None:
            mask = np.ones(values.shape, dtype=bool)
        else:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != values.shape:
                raise ValueError(f'mask shape {mask.shape} does not match {values.shape}')

        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'mask', mask)

    @staticmethod
    def sample(
        fn: Evaluator,
        halfwidth: float,
        n_cells: int,
    ) -> 'PlanarField':
        centers = cell_centers(halfwidth=halfwidth, n_cells=n_cells)
        x1, x2 = np.meshgrid(centers, centers, indexing='ij')
        values = fn(np.stack((x1, x2), axis=-1))
        return PlanarField(
            halfwidth=halfwidth,
            values=np.array(np.broadcast_to(values, x1.shape), dtype=float),
        )

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.halfwidth / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return cell_centers(halfwidth=self.halfwidth, n_cells=self.n_cells)

    def points(self) -> np.ndarray:
        x1, x2 = np.meshgrid(self.centers, self.centers, indexing='ij')
        return np.stack((x1, x2), axis=-1)

    def with_values(
        self,
        values: np.ndarray,
        mask: np.ndarray = None,
    ) -> 'PlanarField':
        return PlanarField(
            halfwidth=self.halfwidth,
            values=values,
            mask=self.mask if mask is None else mask,
        )

    def interior(self) -> np.ndarray:
        return self.values[self.mask]

    def sup_norm(self) -> float:
        interior = self.interior()
        if interior.size == 0:
            return 0.0
        return float(np.max(np.abs(interior)))

    def interpolator(self) -> Evaluator:
        '''
        bilinear interpolation between cell centers; points outside the hull of the cell centers
        are rejected
        '''
        interpolator = scipy.interpolate.RegularGridInterpolator(
            (self.centers, self.centers),
            self.values,
            method='linear',
            bounds_error=True,
        )
        reach = self.halfwidth - self.h / 2

        def evaluate(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            if np.any(np.abs(x) > reach * (1 + 1e-12)):
                raise ValueError(f'points exceed evaluable domain [-{reach}, {reach}]^2')
            clipped = np.clip(x, -reach, reach)
            return interpolator(clipped.reshape(-1, 2)).reshape(x.shape[:-1])

        return evaluate


@dataclasses.dataclass(frozen=True, eq=False)
class RadialProfile:
    '''
    samples on a radial grid with weights w_i such that sum(w_i f(r_i)) approximates
    the planar integral of a radial f over the disk of radius r_max
    '''
    radii: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)

        if radii.ndim != 1 or radii.size == 0:
            raise ValueError('radii must be a non-empty 1-d array')
        if values.shape != radii.shape or weights.shape != radii.shape:
            raise ValueError(f'shape mismatch: {radii.shape=} {values.shape=} {weights.shape=}')
        if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
            raise ValueError('radii must be positive and strictly increasing')
        if np.any(weights <= 0):
            raise ValueError('weights must be positive')

        object.__setattr__(self, 'radii', radii)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'weights', weights)

    @staticmethod
    def log_spaced(
        r_min: float,
        r_max: float,
        n_points: int,
        values: np.ndarray = None,
    ) -> 'RadialProfile':
        if not 0 < r_min < r_max:
            raise ValueError(f'need 0 < r_min < r_max, got {r_min=} {r_max=}')
        if n_points < 2:
            raise ValueError(f'need at least two radial points, got {n_points=}')
        radii = np.geomspace(r_min, r_max, n_points)
        return RadialProfile(
            radii=radii,
            values=np.zeros_like(radii) if values is None else values,
            weights=radial_weights(radii),
        )

    @property
    def log_radii(self) -> np.ndarray:
        return np.log(self.radii)

    def with_values(self, values: np.ndarray) -> 'RadialProfile':
        return dataclasses.replace(self, values=np.asarray(values, dtype=float))

    def integrate(self, values: np.ndarray = None) -> float:
        if values is None:
            values = self.values
        return float(np.dot(self.weights, values))

    def normalized(self) -> 'RadialProfile':
        mass = self.integrate()
        if not mass > 0:
            raise ValueError(f'cannot normalize profile with mass {mass}')
        return self.with_values(self.values / mass)

    def interpolate(self, r: np.ndarray) -> np.ndarray:
        '''
        piecewise linear in ln r; constant continuation outside [r_min, r_max]
        '''
        r = np.asarray(r, dtype=float)
        with np.errstate(divide='ignore'):
            log_r = np.log(r)
        return np.interp(log_r, self.log_radii, self.values)

    def evaluator(self) -> Evaluator:
        def evaluate(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            return self.interpolate(np.hypot(x[..., 0], x[..., 1]))
        return evaluate


def cell_centers(halfwidth: float, n_cells: int) -> np.ndarray:
    h = 2 * halfwidth / n_cells
    return -halfwidth + h * (np.arange(n_cells) + 0.5)


def n_cells_for(halfwidth: float, h: float) -> int:
    n_cells = int(round(2 * halfwidth / h))
    if n_cells % 2:
        n_cells += 1
    return n_cells


def radial_weights(radii: np.ndarray) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if radii.size == 1:
        return np.array([math.pi * radii[0] ** 2])

    # trapezoid in t = ln r for the measure 2 pi r^2 dt, plus the disk inside r_min
    t = np.log(radii)
    dt = np.empty_like(t)
    dt[0] = (t[1] - t[0]) / 2
    dt[-1] = (t[-1] - t[-2]) / 2
    dt[1:-1] = (t[2:] - t[:-2]) / 2

    weights = 2 * math.pi * radii ** 2 * dt
    weights[0] += math.pi * radii[0] ** 2
    return weights


def as_evaluator(u: typing.Union[PlanarField, RadialProfile, Evaluator]) -> Evaluator:
    if isinstance(u, PlanarField):
        return u.interpolator()
    if isinstance(u, RadialProfile):
        return u.evaluator()
    return u


def polar_points(
    radii: np.ndarray,
    n_angles: int,
    center=(0.0, 0.0),
) -> np.ndarray:
    theta = 2 * math.pi * np.arange(n_angles) / n_angles
    radii = np.asarray(radii, dtype=float)
    x1 = center[0] + radii[:, None] * np.cos(theta)[None, :]
    x2 = center[1] + radii[:, None] * np.sin(theta)[None, :]
    return np.stack((x1, x2), axis=-1)


def laplacian(u: PlanarField) -> PlanarField:
    if u.n_cells < 4:
        raise ValueError(f'grid too small for the 5-point stencil: {u.n_cells=}')

    v = u.values
    lap = np.zeros_like(v)
    lap[1:-1, 1:-1] = (
        v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4 * v[1:-1, 1:-1]
    ) / u.h ** 2

    # a cell is valid if its whole stencil is
    m = u.mask
    mask = np.zeros_like(m)
    mask[1:-1, 1:-1] = (
        m[1:-1, 1:-1] & m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
    )
    lap[~mask] = 0.0

    return u.with_values(lap, mask=mask)


def gauss_curvature_of(u: PlanarField) -> PlanarField:
    lap = laplacian(u)
    curvature = np.where(lap.mask, -np.exp(-2 * u.values) * lap.values, 0.0)
    return lap.with_values(curvature)


def pde_residual(
    u: PlanarField,
    curvature: Evaluator,
) -> PlanarField:
    '''
    laplacian(u) + K e^{2u} on interior cells
    '''
    lap = laplacian(u)
    k = curvature(u.points())
    residual = np.where(lap.mask, lap.values + k * np.exp(2 * u.values), 0.0)
    return lap.with_values(residual)


@functools.lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    nodes, weights = scipy.special.roots_legendre(n)
    return nodes, weights


def _panel_edges(r_max: float, level: int) -> typing.Tuple[np.ndarray, np.ndarray]:
    refine = 2 ** level
    inner_end = min(1.0, r_max)
    inner = np.linspace(0.0, inner_end, 8 * refine + 1)

    if r_max <= 1.0:
        return inner, np.array([])

    n_outer = max(1, math.ceil(math.log(r_max) / LOG_PANEL_WIDTH)) * refine
    outer = np.linspace(0.0, math.log(r_max), n_outer + 1)
    return inner, outer


def polar_integral(
    integrand: Evaluator,
    r_max: float,
    n_angles: int,
    level: int = 0,
    center=(0.0, 0.0),
) -> float:
    '''
    integral of integrand over the disk of radius r_max: Gauss-Legendre panels in r on [0, 1],
    in ln r on [1, r_max], trapezoid in the angle. level k refines panels and angles by 2^k.
    '''
    nodes, gl_weights = _gauss_legendre(GAUSS_NODES)
    n_theta = n_angles * 2 ** level
    inner, outer = _panel_edges(r_max=r_max, level=level)

    total = 0.0
    for a, b in zip(inner[:-1], inner[1:]):
        r = a + (b - a) * (nodes + 1) / 2
        ring = integrand(polar_points(r, n_theta, center=center)).mean(axis=1)
        total += 2 * math.pi * (b - a) / 2 * np.dot(gl_weights, ring * r)

    for a, b in zip(outer[:-1], outer[1:]):
        t = a + (b - a) * (nodes + 1) / 2
        r = np.exp(t)
        ring = integrand(polar_points(r, n_theta, center=center)).mean(axis=1)
        total += 2 * math.pi * (b - a) / 2 * np.dot(gl_weights, ring * r ** 2)

    return float(total)


@dataclasses.dataclass(frozen=True)
class CurvatureIntegral:
    value: float
    truncated: float
    tail: float
    tail_share: float
    refinement_error: float
    r_max: float


def integral_curvature(
    K_eval: typing.Union[PlanarField, Evaluator],
    u_eval: typing.Union[PlanarField, Evaluator],
    r_max: float,
    tail_exponent: float = 0.0,
    tolerance: float = 1e-6,
    n_angles: int = None,
) -> CurvatureIntegral:
    '''
    integral of K e^{2u} over the disk of radius r_max, extended by the analytic tail
    2 pi C r_max^{2-p} / (p - 2) of a declared decay |K| e^{2u} ~ C r^{-p} (p = tail_exponent,
    0 skips the correction).
    '''
    if tail_exponent and tail_exponent <= 2:
        raise model.InadmissibleError(
            f'non-integrable tail declared: K e^(2u) ~ r^-{tail_exponent} with exponent <= 2'
        )
    if not r_max > 0:
        raise ValueError(f'r_max must be positive, got {r_max=}')

    if isinstance(K_eval, PlanarField) or isinstance(u_eval, PlanarField):
        return _planar_integral_curvature(
            K_eval=K_eval,
            u_eval=u_eval,
            r_max=r_max,
            tail_exponent=tail_exponent,
        )

    if n_angles is None:
        n_angles = max(256, 32 * math.ceil(r_max))

    def integrand(x):
        return K_eval(x) * np.exp(2 * u_eval(x))

    coarse = polar_integral(integrand, r_max=r_max, n_angles=n_angles, level=0)
    fine = polar_integral(integrand, r_max=r_max, n_angles=n_angles, level=1)
    refinement_error = abs(fine - coarse)
    if refinement_error > tolerance * max(1.0, abs(fine)):
        logger.warning(f'quadrature levels disagree: {coarse=} {fine=} {r_max=}')
        raise model.QuadratureError(
            f'quadrature did not converge: levels differ by {refinement_error:.3e}'
        )

    tail = 0.0
    if tail_exponent:
        ring = float(np.mean(integrand(polar_points([r_max], 2 * n_angles))))
        coefficient = ring * r_max ** tail_exponent
        tail = 2 * math.pi * coefficient * r_max ** (2 - tail_exponent) / (tail_exponent - 2)

    value = fine + tail
    return CurvatureIntegral(
        value=value,
        truncated=fine,
        tail=tail,
        tail_share=abs(tail) / abs(value) if value else 0.0,
        refinement_error=refinement_error,
        r_max=r_max,
    )


def _planar_integral_curvature(
    K_eval,
    u_eval,
    r_max: float,
    tail_exponent: float,
) -> CurvatureIntegral:
    grid = K_eval if isinstance(K_eval, PlanarField) else u_eval
    points = grid.points()

    def sampled(field):
        if isinstance(field, PlanarField):
            return field.values
        return field(points)

    integrand = sampled(K_eval) * np.exp(2 * sampled(u_eval))
    radius = np.hypot(points[..., 0], points[..., 1])
    inside = (radius <= r_max) & grid.mask
    truncated = float(np.sum(integrand[inside]) * grid.h ** 2)

    tail = 0.0
    if tail_exponent:
        ring = inside & (radius > r_max - 2 * grid.h)
        if np.any(ring):
            coefficient = float(np.mean(integrand[ring])) * r_max ** tail_exponent
            tail = 2 * math.pi * coefficient * r_max ** (2 - tail_exponent) / (tail_exponent - 2)

    value = truncated + tail
    return CurvatureIntegral(
        value=value,
        truncated=truncated,
        tail=tail,
        tail_share=abs(tail) / abs(value) if value else 0.0,
        refinement_error=0.0,
        r_max=r_max,
    )


def angular_average(
    u: typing.Union[PlanarField, Evaluator],
    radii: typing.Sequence[float],
    n_angles: int,
    center=(0.0, 0.0),
) -> RadialProfile:
    if n_angles < 16:
        raise ValueError(f'need at least 16 angles, got {n_angles=}')

    radii = np.asarray(radii, dtype=float)
    values = as_evaluator(u)(polar_points(radii, n_angles, center=center))
    # uniform angles: the periodic trapezoid rule is the plain mean
    average = values.mean(axis=1)

    return RadialProfile(
        radii=radii,
        values=average,
        weights=radial_weights(radii),
    )


def deviation_bound(
    u: typing.Union[PlanarField, Evaluator],
    ubar: RadialProfile,
    n_angles: int,
    center=(0.0, 0.0),
) -> float:
    '''
    max over the sampled circles of |u - ubar(r)|, an empirical stand-in for the constant c(u)
    bounding the deviation of u from its angular average
    '''
    values = as_evaluator(u)(polar_points(ubar.radii, n_angles, center=center))
    return float(np.max(np.abs(values - ubar.values[:, None])))


def shell_log_integrals(
    log_integrand: Evaluator,
    n_shells: int = 100,
    r0: float = 1.0,
    n_angles: int = 64,
    n_nodes: int = GAUSS_NODES,
) -> np.ndarray:
    '''
    ln of the integrals of exp(log_integrand) over the dyadic annuli 2^k r0 <= |x| <= 2^(k+1) r0,
    k = 0 .. n_shells - 1. shells where the integrand vanishes yield -inf.
    '''
    nodes, gl_weights = _gauss_legendre(n_nodes)
    half = math.log(2) / 2
    t = np.log(r0) + math.log(2) * np.arange(n_shells)[:, None] + half * (nodes[None, :] + 1)
    r = np.exp(t)

    points = polar_points(r.ravel(), n_angles).reshape(n_shells, n_nodes, n_angles, 2)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        log_values = log_integrand(points)
        log_values = np.where(np.isnan(log_values), -np.inf, log_values)
        log_measure = (
            2 * t[:, :, None]
            + np.log(half * gl_weights)[None, :, None]
            + math.log(2 * math.pi / n_angles)
        )
        return scipy.special.logsumexp(
            log_values + log_measure,
            axis=(1, 2),
        )


@dataclasses.dataclass(frozen=True)
class TailVerdict:
    finite: bool
    slope: float
    residual: float


def tail_verdict(
    log_shells: np.ndarray,
    window: int = 20,
) -> TailVerdict:
    '''
    the improper integral is taken as finite iff the dyadic shell integrals decay geometrically
    over the last `window` shells (negative slope of ln(shell) against the shell index)
    '''
    tail = np.asarray(log_shells[-window:], dtype=float)

    if np.any(np.isnan(tail)) or np.any(np.isposinf(tail)):
        return TailVerdict(finite=False, slope=math.inf, residual=0.0)
    if np.isneginf(tail[-1]):
        # integrand underflows or vanishes far out
        return TailVerdict(finite=True, slope=-math.inf, residual=0.0)

    finite = np.isfinite(tail)
    if np.count_nonzero(finite) < 3:
        return TailVerdict(finite=True, slope=-math.inf, residual=0.0)

    k = np.arange(tail.size)[finite]
    coefficients, residuals, *_ = np.polyfit(k, tail[finite], 1, full=True)
    slope = float(coefficients[0])
    rms = math.sqrt(float(residuals[0]) / k.size) if residuals.size else 0.0

    return TailVerdict(finite=slope < 0, slope=slope, residual=rms)
