# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
import scipy.interpolate
import scipy.optimize
import scipy.special

import pgc.closedforms as closedforms
import pgc.fields as fields
import pgc.model as model

logger = logging.getLogger(__name__)

Q_MIN = 1e-3
Q_MAX = 8.0
Q_TOLERANCE = 1e-3


@dataclasses.dataclass(frozen=True)
class KappaLowerBound:
    kappa: float
    q_critical: float
    inconclusive: bool = False


@dataclasses.dataclass(frozen=True)
class SupStar:
    q_star: float
    kappa_star: float
    beta_star: float
    unbounded: bool = False


def _bisect_threshold(
    finite_at: typing.Callable[[float], bool],
    divergent_q: float,
    finite_q: float,
    tolerance: float,
) -> float:
    '''
    finite_at must switch exactly once between divergent_q and finite_q (in either order)
    '''
    while abs(finite_q - divergent_q) > tolerance:
        mid = (finite_q + divergent_q) / 2
        if finite_at(mid):
            finite_q = mid
        else:
            divergent_q = mid
    return (finite_q + divergent_q) / 2


def kappa_lower_bound(
    curvature: closedforms.CurvatureSpec,
    q_min: float = Q_MIN,
    q_max: float = Q_MAX,
    tolerance: float = Q_TOLERANCE,
    n_shells: int = 100,
) -> KappaLowerBound:
    '''
    kappa_*(K) = pi * inf{q > 0 : integral of |K| (1 + |x|)^-q over the plane is finite}
    '''
    if curvature.is_zero or curvature.tail is closedforms.Tail.COMPACT:
        return KappaLowerBound(kappa=0.0, q_critical=0.0)

    inconclusive = False

    def finite_at(q: float) -> bool:
        nonlocal inconclusive

        def log_integrand(x):
            r = np.hypot(x[..., 0], x[..., 1])
            return curvature.log_magnitude(x) - q * np.log1p(r)

        verdict = fields.tail_verdict(fields.shell_log_integrals(log_integrand, n_shells=n_shells))
        if verdict.residual > 0.5:
            inconclusive = True
        return verdict.finite

    if finite_at(q_min):
        return KappaLowerBound(kappa=0.0, q_critical=0.0, inconclusive=inconclusive)
    if not finite_at(q_max):
        logger.warning(f'{curvature.name}: curvature integral diverges for all q <= {q_max}')
        return KappaLowerBound(kappa=math.pi * q_max, q_critical=q_max, inconclusive=True)

    q_critical = _bisect_threshold(
        finite_at=finite_at,
        divergent_q=q_min,
        finite_q=q_max,
        tolerance=tolerance,
    )
    logger.debug(f'{curvature.name}: {q_critical=}')
    return KappaLowerBound(
        kappa=math.pi * q_critical,
        q_critical=q_critical,
        inconclusive=inconclusive,
    )


def _declared_sup_star(curvature: closedforms.CurvatureSpec) -> typing.Optional[float]:
    if curvature.tail in (closedforms.Tail.COMPACT, closedforms.Tail.RAPID):
        return math.inf
    if curvature.tail is closedforms.Tail.POWER and curvature.tail_exponent is not None:
        return curvature.tail_exponent - 2
    if curvature.tail is closedforms.Tail.LOG:
        return -math.inf
    return None


def kappa_sup_star(
    curvature: closedforms.CurvatureSpec,
    harmonic: closedforms.HarmonicSpec,
    q_min: float = Q_MIN,
    q_max: float = Q_MAX,
    tolerance: float = Q_TOLERANCE,
    use_declared_tail: bool = True,
    n_shells: int = 100,
) -> SupStar:
    '''
    q* = sup{q : integral of |K| e^{2H} |x|^q is finite}, kappa* = -2 pi q*, beta* = -2 q*.
    an unbounded q* is reported as q_max with beta* = kappa* = -inf.
    '''
    if curvature.is_zero:
        raise model.InadmissibleError('K vanishes identically, no moment condition to evaluate')

    q_star = None
    if use_declared_tail and harmonic.is_constant:
        q_star = _declared_sup_star(curvature)

    if q_star is None:
        def finite_at(q: float) -> bool:
            def log_integrand(x):
                r = np.hypot(x[..., 0], x[..., 1])
                with np.errstate(divide='ignore'):
                    return curvature.log_magnitude(x) + 2 * harmonic(x) + q * np.log(r)

            shells = fields.shell_log_integrals(log_integrand, n_shells=n_shells)
            return fields.tail_verdict(shells).finite

        if finite_at(q_max):
            q_star = math.inf
        elif not finite_at(q_min):
            q_star = -math.inf
        else:
            q_star = _bisect_threshold(
                finite_at=finite_at,
                divergent_q=q_max,
                finite_q=q_min,
                tolerance=tolerance,
            )

    if q_star <= 0:
        raise model.InadmissibleError(
            f'{curvature.name}: no moment of |K| e^(2H) is finite, construction inadmissible'
        )
    if math.isinf(q_star):
        return SupStar(q_star=q_max, kappa_star=-math.inf, beta_star=-math.inf, unbounded=True)

    return SupStar(q_star=q_star, kappa_star=-2 * math.pi * q_star, beta_star=-2 * q_star)


@dataclasses.dataclass(frozen=True)
class SlopeEstimate:
    kappa: float
    residual: float
    conclusive: bool


def asymptotic_slope(
    u: fields.Evaluator,
    harmonic: closedforms.HarmonicSpec,
    r1: float,
    r2: float,
    n_angles: int = 64,
    n_radii: int = 24,
    threshold: float = 1e-2,
) -> SlopeEstimate:
    '''
    estimates the integral curvature from the logarithmic growth of u - H: the angular average
    of u - H behaves like -(kappa / 2 pi) ln r
    '''
    if r2 < 10 * r1:
        raise ValueError(f'slope window too short: need r2 >= 10 r1, got {r1=} {r2=}')
    if n_radii < 20:
        raise ValueError(f'need at least 20 radii, got {n_radii=}')

    u = fields.as_evaluator(u)
    radii = np.geomspace(r1, r2, n_radii)
    average = fields.angular_average(
        lambda x: u(x) - harmonic(x),
        radii=radii,
        n_angles=n_angles,
    )
    log_r = np.log(radii)
    slope, intercept = np.polyfit(log_r, average.values, 1)
    residual = float(np.sqrt(np.mean((average.values - (slope * log_r + intercept)) ** 2)))

    return SlopeEstimate(
        kappa=float(-2 * math.pi * slope),
        residual=residual,
        conclusive=residual <= threshold,
    )


@dataclasses.dataclass(frozen=True)
class BarrierReport:
    '''
    comparison function g(r) = r A(r) - r ln(r) B(r) with
    A(r) = int_r^inf w(s) s ln(s)^2 ds,  B(r) = int_r^inf w(s) s ln(s) ds.
    alpha, alpha_star, R_alpha and margin are set by barrier_check.
    '''
    g: fields.RadialProfile
    w: np.ndarray
    A: np.ndarray
    B: np.ndarray
    ode_residual: float
    positive: bool
    sublinear: bool
    alpha: float = None
    alpha_star: float = None
    R_alpha: float = None
    margin: float = None

    @property
    def radii(self) -> np.ndarray:
        return self.g.radii

    def g_at(self, r) -> np.ndarray:
        spline = scipy.interpolate.CubicSpline(self.g.log_radii, self.g.values)
        return spline(np.log(r))

    def summary(self) -> dict:
        return {
            'ode_residual': self.ode_residual,
            'positive': self.positive,
            'sublinear': self.sublinear,
            'alpha': self.alpha,
            'alpha_star': self.alpha_star,
            'R_alpha': self.R_alpha,
            'margin': self.margin,
        }


def _tail_moment(coefficient: float, p: float, log_r: float, k: int) -> float:
    '''
    int_R^inf C s^(1-p) ln(s)^k ds for k in {1, 2}, p > 2
    '''
    a = p - 2
    decay = math.exp(-a * log_r)
    if k == 1:
        return coefficient * decay * (log_r / a + 1 / a ** 2)
    return coefficient * decay * (log_r ** 2 / a + 2 * log_r / a ** 2 + 2 / a ** 3)


def comparison_g(
    Kbar_e2ubar: fields.RadialProfile,
    tail_exponent: float = None,
) -> BarrierReport:
    '''
    builds g from w = |K|e^{2u} (angularly averaged) given on a log-spaced profile. tail integrals
    beyond r_max use the declared decay w ~ C r^-tail_exponent when given (none otherwise).
    '''
    profile = Kbar_e2ubar
    t = profile.log_radii
    dt = np.diff(t)
    if not np.allclose(dt, dt.mean(), rtol=1e-6, atol=0):
        raise ValueError('comparison_g needs a log-spaced profile')
    dt = float(dt.mean())
    w = profile.values
    if np.any(w < 0):
        raise ValueError('w = |K|e^(2u) must be non-negative')

    # ds s = e^{2t} dt
    integrand_a = w * np.exp(2 * t) * t ** 2
    integrand_b = w * np.exp(2 * t) * t
    if not (np.all(np.isfinite(integrand_a)) and np.all(np.isfinite(integrand_b))):
        raise model.InadmissibleError('(ln r)^2 moment of |K|e^(2u) is not integrable on the grid')

    tail_a = tail_b = 0.0
    if tail_exponent is not None and w[-1] > 0:
        if tail_exponent <= 2:
            raise model.InadmissibleError(
                f'non-integrable (ln r)^2 moment: declared tail exponent {tail_exponent} <= 2'
            )
        coefficient = w[-1] * profile.radii[-1] ** tail_exponent
        tail_a = _tail_moment(coefficient, tail_exponent, t[-1], k=2)
        tail_b = _tail_moment(coefficient, tail_exponent, t[-1], k=1)

    def integral_to_infinity(integrand, tail):
        antiderivative = scipy.interpolate.CubicSpline(t, integrand).antiderivative()
        return antiderivative(t[-1]) - antiderivative(t) + tail

    A = integral_to_infinity(integrand_a, tail_a)
    B = integral_to_infinity(integrand_b, tail_b)
    r = profile.radii
    g = r * A - r * t * B

    # in t = ln r the Euler equation reads G'' - 2G' + G = w e^{3t} t
    source = w * np.exp(3 * t) * t
    residual = np.zeros_like(g)
    g_tt = (-g[4:] + 16 * g[3:-1] - 30 * g[2:-2] + 16 * g[1:-3] - g[:-4]) / (12 * dt ** 2)
    g_t = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * dt)
    residual[2:-2] = g_tt - 2 * g_t + g[2:-2] - source[2:-2]
    scale = float(np.max(np.abs(source[2:-2])))
    ode_residual = float(np.max(np.abs(residual))) / scale if scale > 0 else float(
        np.max(np.abs(residual))
    )

    outside = r > 1
    positive = bool(np.all(g[outside] >= -1e-14 * max(1.0, float(np.max(np.abs(g))))))
    # g/r = A - B ln r is decreasing for r > 1
    ratio = g[outside] / r[outside]
    sublinear = bool(np.all(np.diff(ratio) <= 1e-14 * max(1.0, float(np.max(np.abs(ratio), initial=0.0)))))

    return BarrierReport(
        g=profile.with_values(g),
        w=w,
        A=A,
        B=B,
        ode_residual=ode_residual,
        positive=positive,
        sublinear=sublinear,
    )


def barrier_laplacian(
    report: BarrierReport,
    alpha: float,
) -> np.ndarray:
    '''
    laplacian of f_alpha = ln(|x| - alpha g(|x|)) at the profile radii, in the closed form
    -alpha w ln r / (1 - alpha g / r) - alpha^2 B^2 / (r - alpha g)^2
    (g - r g' = r B removes the derivatives of g)
    '''
    r = report.radii
    g = report.g.values
    return (
        -alpha * report.w * np.log(r) / (1 - alpha * g / r)
        - alpha ** 2 * report.B ** 2 / (r - alpha * g) ** 2
    )


def _locate_R(report: BarrierReport, alpha: float) -> float:
    r = report.radii
    excess = r - alpha * report.g.values - math.e
    below = np.nonzero(excess <= 0)[0]
    if below.size == 0:
        return float(r[0])
    last = below[-1]
    if last == r.size - 1:
        raise model.BracketError(f'r - alpha g(r) = e is not bracketed on the grid for {alpha=}')

    def excess_at(log_r):
        return math.exp(log_r) - alpha * float(report.g_at(math.exp(log_r))) - math.e

    log_root = scipy.optimize.brentq(
        excess_at,
        math.log(r[last]),
        math.log(r[last + 1]),
    )
    return math.exp(log_root)


def deviation_constant(
    u: fields.Evaluator,
    radii: typing.Sequence[float],
    n_angles: int = 64,
) -> float:
    '''
    c(u): largest deviation of u from its angular average over the circles of the given radii
    '''
    u = fields.as_evaluator(u)
    ubar = fields.angular_average(u, radii=radii, n_angles=n_angles)
    return fields.deviation_bound(u, ubar, n_angles=n_angles)


def alpha_star(c_u: float) -> float:
    return 2 * math.exp(2 * c_u)


def barrier_check(
    report: BarrierReport,
    u: fields.Evaluator,
    curvature: fields.Evaluator,
    alpha: float,
    c_u: float = None,
    r_cap: float = 1e3,
    n_angles: int = 64,
) -> BarrierReport:
    '''
    evaluates the margin laplacian(f_alpha) + 2 K e^{2u} f_alpha on the profile radii in
    (max(1, R(alpha)), r_cap]; the barrier inequality holds iff the margin is negative
    '''
    u = fields.as_evaluator(u)
    r = report.radii

    if c_u is None:
        c_u = deviation_constant(u, radii=r[r <= r_cap], n_angles=n_angles)
    threshold = alpha_star(c_u)
    if not alpha > threshold:
        raise model.InadmissibleError(f'barrier needs alpha > alpha* = {threshold}, got {alpha=}')

    R_alpha = _locate_R(report, alpha)
    selected = (r > max(1.0, R_alpha)) & (r <= r_cap)
    if not np.any(selected):
        raise model.BracketError(f'no sample radii in ({max(1.0, R_alpha)}, {r_cap}]')

    radii = r[selected]
    lap_f = barrier_laplacian(report, alpha)[selected]
    f_alpha = np.log(radii - alpha * report.g.values[selected])
    points = fields.polar_points(radii, n_angles)
    source = 2 * curvature(points) * np.exp(2 * u(points)) * f_alpha[:, None]
    margin = float(np.max(lap_f[:, None] + source))

    logger.info(f'barrier check: {alpha=} alpha_star={threshold} {R_alpha=} {margin=}')
    return dataclasses.replace(
        report,
        alpha=alpha,
        alpha_star=threshold,
        R_alpha=R_alpha,
        margin=margin,
    )


@dataclasses.dataclass(frozen=True)
class ReflectionGrid:
    extent: float = 4.0
    n_normal: int = 81
    n_tangential: int = 161


def reflection_min(
    u: fields.Evaluator,
    lam: float,
    direction: float,
    grid: ReflectionGrid = ReflectionGrid(),
) -> float:
    '''
    min of v(x) = u(x^lam) - u(x) over sampled x in the half plane {<x, e> <= lam},
    e = (cos direction, sin direction), x^lam the mirror image of x in the line <x, e> = lam
    '''
    u = fields.as_evaluator(u)
    e = np.array([math.cos(direction), math.sin(direction)])
    e_perp = np.array([-math.sin(direction), math.cos(direction)])

    normal = lam - grid.extent * np.linspace(0.0, 1.0, grid.n_normal)
    tangential = np.linspace(-grid.extent, grid.extent, grid.n_tangential)
    xi1, xi2 = np.meshgrid(normal, tangential, indexing='ij')

    x = xi1[..., None] * e + xi2[..., None] * e_perp
    x_reflected = (2 * lam - xi1)[..., None] * e + xi2[..., None] * e_perp
    return float(np.min(u(x_reflected) - u(x)))


@dataclasses.dataclass(frozen=True)
class ReflectionScan:
    entries: typing.List[typing.Tuple[float, float, float]]
    crossing: typing.Optional[typing.Tuple[float, float]]


def reflection_scan(
    u: fields.Evaluator,
    lambdas: typing.Sequence[float],
    direction: float = 0.0,
    grid: ReflectionGrid = ReflectionGrid(),
    tolerance: float = 1e-10,
) -> ReflectionScan:
    '''
    tabulates lambda -> min v_lambda for increasing lambda and brackets the first lambda where
    the minimum turns negative (the largest lambda with v >= 0 lies in the reported interval)
    '''
    lambdas = sorted(lambdas)
    minima = [reflection_min(u, lam, direction, grid) for lam in lambdas]
    entries = [(lam, direction, m) for lam, m in zip(lambdas, minima)]

    crossing = None
    for (lam_a, _, m_a), (lam_b, _, m_b) in zip(entries[:-1], entries[1:]):
        if m_a >= -tolerance and m_b < -tolerance:
            crossing = (lam_a, lam_b)
            break

    return ReflectionScan(entries=entries, crossing=crossing)


@dataclasses.dataclass(frozen=True)
class SymmetryReport:
    radial_asymmetry: float
    best_center: np.ndarray
    scores: typing.List[typing.Tuple[np.ndarray, float]]
    dynamic_range: float
    verdict: model.Verdict
    reflection_minima: typing.List[typing.Tuple[float, float, float]] = dataclasses.field(
        default_factory=list,
    )

    def summary(self) -> dict:
        return {
            'radial_asymmetry': self.radial_asymmetry,
            'best_center': self.best_center,
            'dynamic_range': self.dynamic_range,
            'verdict': self.verdict,
            'reflection_minima': self.reflection_minima,
        }


RADIAL_TOLERANCE = 1e-8
NON_RADIAL_TOLERANCE = 1e-6


def _asymmetry_score(u, center, radii, n_angles) -> typing.Tuple[float, float]:
    values = u(fields.polar_points(radii, n_angles, center=center))
    average = values.mean(axis=1, keepdims=True)
    return float(np.max(np.abs(values - average))), float(np.ptp(values))


def candidate_centers(
    u: fields.Evaluator,
    family: closedforms.FamilyInstance = None,
    halfwidth: float = 2.0,
    n_cells: int = 40,
) -> typing.List[np.ndarray]:
    '''
    the origin, the location of the maximum of u on a coarse grid and, for closed-form
    families, the analytic symmetry center
    '''
    centers = [np.zeros(2)]
    points = fields.PlanarField.sample(u, halfwidth=halfwidth, n_cells=n_cells).points()
    values = u(points)
    centers.append(points[np.unravel_index(np.argmax(values), values.shape)])
    if family is not None:
        center = closedforms.symmetry_center(family)
        if center is not None:
            centers.append(center)
    return centers


def center_lattice(halfwidth: float, n_cells: int) -> typing.List[np.ndarray]:
    centers = fields.cell_centers(halfwidth=halfwidth, n_cells=n_cells)
    return [np.array([c1, c2]) for c1 in centers for c2 in centers]


def radial_asymmetry(
    u: fields.Evaluator,
    centers: typing.Sequence[np.ndarray],
    radii: typing.Sequence[float],
    n_angles: int = 64,
    max_workers: int = 8,
) -> SymmetryReport:
    '''
    for each center c, max over the sampled circles of |u(c + r e^{i theta}) - angular average|
    '''
    u = fields.as_evaluator(u)
    radii = np.asarray(radii, dtype=float)
    centers = [np.asarray(c, dtype=float) for c in centers]
    if not centers:
        raise ValueError('need at least one candidate center')

    def score(center):
        return _asymmetry_score(u, center, radii, n_angles)

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        results = list(executor.map(score, centers))

    best = int(np.argmin([s for s, _ in results]))
    best_score, _ = results[best]
    dynamic_range = max(r for _, r in results)

    if best_score <= RADIAL_TOLERANCE * dynamic_range:
        verdict = model.Verdict.RADIAL
    elif best_score > NON_RADIAL_TOLERANCE * dynamic_range:
        verdict = model.Verdict.NON_RADIAL
    else:
        verdict = model.Verdict.INCONCLUSIVE

    return SymmetryReport(
        radial_asymmetry=best_score,
        best_center=centers[best],
        scores=[(c, s) for c, (s, _) in zip(centers, results)],
        dynamic_range=dynamic_range,
        verdict=verdict,
    )


def uplus_l1(
    u: fields.Evaluator,
    R: float,
    centers: typing.Sequence[np.ndarray],
    n_angles: int = 64,
) -> float:
    '''
    sup over the sampled centers y of the integral of max(u, 0) over the disk B_R(y)
    '''
    u = fields.as_evaluator(u)
    nodes, weights = scipy.special.roots_legendre(32)
    r = R * (nodes + 1) / 2
    best = 0.0
    for center in centers:
        values = np.maximum(u(fields.polar_points(r, n_angles, center=center)), 0.0)
        integral = 2 * math.pi * R / 2 * float(np.dot(weights, values.mean(axis=1) * r))
        best = max(best, integral)
    return best


def lower_bound_holds(
    integral: float,
    bound: KappaLowerBound,
    slack: float = 0.05,
) -> bool:
    '''
    numeric form of the lower bound integral curvature >= kappa_*(K), with relative slack
    '''
    return integral >= bound.kappa * (1 - slack) - 1e-12


@dataclasses.dataclass(frozen=True)
class Surface:
    name: str
    u: fields.Evaluator
    r_max: float
    tail_exponent: float = 0.0


@dataclasses.dataclass(frozen=True)
class BoundCheck:
    name: str
    integral: float
    kappa_lower: float
    holds: bool


def proposition_check(
    curvature: closedforms.CurvatureSpec,
    surfaces: typing.Sequence[Surface],
    slack: float = 0.05,
) -> typing.List[BoundCheck]:
    '''
    integral curvature of each surface against kappa_*(K)
    '''
    bound = kappa_lower_bound(curvature)
    checks = []
    for surface in surfaces:
        integral = fields.integral_curvature(
            K_eval=curvature,
            u_eval=surface.u,
            r_max=surface.r_max,
            tail_exponent=surface.tail_exponent,
        ).value
        holds = lower_bound_holds(integral, bound, slack=slack)
        logger.info(f'{surface.name}: {integral=:.6g} kappa_*={bound.kappa:.6g} {holds=}')
        checks.append(BoundCheck(
            name=surface.name,
            integral=integral,
            kappa_lower=bound.kappa,
            holds=holds,
        ))
    return checks
