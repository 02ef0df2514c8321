# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
exact solutions of the prescribed curvature equation  laplacian(u) + K e^{2u} = 0  together with
evaluators for curvature magnitudes and entire harmonic functions.

curvature factories (`*_curvature`) are looked up by name from configuration files, e.g.

    curvature.type = special_curvature
    curvature.kwargs.gamma = 0.6
'''

import dataclasses
import enum
import logging
import math
import typing

import numpy as np

import pgc.fields as fields

logger = logging.getLogger(__name__)


class Family(enum.Enum):
    FLAT = 'flat'
    CHAKIE = 'chakie'
    STUART = 'stuart'
    SPECIAL = 'special'


def _point(value) -> typing.Tuple[float, float]:
    if isinstance(value, str):
        value = value.split(',')
    x1, x2 = (float(c) for c in value)
    return x1, x2


def _split(x: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


@dataclasses.dataclass(frozen=True)
class FamilyInstance:
    family: Family
    n: int = 1
    y: typing.Tuple[float, float] = (1.0, 0.0)
    zeta: float = 0.0
    K0: float = 1.0
    phi: float = 0.0
    gamma: float = 1.0
    u0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'family', Family(self.family))
        object.__setattr__(self, 'y', _point(self.y))

        if self.family is Family.CHAKIE:
            if int(self.n) != self.n or self.n < 1:
                raise ValueError(f'chakie family needs a positive integer n, got {self.n=}')
            object.__setattr__(self, 'n', int(self.n))
        if self.family in (Family.CHAKIE, Family.SPECIAL) and math.hypot(*self.y) == 0:
            raise ValueError(f'{self.family.value} family needs y != 0')
        if self.family is Family.STUART and not self.K0 > 0:
            raise ValueError(f'stuart family needs K0 > 0, got {self.K0=}')
        if self.family is Family.SPECIAL and not 0 < self.gamma <= 1:
            raise ValueError(f'special family needs gamma in (0, 1], got {self.gamma=}')

    def frame(self) -> typing.Tuple[np.ndarray, np.ndarray]:
        '''
        orthogonal pair (v, v') with |v| = |v'| = sqrt(K0); v' is v rotated by +90 degrees
        '''
        s = math.sqrt(self.K0)
        v = s * np.array([math.cos(self.phi), math.sin(self.phi)])
        v_prime = s * np.array([-math.sin(self.phi), math.cos(self.phi)])
        return v, v_prime

    def u(self, x: np.ndarray) -> np.ndarray:
        if self.family is Family.FLAT:
            return np.full(np.shape(x)[:-1], float(self.u0))
        if self.family is Family.CHAKIE:
            return _chakie_u(x, n=self.n, y=self.y, zeta=self.zeta)
        if self.family is Family.STUART:
            v, v_prime = self.frame()
            return _stuart_u(x, v=v, v_prime=v_prime, y=self.y, zeta=self.zeta)
        if self.family is Family.SPECIAL:
            return self.gamma * _chakie_u(x, n=1, y=self.y, zeta=0.0)
        raise NotImplementedError(self.family)

    def curvature(self, x: np.ndarray) -> np.ndarray:
        shape = np.shape(x)[:-1]
        if self.family is Family.FLAT:
            return np.zeros(shape)
        if self.family is Family.CHAKIE:
            x1, x2 = _split(x)
            r2 = x1 ** 2 + x2 ** 2
            return 4 * self.n ** 2 * r2 ** (self.n - 1)
        if self.family is Family.STUART:
            return np.full(shape, float(self.K0))
        if self.family is Family.SPECIAL:
            u_ref = _chakie_u(x, n=1, y=self.y, zeta=0.0)
            return 4 * self.gamma * np.exp(2 * (1 - self.gamma) * u_ref)
        raise NotImplementedError(self.family)

    def conformal_factor(self, x: np.ndarray) -> np.ndarray:
        return np.exp(2 * self.u(x))


def _chakie_u(
    x: np.ndarray,
    n: int,
    y: typing.Tuple[float, float],
    zeta: float,
) -> np.ndarray:
    x1, x2 = _split(x)
    w = ((x1 + 1j * x2) / complex(*y)) ** n
    denominator = 1 - 2 * math.tanh(zeta) * w.real + (w.real ** 2 + w.imag ** 2)
    return -np.log(denominator) - math.log(math.hypot(*y) ** n * math.cosh(zeta))


def _stuart_u(
    x: np.ndarray,
    v: np.ndarray,
    v_prime: np.ndarray,
    y: typing.Tuple[float, float],
    zeta: float,
) -> np.ndarray:
    x1, x2 = _split(x)
    d1 = x1 - y[0]
    d2 = x2 - y[1]
    a = np.abs(v[0] * d1 + v[1] * d2)
    b = v_prime[0] * d1 + v_prime[1] * d2

    # ln(cosh z cosh a - sinh z sin b) without overflowing cosh a
    decay = np.exp(-a)
    inner = math.cosh(zeta) * (1 + decay ** 2) - 2 * math.sinh(zeta) * np.sin(b) * decay
    return -(a - math.log(2) + np.log(inner))


def eval_family(
    inst: FamilyInstance,
    x: np.ndarray,
) -> typing.Tuple[np.ndarray, np.ndarray]:
    return inst.u(x), inst.curvature(x)


def conformal_maxima(inst: FamilyInstance) -> typing.Tuple[float, typing.List[np.ndarray]]:
    '''
    analytic maximum of e^{2u} and the points where it is attained (one per period for stuart,
    none for families without an isolated maximum)
    '''
    if inst.family is Family.CHAKIE:
        y_norm = math.hypot(*inst.y)
        value = math.cosh(inst.zeta) ** 2 / y_norm ** (2 * inst.n)
        if inst.zeta == 0:
            return value, [np.zeros(2)]
        radius = y_norm * abs(math.tanh(inst.zeta)) ** (1 / inst.n)
        theta0 = math.atan2(inst.y[1], inst.y[0])
        if inst.zeta < 0:
            theta0 += math.pi / inst.n
        angles = theta0 + 2 * math.pi * np.arange(inst.n) / inst.n
        return value, [radius * np.array([math.cos(a), math.sin(a)]) for a in angles]

    if inst.family is Family.STUART:
        _, v_prime = inst.frame()
        shift = math.copysign(math.pi / 2, inst.zeta) if inst.zeta else 0.0
        location = np.asarray(inst.y) + v_prime * shift / inst.K0
        return math.exp(2 * abs(inst.zeta)), [location]

    if inst.family is Family.SPECIAL:
        return 1 / math.hypot(*inst.y) ** (2 * inst.gamma), [np.zeros(2)]

    return math.exp(2 * inst.u0), []


def symmetry_center(inst: FamilyInstance) -> typing.Optional[np.ndarray]:
    '''
    the point x* = tanh(zeta) y about which a chakie n=1 solution is radial
    '''
    if inst.family is Family.CHAKIE and (inst.n == 1 or inst.zeta == 0):
        return math.tanh(inst.zeta) * np.asarray(inst.y)
    if inst.family is Family.SPECIAL:
        return np.zeros(2)
    return None


@dataclasses.dataclass(frozen=True)
class HarmonicSpec:
    '''
    H(x) = a_0 + sum_m (a_m Re(z^m) + b_m Im(z^m)),  z = x_1 + i x_2  (b_0 is ignored)
    '''
    a: typing.Tuple[float, ...] = (0.0,)
    b: typing.Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'a', tuple(float(c) for c in self.a) or (0.0,))
        object.__setattr__(self, 'b', tuple(float(c) for c in self.b))

    @property
    def degree(self) -> int:
        return max(len(self.a), len(self.b)) - 1

    @property
    def is_constant(self) -> bool:
        return not any(self.a[1:]) and not any(self.b[1:])

    @property
    def constant(self) -> float:
        return self.a[0]

    def shifted(self, c: float) -> 'HarmonicSpec':
        return dataclasses.replace(self, a=(self.a[0] + c,) + self.a[1:])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = _split(x)
        z = x1 + 1j * x2
        total = np.full(x1.shape, self.a[0])
        power = np.ones_like(z)
        for m in range(1, self.degree + 1):
            power = power * z
            a_m = self.a[m] if m < len(self.a) else 0.0
            b_m = self.b[m] if m < len(self.b) else 0.0
            if a_m:
                total = total + a_m * power.real
            if b_m:
                total = total + b_m * power.imag
        return total


def eval_harmonic(
    spec: HarmonicSpec,
    x: np.ndarray,
) -> np.ndarray:
    return spec(x)


class Tail(enum.Enum):
    POWER = 'power'  # |K| ~ C r^-p
    COMPACT = 'compact'
    RAPID = 'rapid'  # faster than any power
    LOG = 'log'  # |K| ~ ln r


@dataclasses.dataclass(frozen=True)
class CurvatureSpec:
    '''
    K = sign * magnitude, magnitude >= 0. the declared tail (when present) is used in place of
    numerical tail detection by diagnostics.kappa_sup_star.
    '''
    sign: int
    magnitude: fields.Evaluator
    name: str = 'custom'
    log_magnitude_fn: fields.Evaluator = None
    tail: Tail = None
    tail_exponent: float = None
    radial: bool = False
    support_radius: float = None
    family: FamilyInstance = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f'sign must be -1, 0 or +1, got {self.sign=}')
        if self.tail is not None:
            object.__setattr__(self, 'tail', Tail(self.tail))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.sign == 0:
            return np.zeros(np.shape(x)[:-1])
        return self.sign * self.magnitude(x)

    def log_magnitude(self, x: np.ndarray) -> np.ndarray:
        if self.log_magnitude_fn is not None:
            return self.log_magnitude_fn(x)
        with np.errstate(divide='ignore'):
            return np.log(self.magnitude(x))

    def along_ray(self, radii: np.ndarray) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        return self.magnitude(np.stack((radii, np.zeros_like(radii)), axis=-1))


def _radius(x: np.ndarray) -> np.ndarray:
    x1, x2 = _split(x)
    return np.hypot(x1, x2)


def _sign_of(value: float, sign) -> int:
    if sign is not None:
        return int(sign)
    return int(np.sign(value))


def zero_curvature() -> CurvatureSpec:
    return CurvatureSpec(
        sign=0,
        magnitude=lambda x: np.zeros(np.shape(x)[:-1]),
        name='zero',
        tail=Tail.COMPACT,
        radial=True,
        support_radius=0.0,
    )


def constant_curvature(value: float = 1.0, sign: int = None) -> CurvatureSpec:
    magnitude = abs(float(value))
    return CurvatureSpec(
        sign=_sign_of(value, sign),
        magnitude=lambda x: np.full(np.shape(x)[:-1], magnitude),
        name=f'constant({value})',
        tail=Tail.POWER,
        tail_exponent=0.0,
        radial=True,
    )


def chakie_curvature(n: int = 1) -> CurvatureSpec:
    inst = FamilyInstance(family=Family.CHAKIE, n=n)
    return CurvatureSpec(
        sign=1,
        magnitude=inst.curvature,
        name=f'chakie(n={n})',
        tail=Tail.POWER,
        tail_exponent=-2.0 * (n - 1),
        radial=True,
        family=inst,
    )


def special_curvature(gamma: float, y=(1.0, 0.0), sign: int = 1) -> CurvatureSpec:
    inst = FamilyInstance(family=Family.SPECIAL, gamma=gamma, y=y)

    def log_magnitude(x):
        return math.log(4 * inst.gamma) + 2 * (1 - inst.gamma) * _chakie_u(x, n=1, y=inst.y, zeta=0)

    return CurvatureSpec(
        sign=int(sign),
        magnitude=inst.curvature,
        name=f'special(gamma={gamma})',
        log_magnitude_fn=log_magnitude,
        tail=Tail.POWER,
        tail_exponent=4.0 * (1 - inst.gamma),
        radial=True,
        family=inst,
    )


def disk_curvature(
    radius: float = 1.0,
    smooth: float = 0.0,
    value: float = 1.0,
    sign: int = 1,
) -> CurvatureSpec:
    '''
    value on the disk of the given radius, zero outside; smooth > 0 replaces the jump by a
    cosine ramp on [radius - smooth, radius]
    '''
    if not radius > 0 or smooth < 0 or smooth >= radius:
        raise ValueError(f'need radius > smooth >= 0, got {radius=} {smooth=}')
    value = abs(float(value))

    def magnitude(x):
        r = _radius(x)
        if not smooth:
            return np.where(r <= radius, value, 0.0)
        s = np.clip((r - (radius - smooth)) / smooth, 0.0, 1.0)
        return value * 0.5 * (1 + np.cos(math.pi * s)) * (r <= radius)

    return CurvatureSpec(
        sign=int(sign),
        magnitude=magnitude,
        name=f'disk(radius={radius}, smooth={smooth})',
        tail=Tail.COMPACT,
        radial=True,
        support_radius=float(radius),
    )


def exponential_curvature(scale: float = 1.0, value: float = 1.0, sign: int = -1) -> CurvatureSpec:
    value = abs(float(value))
    return CurvatureSpec(
        sign=int(sign),
        magnitude=lambda x: value * np.exp(-_radius(x) / scale),
        name=f'exponential(scale={scale})',
        log_magnitude_fn=lambda x: math.log(value) - _radius(x) / scale,
        tail=Tail.RAPID,
        radial=True,
    )


def gaussian_curvature(width: float = 1.0, value: float = 1.0, sign: int = 1) -> CurvatureSpec:
    value = abs(float(value))
    return CurvatureSpec(
        sign=int(sign),
        magnitude=lambda x: value * np.exp(-(_radius(x) / width) ** 2),
        name=f'gaussian(width={width})',
        log_magnitude_fn=lambda x: math.log(value) - (_radius(x) / width) ** 2,
        tail=Tail.RAPID,
        radial=True,
    )


def power_curvature(m: float, value: float = 1.0, sign: int = 1) -> CurvatureSpec:
    '''
    value * (1 + |x|^2)^(-m/2), decaying like |x|^-m
    '''
    value = abs(float(value))
    return CurvatureSpec(
        sign=int(sign),
        magnitude=lambda x: value * (1 + _radius(x) ** 2) ** (-m / 2),
        name=f'power(m={m})',
        log_magnitude_fn=lambda x: math.log(value) - m / 2 * np.log1p(_radius(x) ** 2),
        tail=Tail.POWER,
        tail_exponent=float(m),
        radial=True,
    )


def log_curvature(sign: int = 1) -> CurvatureSpec:
    return CurvatureSpec(
        sign=int(sign),
        magnitude=lambda x: np.log(math.e + _radius(x)),
        name='log',
        tail=Tail.LOG,
        radial=True,
    )


def family_curvature(**kwargs) -> CurvatureSpec:
    inst = FamilyInstance(**kwargs)
    # every family in this module has a radial curvature
    return CurvatureSpec(
        sign=0 if inst.family is Family.FLAT else 1,
        magnitude=inst.curvature,
        name=f'family({inst.family.value})',
        radial=True,
        family=inst,
    )


def is_radially_decreasing(
    curvature: CurvatureSpec,
    radii: np.ndarray,
    n_angles: int = 16,
    tolerance: float = 1e-12,
) -> bool:
    '''
    numerical check that K(x) <= K(y) whenever |x| >= |y| on the sampled circles
    '''
    values = curvature(fields.polar_points(radii, n_angles))
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.any(np.ptp(values, axis=1) > tolerance * scale):
        return False
    profile = values.mean(axis=1)
    return bool(np.all(np.diff(profile) <= tolerance * scale))
