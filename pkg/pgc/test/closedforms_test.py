# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import pgc.closedforms as closedforms
import pgc.fields as fields


@pytest.fixture
def family():
    def _family(name='chakie', **kwargs):
        return closedforms.FamilyInstance(family=name, **kwargs)
    return _family


def test_chakie_radial_without_zeta(family):
    examinee = family(n=2)

    values = examinee.u(fields.polar_points([0.3, 1.0, 2.5], 64))

    assert np.max(np.ptp(values, axis=1)) < 1e-12


def test_chakie_radial_about_symmetry_center(family):
    examinee = family(n=1, zeta=1.0, y=(1.0, 0.0))
    center = closedforms.symmetry_center(examinee)

    values = examinee.u(fields.polar_points([0.2, 0.7, 1.5], 64, center=center))

    assert center == pytest.approx([math.tanh(1.0), 0.0])
    assert np.max(np.ptp(values, axis=1)) < 1e-12


def test_chakie_periodic_about_origin(family):
    examinee = family(n=2, zeta=1.0)
    x = fields.polar_points([0.5, 1.3], 16)
    rotated = -x

    assert examinee.u(rotated) == pytest.approx(examinee.u(x), abs=1e-12)


def test_chakie_maxima(family):
    examinee = family(n=2, zeta=1.0, y='1,0')

    value, locations = closedforms.conformal_maxima(examinee)

    assert value == pytest.approx(math.cosh(1.0) ** 2)
    assert len(locations) == 2
    for location in locations:
        assert np.hypot(*location) == pytest.approx(math.sqrt(math.tanh(1.0)))
        assert examinee.conformal_factor(location) == pytest.approx(value, rel=1e-12)


def test_stuart_periodic_along_v_prime(family):
    examinee = family('stuart', K0=4.0, zeta=1.0, y=(0.0, -1.0), phi=0.3)
    _, v_prime = examinee.frame()
    shift = 2 * math.pi / math.sqrt(examinee.K0) * v_prime / np.linalg.norm(v_prime)
    x = fields.polar_points([0.4, 2.0], 12)

    assert examinee.u(x + shift) == pytest.approx(examinee.u(x), abs=1e-12)


def test_stuart_maximum(family):
    examinee = family('stuart', K0=1.0, zeta=1.0, y=(0.0, -1.0))

    value, (location,) = closedforms.conformal_maxima(examinee)

    assert value == pytest.approx(math.exp(2.0))
    assert examinee.conformal_factor(location) == pytest.approx(value, rel=1e-12)


def test_special_family_scales_round_sphere(family):
    examinee = family('special', gamma=0.6)
    sphere = family(n=1)
    x = fields.polar_points([0.0, 0.5, 3.0], 8)

    assert examinee.u(x) == pytest.approx(0.6 * sphere.u(x))
    # K_gamma e^{2u} = 4 gamma (1 + r^2)^-2
    r2 = np.sum(x ** 2, axis=-1)
    expected = 4 * 0.6 / (1 + r2) ** 2
    assert examinee.curvature(x) * examinee.conformal_factor(x) == pytest.approx(expected)


def test_family_parameter_validation(family):
    with pytest.raises(ValueError):
        family(n=0)
    with pytest.raises(ValueError):
        family('stuart', K0=0.0)
    with pytest.raises(ValueError):
        family('special', gamma=1.5)
    with pytest.raises(ValueError):
        family('unknown')


def test_harmonic_spec():
    x = np.array([[2.0, 3.0], [1.0, 1.0]])

    assert closedforms.HarmonicSpec(a=(1.5,))(x) == pytest.approx([1.5, 1.5])
    assert closedforms.HarmonicSpec(a=(0.0, 1.0))(x)[0] == pytest.approx(2.0)
    assert closedforms.HarmonicSpec(a=(0.0, 0.0, 1.0))(x)[1] == pytest.approx(0.0)
    assert closedforms.HarmonicSpec(b=(0.0, 0.0, 1.0))(x)[1] == pytest.approx(2.0)

    examinee = closedforms.HarmonicSpec(a=(1.0, 0.0), b=(0.0,))
    assert examinee.is_constant
    assert examinee.shifted(2.0).constant == 3.0
    assert not closedforms.HarmonicSpec(a=(0.0, 1.0)).is_constant


def test_curvature_factories():
    special = closedforms.special_curvature(gamma=0.6)
    x = fields.polar_points([0.5, 4.0], 8)

    assert special.sign == 1
    assert special.log_magnitude(x) == pytest.approx(np.log(special(x)))
    assert closedforms.zero_curvature().is_zero
    assert closedforms.constant_curvature(-2.0).sign == -1
    assert closedforms.disk_curvature(radius=1.0).along_ray([0.5, 1.5]) == pytest.approx([1.0, 0.0])

    with pytest.raises(ValueError):
        closedforms.disk_curvature(radius=1.0, smooth=1.0)


def test_is_radially_decreasing():
    radii = np.geomspace(0.01, 100.0, 50)

    assert closedforms.is_radially_decreasing(closedforms.exponential_curvature(), radii)
    assert closedforms.is_radially_decreasing(closedforms.special_curvature(gamma=0.5), radii)
    assert not closedforms.is_radially_decreasing(closedforms.chakie_curvature(n=2), radii)
