# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
run configuration: a flat mapping of namespaced keys (`solver.beta`, `mc.n_particles`, ..).

configuration files are either flat `key = value` text, values being parsed as yaml scalars or
flow sequences:

    # special family, truncated
    curvature.type = special_curvature
    curvature.kwargs.gamma = 0.6
    grid.domain_radius = 1e3
    solver.kappa = 7.5398

or yaml documents (.yaml / .yml), nested mappings being flattened into dotted keys.
'''

import logging
import math
import os
import typing

import yaml

import pgc.closedforms as closedforms

logger = logging.getLogger(__name__)

NAMESPACES = (
    'family',
    'curvature',
    'harmonic',
    'grid',
    'solver',
    'mc',
    'output',
    'closed_form',
    'verify',
)


def parse_value(raw: str):
    raw = raw.strip()
    if not raw:
        return None
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw


def flatten(raw: dict, prefix: str = '') -> dict:
    flat = {}
    for key, value in raw.items():
        name = f'{prefix}{key}'
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f'{name}.'))
        else:
            flat[name] = value
    return flat


def _check_keys(cfg: dict, source: str):
    for key in cfg:
        namespace = key.split('.', 1)[0]
        if namespace not in NAMESPACES or '.' not in key:
            raise ValueError(f'{source}: unknown configuration key {key!r}')


def parse_flat(text: str, source: str = '<text>') -> dict:
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValueError(f'{source}:{lineno}: expected "key = value", got {line!r}')
        key, value = line.split('=', 1)
        key = key.strip()
        if key in cfg:
            raise ValueError(f'{source}:{lineno}: duplicate key {key!r}')
        cfg[key] = parse_value(value)
    _check_keys(cfg, source)
    return cfg


def load_config(path: str) -> dict:
    with open(path) as f:
        text = f.read()

    if os.path.splitext(path)[1] in ('.yaml', '.yml'):
        raw = yaml.safe_load(text) or {}
        if not isinstance(raw, dict):
            raise ValueError(f'{path}: expected a mapping at top level')
        cfg = flatten(raw)
        _check_keys(cfg, path)
        return cfg

    return parse_flat(text, source=path)


def merge(
    file_cfg: dict,
    flag_cfg: dict,
) -> dict:
    '''
    flags win over file values (overrides are logged); solver.kappa is converted into
    solver.beta = kappa / pi
    '''
    merged = dict(file_cfg)
    for key, value in flag_cfg.items():
        if value is None:
            continue
        if key in merged and merged[key] != value:
            logger.info(f'flag overrides configuration file: {key}={value!r} (file: {merged[key]!r})')
        merged[key] = value

    beta = merged.get('solver.beta')
    kappa = merged.pop('solver.kappa', None)
    if kappa is not None:
        converted = float(kappa) / math.pi
        if beta is not None and not math.isclose(float(beta), converted, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError(f'conflicting solver.beta={beta} and solver.kappa={kappa} (kappa = beta pi)')
        merged['solver.beta'] = converted

    return merged


def get(cfg: dict, key: str, default=None, cast: typing.Callable = None):
    value = cfg.get(key, default)
    if value is None or cast is None:
        return value
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f'invalid value for {key}: {value!r}') from e


def section(cfg: dict, prefix: str) -> dict:
    prefix = f'{prefix}.'
    return {k[len(prefix):]: v for k, v in cfg.items() if k.startswith(prefix)}


def _family_kwargs(cfg: dict) -> dict:
    kwargs = section(cfg, 'family')
    if kwargs.get('name') is None:
        raise ValueError('family.name missing')
    kwargs['family'] = kwargs.pop('name')
    return kwargs


def family_instance(cfg: dict) -> closedforms.FamilyInstance:
    try:
        return closedforms.FamilyInstance(**_family_kwargs(cfg))
    except TypeError as e:
        raise ValueError(f'invalid family parameters: {e}') from e


def curvature_spec(cfg: dict) -> closedforms.CurvatureSpec:
    '''
    curvature.type names a factory in pgc.closedforms, curvature.kwargs.* are passed to it
    '''
    curvature_type = cfg.get('curvature.type')
    if curvature_type is None:
        if 'family.name' in cfg:
            return closedforms.family_curvature(**_family_kwargs(cfg))
        raise ValueError('curvature.type missing')
    if not curvature_type.endswith('_curvature'):
        raise ValueError(f'no such curvature factory: {curvature_type}')

    ctor = getattr(closedforms, curvature_type, None)
    if not ctor:
        raise ValueError(f'no such curvature factory: {curvature_type}')
    kwargs = section(cfg, 'curvature.kwargs')
    try:
        return ctor(**kwargs)
    except TypeError as e:
        raise ValueError(f'invalid arguments for {curvature_type}: {e}') from e


def harmonic_spec(cfg: dict) -> closedforms.HarmonicSpec:
    def coefficients(key):
        value = cfg.get(key, ())
        if isinstance(value, (int, float)):
            return (value,)
        if isinstance(value, str):
            return tuple(float(c) for c in value.split(','))
        return tuple(value)

    return closedforms.HarmonicSpec(
        a=coefficients('harmonic.a') or (0.0,),
        b=coefficients('harmonic.b'),
    )
