# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import contextlib
import dataclasses
import enum
import json
import logging
import math
import os
import tempfile
import typing

import jsonschema
import numpy as np

import pgc.fields as fields

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'PGC_OUTPUT_DIR'
CSV_FORMAT = '%.17g'

PLANAR_HEADER = 'x1,x2,value'
RADIAL_HEADER = 'r,value,weight'
SAMPLES_HEADER = 'sweep,particle,x1,x2'
TRACE_HEADER = 'iteration,residual,F,damping'

FLOAT = {
    'oneOf': [
        {'type': 'number'},
        {'enum': ['inf', '-inf', 'nan']},
    ],
}
OPTIONAL_FLOAT = {
    'oneOf': [
        {'type': 'number'},
        {'enum': ['inf', '-inf', 'nan']},
        {'type': 'null'},
    ],
}
POINT = {
    'type': 'array',
    'items': FLOAT,
    'minItems': 2,
    'maxItems': 2,
}

SOLVE_SUMMARY_SCHEMA = {
    'type': 'object',
    'required': [
        'beta', 'kappa', 'E', 'S1', 'F', 'U0', 'iterations', 'converged', 'residual',
        'tail_share',
    ],
    'properties': {
        'beta': FLOAT,
        'kappa': FLOAT,
        'E': FLOAT,
        'S1': FLOAT,
        'F': FLOAT,
        'U0': OPTIONAL_FLOAT,
        'iterations': {'type': 'integer', 'minimum': 0},
        'converged': {'type': 'boolean'},
        'residual': FLOAT,
        'tail_share': FLOAT,
        'pde_residual': OPTIONAL_FLOAT,
        'integral_curvature': OPTIONAL_FLOAT,
        'F_initial': OPTIONAL_FLOAT,
        'runs': {'type': 'array', 'items': {'type': 'object'}},
        'distinct_limits': {'type': 'integer', 'minimum': 0},
    },
}

SAMPLE_SUMMARY_SCHEMA = {
    'type': 'object',
    'required': [
        'seed', 'N', 'beta', 'sweeps', 'acceptance_rate', 'pair_log_moment',
        'pair_log_moment_stderr', 'chains',
    ],
    'properties': {
        'seed': {'type': 'integer'},
        'N': {'type': 'integer', 'minimum': 2},
        'beta': FLOAT,
        'sweeps': {'type': 'integer', 'minimum': 1},
        'acceptance_rate': FLOAT,
        'pair_log_moment': FLOAT,
        'pair_log_moment_stderr': FLOAT,
        'chains': {'type': 'array', 'items': {'type': 'object'}},
        'l1_distance': OPTIONAL_FLOAT,
        'failure_kind': {'enum': ['none', 'statistical-failure', 'possible-non-uniqueness']},
    },
}

CLOSED_FORM_SUMMARY_SCHEMA = {
    'type': 'object',
    'required': ['family', 'max_value', 'max_locations', 'integral_curvature'],
    'properties': {
        'family': {'enum': ['flat', 'chakie', 'stuart', 'special']},
        'max_value': FLOAT,
        'max_locations': {'type': 'array', 'items': POINT},
        'grid_max_value': FLOAT,
        'integral_curvature': OPTIONAL_FLOAT,
        'window': FLOAT,
        'h': FLOAT,
    },
}

VERIFY_REPORT_SCHEMA = {
    'type': 'object',
    'required': ['passed', 'suites'],
    'properties': {
        'passed': {'type': 'boolean'},
        'suites': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['suite', 'passed', 'checks'],
                'properties': {
                    'suite': {'type': 'string'},
                    'passed': {'type': 'boolean'},
                    'checks': {
                        'type': 'array',
                        'items': {
                            'type': 'object',
                            'required': ['name', 'passed'],
                            'properties': {
                                'name': {'type': 'string'},
                                'passed': {'type': 'boolean'},
                                'value': OPTIONAL_FLOAT,
                                'limit': OPTIONAL_FLOAT,
                                'detail': {'type': 'string'},
                            },
                        },
                    },
                },
            },
        },
    },
}


class EnumJSONEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, enum.Enum):
            return o.value
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def jsonable(obj):
    '''
    replaces non-finite floats by the strings 'inf', '-inf', 'nan' and converts numpy values,
    enums and dataclasses into plain json types
    '''
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return obj


def to_json(obj, schema: dict = None) -> str:
    raw = jsonable(obj)
    if schema is not None:
        jsonschema.validate(instance=raw, schema=schema)
    return json.dumps(raw, cls=EnumJSONEncoder, indent=2, sort_keys=True, allow_nan=False)


def output_dir(path: str = None) -> str:
    '''
    explicit path, else $PGC_OUTPUT_DIR, else the working directory
    '''
    if path is None:
        path = os.environ.get(OUTPUT_DIR_ENV, os.getcwd())
    os.makedirs(path, exist_ok=True)
    return path


@contextlib.contextmanager
def atomic_write(path: str):
    '''
    yields a text file in the target directory that replaces path once the block completes
    '''
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_path)
        raise
    logger.info(f'wrote {path}')


def write_json(path: str, obj, schema: dict = None):
    text = to_json(obj, schema=schema)
    with atomic_write(path) as f:
        f.write(text)
        f.write('\n')


def _write_rows(path: str, header: str, rows: np.ndarray, fmt=CSV_FORMAT):
    with atomic_write(path) as f:
        np.savetxt(f, rows, fmt=fmt, delimiter=',', header=header, comments='')


def write_planar_csv(path: str, field: fields.PlanarField):
    points = field.points().reshape(-1, 2)
    rows = np.column_stack((points, field.values.ravel()))
    _write_rows(path, PLANAR_HEADER, rows)


def write_radial_csv(path: str, profile: fields.RadialProfile):
    rows = np.column_stack((profile.radii, profile.values, profile.weights))
    _write_rows(path, RADIAL_HEADER, rows)


def write_samples_csv(path: str, samples: np.ndarray):
    '''
    samples has shape (sweeps, N, 2)
    '''
    n_sweeps, n_particles, _ = samples.shape
    sweep, particle = np.meshgrid(np.arange(n_sweeps), np.arange(n_particles), indexing='ij')
    rows = np.column_stack((sweep.ravel(), particle.ravel(), samples.reshape(-1, 2)))
    _write_rows(path, SAMPLES_HEADER, rows, fmt=['%d', '%d', CSV_FORMAT, CSV_FORMAT])


def write_trace_csv(path: str, trace: typing.Sequence):
    rows = np.array([(e.iteration, e.residual, e.F, e.damping) for e in trace], dtype=float)
    _write_rows(
        path,
        TRACE_HEADER,
        rows.reshape(-1, 4),
        fmt=['%d', CSV_FORMAT, CSV_FORMAT, CSV_FORMAT],
    )


def _read_rows(path: str, header: str) -> np.ndarray:
    with open(path) as f:
        found = f.readline().strip()
        if found != header:
            raise ValueError(f'{path}: expected header {header!r}, found {found!r}')
        return np.loadtxt(f, delimiter=',', ndmin=2)


def read_radial_csv(path: str) -> fields.RadialProfile:
    rows = _read_rows(path, RADIAL_HEADER)
    return fields.RadialProfile(
        radii=rows[:, 0],
        values=rows[:, 1],
        weights=rows[:, 2],
    )


def read_planar_csv(path: str) -> fields.PlanarField:
    rows = _read_rows(path, PLANAR_HEADER)
    n_cells = math.isqrt(rows.shape[0])
    if n_cells * n_cells != rows.shape[0]:
        raise ValueError(f'{path}: {rows.shape[0]} rows do not form a square grid')
    halfwidth = float(np.max(np.abs(rows[:, :2]))) * n_cells / (n_cells - 1)
    return fields.PlanarField(
        halfwidth=halfwidth,
        values=rows[:, 2].reshape(n_cells, n_cells),
    )


def format_table(
    rows: typing.Sequence[typing.Sequence],
    header: typing.Sequence[str],
) -> str:
    cells = [[str(c) for c in header]] + [[_cell(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ['  '.join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, '  '.join('-' * w for w in widths))
    return '\n'.join(lines)


def _cell(value) -> str:
    if isinstance(value, bool):
        return 'pass' if value else 'FAIL'
    if isinstance(value, float):
        return f'{value:.6g}'
    if value is None:
        return '-'
    return str(value)
