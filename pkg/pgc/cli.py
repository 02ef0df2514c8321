# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import dataclasses
import logging
import os
import textwrap
import typing

import numpy as np

import pgc.closedforms as closedforms
import pgc.config as config
import pgc.fields as fields
import pgc.loggas as loggas
import pgc.meanfield as meanfield
import pgc.model as model
import pgc.util as util
import pgc.verify as verify

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# flag destination -> configuration key
FLAG_KEYS = {
    'family': 'family.name',
    'n': 'family.n',
    'y': 'family.y',
    'zeta': 'family.zeta',
    'K0': 'family.K0',
    'phi': 'family.phi',
    'gamma': 'family.gamma',
    'window': 'closed_form.window',
    'h': 'closed_form.h',
    'curvature': 'curvature.type',
    'harmonic_a': 'harmonic.a',
    'harmonic_b': 'harmonic.b',
    'geometry': 'grid.geometry',
    'domain_radius': 'grid.domain_radius',
    'beta': 'solver.beta',
    'kappa': 'solver.kappa',
    'tolerance': 'solver.tolerance',
    'max_iterations': 'solver.max_iterations',
    'multi_start': 'solver.multi_start',
    'n_particles': 'mc.n_particles',
    'sweeps': 'mc.sweeps',
    'chains': 'mc.chains',
    'seed': 'mc.seed',
    'thin': 'mc.thin',
    'bins': 'mc.bins',
    'compare': 'mc.compare',
    'dump_samples': 'mc.dump_samples',
    'suite': 'verify.suite',
    'fast': 'verify.fast',
    'out': 'output.dir',
}


def _add_family_args(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--family',
        choices=[f.value for f in closedforms.Family],
    )
    parser.add_argument('--n', type=int, help='chakie degree')
    parser.add_argument('--y', help='base point, e.g. 1,0')
    parser.add_argument('--zeta', type=float)
    parser.add_argument('--K0', type=float, help='stuart curvature')
    parser.add_argument('--phi', type=float, help='stuart direction of v')
    parser.add_argument('--gamma', type=float, help='special family exponent')


def _add_curvature_args(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--curvature',
        help='curvature factory from pgc.closedforms, e.g. special_curvature',
    )
    parser.add_argument(
        '--curvature-arg',
        action='append',
        default=[],
        metavar='KEY=VALUE',
        help='keyword argument for the curvature factory (repeatable)',
    )
    parser.add_argument('--harmonic-a', help='coefficients a_0,a_1,.. of H')
    parser.add_argument('--harmonic-b', help='coefficients b_0,b_1,.. of H')
    parser.add_argument('--domain-radius', type=float, help='truncate tau to a disk')
    parser.add_argument('--beta', type=float)
    parser.add_argument('--kappa', type=float, help='integral curvature, converted to beta = kappa / pi')


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pgc',
        description='surfaces with prescribed Gauss curvature',
    )
    parser.add_argument('-c', '--config', help='flat key = value or yaml configuration file')
    parser.add_argument('-o', '--out', help=f'output directory (default: ${util.OUTPUT_DIR_ENV} or cwd)')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')

    subparsers = parser.add_subparsers(dest='command', required=True)

    closed_form = subparsers.add_parser(
        'closed-form',
        help='emit e^2u of a closed-form family on a planar grid',
    )
    _add_family_args(closed_form)
    closed_form.add_argument('--window', type=float, help='half width of the square window')
    closed_form.add_argument('--h', type=float, help='grid spacing')

    solve = subparsers.add_parser(
        'solve',
        help='minimize the mean-field free energy and reconstruct U',
    )
    _add_family_args(solve)
    _add_curvature_args(solve)
    solve.add_argument('--geometry', choices=('radial', 'planar'))
    solve.add_argument('--tolerance', type=float)
    solve.add_argument('--max-iterations', type=int)
    solve.add_argument(
        '--multi-start',
        type=int,
        help=textwrap.dedent('''\
            number of initializations (a-priori measure, then uniform disks of growing
            radius); distinct limits are reported'''),
    )

    sample = subparsers.add_parser(
        'sample',
        help='Metropolis sampling of the log-gas ensemble',
    )
    _add_family_args(sample)
    _add_curvature_args(sample)
    sample.add_argument('--n-particles', type=int)
    sample.add_argument('--sweeps', type=int)
    sample.add_argument('--chains', type=int)
    sample.add_argument('--seed', type=int)
    sample.add_argument('--thin', type=int)
    sample.add_argument('--bins', type=int)
    sample.add_argument('--compare', help='radial density csv (r,value,weight) to compare against')
    sample.add_argument('--dump-samples', action='store_true', default=None)

    verify_parser = subparsers.add_parser(
        'verify',
        help='run verification suites',
    )
    verify_parser.add_argument(
        '--suite',
        action='append',
        help=f'one of all, {", ".join(verify.SUITES)} (repeatable, default: all)',
    )
    verify_parser.add_argument(
        '--fast',
        action='store_true',
        default=None,
        help='reduced Monte Carlo and planar sizes',
    )

    return parser


def _flag_config(parsed: argparse.Namespace) -> dict:
    flags = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(parsed, dest, None)
        if value is not None:
            flags[key] = value

    for item in getattr(parsed, 'curvature_arg', ()):
        if '=' not in item:
            raise ValueError(f'--curvature-arg expects KEY=VALUE, got {item!r}')
        key, value = item.split('=', 1)
        flags[f'curvature.kwargs.{key.strip()}'] = config.parse_value(value)

    return flags


def run_config(parsed: argparse.Namespace) -> dict:
    file_cfg = config.load_config(parsed.config) if parsed.config else {}
    return config.merge(file_cfg, _flag_config(parsed))


def _out_path(cfg: dict, name: str) -> str:
    return os.path.join(util.output_dir(cfg.get('output.dir')), name)


def _family_integral(inst: closedforms.FamilyInstance) -> typing.Optional[float]:
    '''
    integral curvature where it is finite (none for stuart)
    '''
    if inst.family is closedforms.Family.FLAT:
        return 0.0
    if inst.family is closedforms.Family.STUART:
        return None
    tail = 2 * inst.n + 2 if inst.family is closedforms.Family.CHAKIE else 4.0
    return fields.integral_curvature(
        K_eval=inst.curvature,
        u_eval=inst.u,
        r_max=50.0,
        tail_exponent=tail,
    ).value


def cmd_closed_form(cfg: dict) -> model.ExitCode:
    inst = config.family_instance(cfg)
    window = config.get(cfg, 'closed_form.window', 3.0, cast=float)
    h = config.get(cfg, 'closed_form.h', 0.01, cast=float)

    field = fields.PlanarField.sample(
        inst.conformal_factor,
        halfwidth=window,
        n_cells=fields.n_cells_for(window, h),
    )
    max_value, locations = closedforms.conformal_maxima(inst)
    summary = {
        'family': inst.family,
        'max_value': max_value,
        'max_locations': locations,
        'grid_max_value': float(np.max(field.values)),
        'integral_curvature': _family_integral(inst),
        'window': window,
        'h': h,
    }

    util.write_planar_csv(_out_path(cfg, 'closed_form.csv'), field)
    util.write_json(
        _out_path(cfg, 'closed_form.json'),
        summary,
        schema=util.CLOSED_FORM_SUMMARY_SCHEMA,
    )
    return model.ExitCode.SUCCESS


def _curvature_and_harmonic(cfg: dict) -> typing.Tuple[closedforms.CurvatureSpec, closedforms.HarmonicSpec]:
    return config.curvature_spec(cfg), config.harmonic_spec(cfg)


def _geometry(
    cfg: dict,
    tau_is_radial: bool,
) -> meanfield.GeometryBase:
    kind = cfg.get('grid.geometry') or ('radial' if tau_is_radial else 'planar')
    if kind == 'radial':
        return meanfield.RadialGeometry(
            r_min=config.get(cfg, 'grid.r_min', 1e-3, cast=float),
            r_max=config.get(cfg, 'grid.r_max', 1e4, cast=float),
            n_points=config.get(cfg, 'grid.n_points', 2000, cast=int),
        )
    if kind == 'planar':
        return meanfield.PlanarGeometry(
            halfwidth=config.get(cfg, 'grid.halfwidth', 4.0, cast=float),
            n_cells=config.get(cfg, 'grid.n_cells', 128, cast=int),
        )
    raise ValueError(f'unknown grid.geometry: {kind}')


def _beta(cfg: dict) -> float:
    beta = config.get(cfg, 'solver.beta', cast=float)
    if beta is None:
        raise ValueError('solver.beta (or solver.kappa) missing')
    return beta


def _write_field(path: str, field: typing.Union[fields.RadialProfile, fields.PlanarField]):
    if isinstance(field, fields.RadialProfile):
        util.write_radial_csv(path, field)
    else:
        util.write_planar_csv(path, field)


def _flat_solution(cfg: dict, beta: float, harmonic: closedforms.HarmonicSpec) -> model.ExitCode:
    if beta != 0:
        raise model.InadmissibleError(f'K vanishes identically: kappa must be 0, got {beta=}')
    logger.info('K vanishes identically, U = H')
    geometry = _geometry(cfg, tau_is_radial=harmonic.is_constant)
    _write_field(_out_path(cfg, 'U.csv'), geometry.field(harmonic(geometry.points())))
    summary = {
        'beta': 0.0,
        'kappa': 0.0,
        'E': 0.0,
        'S1': 0.0,
        'F': 0.0,
        'U0': 0.0,
        'iterations': 0,
        'converged': True,
        'residual': 0.0,
        'tail_share': 0.0,
        'pde_residual': 0.0,
        'integral_curvature': 0.0,
    }
    util.write_json(_out_path(cfg, 'solve.json'), summary, schema=util.SOLVE_SUMMARY_SCHEMA)
    return model.ExitCode.SUCCESS


def _initials(base: meanfield.SolverConfig, count: int) -> typing.List[meanfield.SolverConfig]:
    initials = [dataclasses.replace(base, initial=meanfield.InitialDensity.APRIORI)]
    for k in range(count - 1):
        initials.append(dataclasses.replace(
            base,
            initial=meanfield.InitialDensity.UNIFORM_DISK,
            disk_radius=2.0 ** k,
        ))
    return initials


def cmd_solve(cfg: dict) -> model.ExitCode:
    curvature, harmonic = _curvature_and_harmonic(cfg)
    beta = _beta(cfg)
    if curvature.is_zero:
        return _flat_solution(cfg, beta, harmonic)

    tau = meanfield.build_apriori(
        curvature,
        harmonic,
        domain_radius=config.get(cfg, 'grid.domain_radius', cast=float),
    )
    geometry = _geometry(cfg, tau_is_radial=tau.radial)
    base = meanfield.SolverConfig(
        beta=beta,
        geometry=geometry,
        damping=config.get(cfg, 'solver.damping', 1.0, cast=float),
        tolerance=config.get(cfg, 'solver.tolerance', 1e-10, cast=float),
        max_iterations=config.get(cfg, 'solver.max_iterations', 1000, cast=int),
        initial=cfg.get('solver.initial', meanfield.InitialDensity.APRIORI),
        disk_radius=config.get(cfg, 'solver.disk_radius', 1.0, cast=float),
    )

    count = config.get(cfg, 'solver.multi_start', 1, cast=int)
    if count < 1:
        raise ValueError(f'solver.multi_start must be positive, got {count}')
    if count == 1:
        results = [meanfield.solve_minimizer(base, tau)]
    else:
        results = meanfield.multi_start(base, tau, initials=_initials(base, count))
    results = [meanfield.reconstruct_u(r, curvature, harmonic, tau=tau) for r in results]
    result = results[0]

    summary = result.summary()
    summary['F_initial'] = result.initial_free_energy.F
    summary['integral_curvature'] = meanfield.integral_curvature_of(result, curvature)
    if count > 1:
        distinct = meanfield.distinct_limits(results, tolerance=10 * base.tolerance)
        summary['runs'] = [r.summary() for r in results]
        summary['distinct_limits'] = len(distinct)
        if len(distinct) > 1:
            logger.warning(f'{len(distinct)} distinct limits from {count} initializations')

    _write_field(_out_path(cfg, 'rho.csv'), result.density)
    _write_field(_out_path(cfg, 'U.csv'), result.U_field)
    util.write_trace_csv(_out_path(cfg, 'trace.csv'), result.trace)
    util.write_json(_out_path(cfg, 'solve.json'), summary, schema=util.SOLVE_SUMMARY_SCHEMA)

    if not all(r.converged for r in results):
        return model.ExitCode.NOT_CONVERGED
    return model.ExitCode.SUCCESS


def _bin_reach(cfg: dict, tau: meanfield.AprioriMeasure) -> float:
    reach = config.get(cfg, 'mc.r_max', cast=float)
    if reach is not None:
        return reach
    bounds = [b for b in (tau.domain_radius, tau.curvature.support_radius) if b is not None]
    return min(bounds + [10.0])


def cmd_sample(cfg: dict) -> model.ExitCode:
    curvature, harmonic = _curvature_and_harmonic(cfg)
    beta = _beta(cfg)
    tau = meanfield.build_apriori(
        curvature,
        harmonic,
        domain_radius=config.get(cfg, 'grid.domain_radius', cast=float),
    )

    seed = config.get(cfg, 'mc.seed', 0, cast=int)
    n_particles = config.get(cfg, 'mc.n_particles', 100, cast=int)
    sweeps = config.get(cfg, 'mc.sweeps', 10_000, cast=int)
    bins = config.get(cfg, 'mc.bins', 30, cast=int)
    dump = bool(cfg.get('mc.dump_samples', False))
    radial = tau.radial

    reach = _bin_reach(cfg, tau)
    if radial:
        edges = np.linspace(0.0, reach, bins + 1)
    elif bins % 2:
        raise ValueError(f'planar marginals need an even number of bins, got {bins}')
    else:
        edges = np.linspace(-reach, reach, bins + 1)

    runs = loggas.run_chains(
        tau=tau,
        n_particles=n_particles,
        beta=beta,
        sweeps=sweeps,
        edges=edges,
        seed=seed,
        n_chains=config.get(cfg, 'mc.chains', 4, cast=int),
        burn_in=config.get(cfg, 'mc.burn_in', cast=int),
        thin=config.get(cfg, 'mc.thin', 1, cast=int),
        sigma=config.get(cfg, 'mc.sigma', 0.5, cast=float),
        keep_samples=dump,
        radial=radial,
    )
    histogram = loggas.merged_histogram(runs)
    moment = loggas.pooled_pair_moment(runs)

    summary = {
        'seed': seed,
        'N': n_particles,
        'beta': beta,
        'sweeps': sweeps,
        'acceptance_rate': float(np.mean([r.acceptance_rate for r in runs])),
        'pair_log_moment': moment.value,
        'pair_log_moment_stderr': moment.stderr,
        'chains': [r.summary() for r in runs],
    }

    compare = cfg.get('mc.compare')
    if compare:
        profile = util.read_radial_csv(compare)
        threshold = config.get(cfg, 'mc.l1_threshold', 0.1, cast=float)
        distances = [loggas.l1_distance(r.histogram, profile) for r in runs]
        summary['l1_distance'] = loggas.l1_distance(histogram, profile)
        summary['failure_kind'] = loggas.classify_l1_failure(distances, threshold)
        logger.info(f'L1 distance to {compare}: {summary["l1_distance"]:.4g} ({summary["failure_kind"].value})')

    if radial:
        util.write_radial_csv(_out_path(cfg, 'marginal.csv'), histogram.to_profile())
    else:
        util.write_planar_csv(
            _out_path(cfg, 'marginal.csv'),
            fields.PlanarField(halfwidth=reach, values=histogram.density()),
        )
    if dump:
        util.write_samples_csv(
            _out_path(cfg, 'samples.csv'),
            np.concatenate([r.samples for r in runs]),
        )
    util.write_json(_out_path(cfg, 'sample.json'), summary, schema=util.SAMPLE_SUMMARY_SCHEMA)
    return model.ExitCode.SUCCESS


def cmd_verify(cfg: dict) -> model.ExitCode:
    names = cfg.get('verify.suite') or ['all']
    if isinstance(names, str):
        names = [n.strip() for n in names.split(',')]
    fast = bool(cfg.get('verify.fast', False))

    results = verify.run_suites(verify.resolve(names), fast=fast)
    rows = [
        (r.suite, c.name, c.passed, c.value, c.limit)
        for r in results for c in r.checks
    ]
    print(util.format_table(rows, header=('suite', 'check', 'result', 'value', 'limit')))

    if cfg.get('output.dir') or os.environ.get(util.OUTPUT_DIR_ENV):
        util.write_json(
            _out_path(cfg, 'verify.json'),
            verify.report(results),
            schema=util.VERIFY_REPORT_SCHEMA,
        )
    return verify.exit_code(results)


COMMANDS = {
    'closed-form': cmd_closed_form,
    'solve': cmd_solve,
    'sample': cmd_sample,
    'verify': cmd_verify,
}


def main(argv: typing.Sequence[str] = None) -> int:
    parser = _parser()
    parsed = parser.parse_args(argv)

    if parsed.verbose:
        level = logging.DEBUG
    elif parsed.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        cfg = run_config(parsed)
        code = COMMANDS[parsed.command](cfg)
    except ValueError as e:
        logger.error(f'{parsed.command}: {e}')
        code = model.ExitCode.INVALID_CONFIG
    except (model.QuadratureError, model.BracketError) as e:
        logger.error(f'{parsed.command}: {type(e).__name__}: {e}')
        code = model.ExitCode.NOT_CONVERGED

    logger.debug(f'{parsed.command} finished with exit code {int(code)} ({code.name})')
    return int(code)
