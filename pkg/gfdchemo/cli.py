#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command line front end

    gfdchemo run      --preset example1 [--output-dir DIR] [overrides]
    gfdchemo study    --resolutions 11,21,41
    gfdchemo compare  --preset example3 [--gammas gamma1,gamma2]
    gfdchemo validate --gamma gamma1 --mu 3

run writes errors.csv, bounds.csv and snapshot_t<time>.csv files, study
writes convergence.csv, compare writes one errors CSV per motility
function and dominance.csv.  All files go under the output directory.
"""
import argparse
import logging
import os
import sys

from gfdchemo import analysis, solver
from gfdchemo.config import COMPARISONS, SimulationConfig, config_from_preset, parse_config
from gfdchemo.errors import ConfigError, DivergenceError, GfdError, StabilityError
from gfdchemo.model import ModelParams, get_gamma, validate_hypotheses
from gfdchemo.stencil import WeightScheme

logger = logging.getLogger(__name__)

# flag name -> (config key, type)
OVERRIDES = {
    'grid': ('grid', int),
    'cloud': ('cloud', str),
    'perturbation': ('perturbation', float),
    'seed': ('seed', int),
    'star_size': ('star_size', int),
    'weight_power': ('weight_power', float),
    'dt': ('dt', float),
    't_final': ('t_final', float),
    'gamma': ('gamma', str),
    'mu': ('mu', float),
    'initial': ('initial', str),
    'bump_a': ('bump_a', float),
    'bump_b': ('bump_b', float),
    'constant_value': ('constant_value', float),
    'stability': ('stability', str),
    'stability_cadence': ('stability_cadence', int),
    'output_dir': ('output_dir', str),
}


def _float_list(text):
    try:
        return [float(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers, got %r" % text)


def _int_list(text):
    try:
        return [int(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers, got %r" % text)


def _add_config_options(p):
    p.add_argument('--preset', help="built-in configuration")
    p.add_argument('--config', help="INI configuration file")
    for flag, (_, kind) in OVERRIDES.items():
        p.add_argument('--' + flag.replace('_', '-'), dest=flag, type=kind)
    p.add_argument('--report-times', dest='report_times', type=_float_list)
    p.add_argument('--snapshot-times', dest='snapshot_times', type=_float_list)
    p.add_argument('--override-hypotheses', dest='override_hypotheses',
                   action='store_true', default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='gfdchemo',
        description="GFD solver for the parabolic-elliptic chemotaxis system")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('run', help="solve one configuration")
    _add_config_options(p)

    p = sub.add_parser('study', help="manufactured elliptic convergence study")
    p.add_argument('--resolutions', type=_int_list, default=[11, 21, 41])
    p.add_argument('--star-size', dest='star_size', type=int, default=8)
    p.add_argument('--weight-power', dest='weight_power', type=float, default=1.0)
    p.add_argument('--output-dir', dest='output_dir', default='output')

    p = sub.add_parser('compare', help="one configuration under two motility functions")
    _add_config_options(p)
    p.add_argument('--gammas', type=lambda s: [g.strip() for g in s.split(',')],
                   default=['gamma1', 'gamma2'])

    p = sub.add_parser('validate', help="check the hypotheses on gamma and mu")
    _add_config_options(p)
    return parser


def load_config(args, validate=True):
    """Preset, then INI file, then command line flags."""
    preset = args.preset
    if preset in COMPARISONS and args.command == 'compare':
        preset = COMPARISONS[preset]
    config = config_from_preset(preset) if preset else SimulationConfig()
    if args.config:
        config = parse_config(args.config, base=config)
    overrides = {}
    for flag in list(OVERRIDES) + ['report_times', 'snapshot_times', 'override_hypotheses']:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[OVERRIDES.get(flag, (flag,))[0]] = value
    if overrides.get('cloud') is not None:
        overrides.setdefault('grid', None)
    if overrides.get('grid') is not None:
        overrides.setdefault('cloud', None)
    config.set(overrides)
    return config.validate() if validate else config


def write_snapshot(state, cloud, dest):
    """id,x,y,kind,U,V for every inner and boundary node."""
    f = analysis.format_float
    rows = [(str(i), f(cloud.points[i, 0]), f(cloud.points[i, 1]), str(cloud.kinds[i]),
             f(state.U[i]), f(state.V[i])) for i in cloud.physical_ids]
    analysis.write_csv(dest, ('id', 'x', 'y', 'kind', 'U', 'V'), rows)


def write_bound_log(records, dest):
    f = analysis.format_float
    analysis.write_csv(dest, ('step', 't', 'global_bound', 'excluded'),
                       [(str(r.step), f(r.t), f(r.global_bound), str(r.excluded))
                        for r in records])


def snapshot_name(t):
    return "snapshot_t%.6f.csv" % t


def write_artifacts(result, out):
    os.makedirs(out, exist_ok=True)
    result.report.to_csv(os.path.join(out, 'errors.csv'))
    if result.bound_log:
        write_bound_log(result.bound_log, os.path.join(out, 'bounds.csv'))
    for state in result.snapshots:
        path = os.path.join(out, snapshot_name(state.time))
        write_snapshot(state, result.cloud, path)
        logger.debug("wrote %s", path)
    logger.info("artifacts written to %s", out)


def _run_and_write(config):
    out = config.output_dir
    try:
        result = solver.run(config)
    except (DivergenceError, StabilityError) as err:
        partial = err.result
        if partial is not None:
            write_artifacts(partial, out)
            last = partial.final_state
            if last is not None and all(s.step != last.step for s in partial.snapshots):
                path = os.path.join(out, snapshot_name(last.time))
                write_snapshot(last, partial.cloud, path)
                logger.info("last valid state (t=%g) written to %s", last.time, path)
        logger.error("run aborted: %s", err)
        return None
    write_artifacts(result, out)
    return result


def run_command(config):
    """Run one configuration; artifacts are flushed even when the run aborts."""
    return 0 if _run_and_write(config) is not None else 1


def study_command(resolutions, star_size=8, weight_power=1.0, output_dir='output'):
    try:
        scheme = WeightScheme(weight_power)
    except ValueError as err:
        raise ConfigError('weight_power', str(err))
    try:
        study = analysis.manufactured_elliptic_study(resolutions, star_size, scheme)
    except GfdError:
        raise
    except ValueError as err:
        raise ConfigError('resolutions', str(err))
    os.makedirs(output_dir, exist_ok=True)
    study.to_csv(os.path.join(output_dir, 'convergence.csv'))
    logger.info("estimated order %.3f", study.order)
    return 0


def compare_command(config, gammas=('gamma1', 'gamma2')):
    """Run config once per motility function and tabulate which converges faster."""
    if len(gammas) != 2:
        raise ConfigError('gammas', "compare needs exactly two motility functions")
    out = config.output_dir
    reports = []
    for g in gammas:
        c = SimulationConfig(config)
        c.set(gamma=g, output_dir=os.path.join(out, g))
        result = _run_and_write(c.validate())
        if result is None:
            return 1
        reports.append(result.report)
    table = analysis.comparison_report(*reports)
    table.to_csv(os.path.join(out, 'dominance.csv'))
    print("%s below %s at every report time: U %s, V %s"
          % (gammas[0], gammas[1], table.u_dominates, table.v_dominates))
    return 0


def validate_command(config):
    params = ModelParams(config.mu, get_gamma(config.gamma))
    report = validate_hypotheses(params)
    print(report, end='')
    return 0 if report.passes else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == 'study':
            return study_command(args.resolutions, args.star_size, args.weight_power,
                                 args.output_dir)
        if args.command == 'validate':
            config = load_config(args, validate=False)
            for key in ('gamma', 'mu'):
                if config[key] is None:
                    raise ConfigError(key, "required")
            return validate_command(config)
        config = load_config(args)
        if args.command == 'compare':
            return compare_command(config, args.gammas)
        return run_command(config)
    except (GfdError, OSError) as err:
        logger.error("%s", err)
        return 1


if __name__ == '__main__':
    sys.exit(main())
