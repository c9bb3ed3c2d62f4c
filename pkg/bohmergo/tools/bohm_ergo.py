# Copyright 2019 The bohmergo authors
#
# This program is free software: you can redistribute it and/or modify it under
# the terms of the GNU Lesser General Public License as published by the Free
# Software Foundation, either version 3 of the License, or (at your option) any
# later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS
# FOR A PARTICULAR PURPOSE.  See the GNU Lesser General Public License for more
# details.
#
# You should have received a copy of the GNU Lesser General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""Run bohmergo scenarios from the command line.

Each subcommand loads a scenario (``--config`` file, ``--preset`` name, or
the built-in defaults), applies the command-line overrides, runs, prints a
JSON envelope on stdout and, with ``--out``, writes the envelope, the
effective configuration and any CSV files to that directory.

Exit status is 0 on success, 2 for a configuration error and 3 for a
numerical failure.
"""

from __future__ import print_function, division
import argparse
import collections
import json
import logging
import os
import sys
import time

import numpy as np

import bohmergo
from bohmergo import ConfigError, NumericalError
from bohmergo import config, design, detection, dynamics, ensemble, ergodic, wavefunction


_logger = logging.getLogger(__name__)

TOOL = 'bohm_ergo'
COMMANDS = ('simulate', 'detect', 'ergodic', 'design', 'equivariance')
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _seed(value):
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid seed {!r}'.format(value))
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError('seed must lie in [0, 2**64)')
    return seed


def _positive_int(value):
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid count {!r}'.format(value))
    if n < 1:
        raise argparse.ArgumentTypeError('must be at least 1')
    return n


def get_args(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group('Scenario options')
    group.add_argument('--config', metavar='PATH', help='Scenario JSON file [built-in defaults]')
    group.add_argument('--preset', metavar='NAME',
                       help='Shipped scenario ({})'.format(', '.join(config.list_presets())))
    group.add_argument('--seed', type=_seed, metavar='U64', help='Override the seed')
    group.add_argument('--n', type=_positive_int, metavar='COUNT',
                       help='Override the ensemble size')
    group = common.add_argument_group('Output options')
    group.add_argument('--out', metavar='DIR', help='Write results to this directory')
    group.add_argument('--log', metavar='LEVEL',
                       default=os.environ.get('BOHM_ERGO_LOG', 'WARNING'),
                       help='Log level [%(default)s]')
    group = common.add_argument_group('Performance options')
    group.add_argument('--threads', type=_positive_int,
                       help='Number of worker threads [from config]')

    parser = argparse.ArgumentParser(
        prog=TOOL, description='Two-particle Bohmian double-slit scenarios')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + bohmergo.__version__)
    subparsers = parser.add_subparsers(title='subcommands', dest='command')
    simulate = subparsers.add_parser('simulate', parents=[common],
                                     help='Integrate an ensemble and write trajectories')
    simulate.add_argument('--model', choices=list(wavefunction.MODEL_KINDS),
                          help='Override the model kind')
    simulate.add_argument('--ensemble', choices=list(config.ENSEMBLE_NAMES),
                          help='Ensemble to integrate [from config]')
    subparsers.add_parser('detect', parents=[common],
                          help='Compare joint detection probabilities')
    ergodic_parser = subparsers.add_parser('ergodic', parents=[common],
                                           help='Time means against space means')
    ergodic_parser.add_argument('--system', choices=list(ergodic.SYSTEMS),
                                help='Fixture system [from config]')
    subparsers.add_parser('design', parents=[common], help='Apparatus feasibility checks')
    equivariance = subparsers.add_parser('equivariance', parents=[common],
                                         help='Chi-square test of an evolved gibbs ensemble')
    equivariance.add_argument('--bins', type=_positive_int,
                              help='Histogram bins per axis [from config]')

    args = parser.parse_args(argv)
    if args.command is None:
        parser.error('a subcommand is required')
    if args.config is not None and args.preset is not None:
        parser.error('--config and --preset are mutually exclusive')
    return args


def load_config(args):
    if args.config is not None:
        cfg = config.ScenarioConfig.load(args.config)
    elif args.preset is not None:
        cfg = config.ScenarioConfig.preset(args.preset)
    else:
        cfg = config.ScenarioConfig()
    model = None
    if getattr(args, 'model', None) is not None \
            and args.model != cfg.model.model_kind:
        doc = cfg.model.params.to_dict()
        doc['model_kind'] = args.model
        model = wavefunction.model_from_dict(doc)
    return cfg.replace(seed=args.seed, out=args.out, threads=args.threads, n=args.n,
                       model=model)


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('{!r} is not JSON serializable'.format(value))


def _open_csv(cfg, name):
    path = os.path.join(cfg.out, name)
    if sys.version_info[0] >= 3:
        return open(path, 'w', newline='')
    return open(path, 'wb')


def run_simulate(cfg, args):
    model = cfg.model
    name = args.ensemble or cfg.simulate['ensemble']
    spec = cfg.ensemble_spec(name)
    state = ensemble.sample_initial(model, spec)
    t_final = detection.arrival_horizon(model)
    _, summaries = ensemble.evolve_ensemble(model, state, t_final, cfg.integrator,
                                            cfg.threads, stop_at_detector=True)
    drift = np.array([s.drift for s in summaries])
    report = collections.OrderedDict()
    report['model_kind'] = model.model_kind
    report['ensemble'] = name
    report['mode'] = spec.mode
    report['n'] = spec.n
    report['lost'] = sum(1 for s in summaries if s.lost)
    report['node_aborts'] = sum(1 for s in summaries if s.node_abort)
    report['failed'] = sum(1 for s in summaries if s.failed)
    report['reached_detector'] = sum(1 for s in summaries if s.reached_detector)
    report['crossings'] = sum(1 for s in summaries if s.crossed_axis)
    report['drift_max'] = float(np.max(drift))
    report['drift_mean'] = float(np.mean(drift))
    residual = None
    if isinstance(model, wavefunction.DoubleSlitModel) and model.symmetric:
        residual = max(
            abs(s.final[0] + s.final[2] - s.delta0 * model.sum_growth(s.t_end, spec.t0))
            for s in summaries)
    report['sum_law_residual_max'] = residual
    if report['crossings']:
        _logger.warning('%d member(s) crossed their mirror axis', report['crossings'])

    count = min(cfg.simulate['write_trajectories'], spec.n)
    report['trajectories_written'] = count if cfg.out is not None else 0
    if cfg.out is not None:
        trajectories = [
            dynamics.integrate_trajectory(model, c0, t_final, cfg.integrator)
            for c0 in state.configurations[:count]]
        if trajectories:
            with _open_csv(cfg, 'trajectories.csv') as f:
                dynamics.write_trajectories_csv(f, trajectories)
        with _open_csv(cfg, 'ensemble.csv') as f:
            ensemble.write_ensemble_csv(f, state)
    report['ensemble_summary'] = state.summary()
    return report


def run_detect(cfg, args):
    arrivals = {}
    report = detection.incompatibility_report(
        cfg.model, cfg.detectors, cfg.ensemble_spec('gibbs'), cfg.ensemble_spec('constrained'),
        cfg.integrator, cfg.thresholds, cfg.threads, arrivals=arrivals)
    doc = report.to_dict()
    doc['same_side'] = cfg.detectors.is_same_side(cfg.model.params.d)
    if cfg.out is not None:
        for name in config.ENSEMBLE_NAMES:
            with _open_csv(cfg, 'arrivals_{}.csv'.format(name)) as f:
                detection.write_arrivals_csv(f, arrivals[name], cfg.detectors)
    return doc


def run_ergodic(cfg, args):
    settings = cfg.ergodic
    name = args.system or settings['system']
    if name == 'bohm_pair':
        system = ergodic.get_system(name, model=cfg.model, delta=settings['delta'],
                                    dt=settings['dt'])
    else:
        system = ergodic.get_system(name)
    N = settings['N'] or system.default_N
    report = ergodic.ergodicity_test(
        system, list(system.observables), system.starts, N, settings['tol'],
        n_samples=settings['n_samples'], n_steps=settings['n_steps'], seed=cfg.seed,
        threads=cfg.threads)
    return report.to_dict()


def run_design(cfg, args):
    report = design.feasibility_check(cfg.design_inputs())
    print(report.format_table(), file=sys.stderr)
    doc = report.to_dict()
    doc['params'] = cfg.model.params.to_dict()
    doc['thresholds'] = collections.OrderedDict(cfg.design)
    return doc


def run_equivariance(cfg, args):
    bins = args.bins or cfg.equivariance['bins']
    t_final = cfg.equivariance['t_final']
    if t_final is None:
        t_final = cfg.model.params.flight_time
    result = ensemble.equivariance_test(cfg.model, cfg.ensemble_spec('gibbs'), t_final, bins,
                                        cfg.integrator, cfg.threads)
    doc = result.to_dict()
    doc['t_final'] = t_final
    return doc


RUNNERS = collections.OrderedDict([
    ('simulate', run_simulate),
    ('detect', run_detect),
    ('ergodic', run_ergodic),
    ('design', run_design),
    ('equivariance', run_equivariance)
])


def main(argv=None):
    args = get_args(argv)
    logging.basicConfig(level=getattr(logging, args.log.upper(), logging.WARNING))
    start = time.time()
    try:
        cfg = load_config(args)
        if cfg.out is not None and not os.path.isdir(cfg.out):
            try:
                os.makedirs(cfg.out)
            except OSError as error:
                raise ConfigError('out: cannot create {}: {}'.format(cfg.out, error))
        report = RUNNERS[args.command](cfg, args)
    except ConfigError as error:
        _logger.error('Configuration error: %s', error)
        return EXIT_CONFIG
    except NumericalError as error:
        _logger.error('Numerical failure (%s): %s', type(error).__name__, error)
        return EXIT_NUMERICAL

    envelope = collections.OrderedDict()
    envelope['tool'] = TOOL
    envelope['version'] = bohmergo.__version__
    envelope['command'] = args.command
    envelope['config_hash'] = cfg.config_hash()
    envelope['seed'] = cfg.seed
    envelope['duration_s'] = time.time() - start
    envelope['report'] = report
    text = json.dumps(envelope, indent=2, default=_jsonable)
    print(text)
    if cfg.out is not None:
        cfg.dump(os.path.join(cfg.out, 'config.json'))
        with open(os.path.join(cfg.out, args.command + '.json'), 'w') as f:
            f.write(text)
            f.write('\n')
    return 0
