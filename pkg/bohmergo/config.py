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

"""Scenario configuration files.

A scenario is a JSON object with the sections below. Every section is
optional; missing sections take the defaults of the corresponding class.

``model``
    :func:`~bohmergo.wavefunction.model_to_dict` document
``ensembles``
    ``{"gibbs": {...}, "constrained": {...}}``, each an
    :class:`~bohmergo.ensemble.EnsembleSpec`. A ``seed`` of ``null`` is
    derived from the top-level seed.
``detectors``
    :class:`~bohmergo.detection.DetectorGeometry`
``integrator``
    :class:`~bohmergo.dynamics.IntegratorOptions`
``thresholds``
    :class:`~bohmergo.detection.DetectionThresholds`
``design``
    ``max_spreading``, ``max_growth``, ``fraunhofer_margin``
``ergodic``
    ``system``, ``N``, ``tol``, ``n_samples``, ``n_steps``, ``delta``, ``dt``
``equivariance``
    ``bins``, ``t_final``
``simulate``
    ``ensemble``, ``write_trajectories``
``seed``, ``threads``, ``out``
    run settings
"""

from __future__ import division, print_function
import collections
import copy
import hashlib
import json
import logging
import math
import os

import six

from bohmergo import ConfigError
from bohmergo.wavefunction import (
    PhysicalParams, build_double_slit_model, model_from_dict, model_to_dict)
from bohmergo.dynamics import IntegratorOptions
from bohmergo.ensemble import EnsembleSpec
from bohmergo.detection import DetectorGeometry, DetectionThresholds
from bohmergo.design import DesignInputs
from bohmergo.ergodic import SYSTEMS


_logger = logging.getLogger(__name__)

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')
ENSEMBLE_NAMES = ('gibbs', 'constrained')
SECTIONS = ('model', 'ensembles', 'detectors', 'integrator', 'thresholds', 'design',
            'ergodic', 'equivariance', 'simulate', 'seed', 'threads', 'out')

_DESIGN_DEFAULTS = collections.OrderedDict([
    ('max_spreading', 1.05), ('max_growth', math.e), ('fraunhofer_margin', 10.0)])
_ERGODIC_DEFAULTS = collections.OrderedDict([
    ('system', 'rotation'), ('N', None), ('tol', 1e-3), ('n_samples', 100),
    ('n_steps', 100), ('delta', 0.0), ('dt', None)])
_EQUIVARIANCE_DEFAULTS = collections.OrderedDict([('bins', 50), ('t_final', None)])
_SIMULATE_DEFAULTS = collections.OrderedDict([
    ('ensemble', 'constrained'), ('write_trajectories', 10)])


def _section(doc, name, defaults):
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError('{}: expected an object'.format(name))
    for key in doc:
        if key not in defaults:
            raise ConfigError('{}.{}: unknown key'.format(name, key))
    section = collections.OrderedDict(defaults)
    section.update(doc)
    return section


def _positive_int(value, name, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, six.integer_types) or value < 1:
        raise ConfigError('{}: must be a positive integer, got {!r}'.format(name, value))
    return int(value)


def _positive(value, name, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (six.integer_types, float)) \
            or not value > 0:
        raise ConfigError('{}: must be a positive number, got {!r}'.format(name, value))
    return float(value)


def default_detectors(params):
    """Mirror-symmetric faces centred on the slits.

    The half-width is the smaller of a/4 and twice the packet width at the
    detector plane.
    """
    width = params.sigma0 * params.spreading(params.sigma0, params.flight_time)
    half = min(params.a / 4, 2 * width)
    centre = params.a / 2
    return DetectorGeometry([centre - half, centre + half], [-centre - half, -centre + half],
                            params.L)


class ScenarioConfig(object):
    """Everything a command-line run needs.

    Construct from a mapping with :meth:`from_dict`, a file with
    :meth:`load` or a shipped preset with :meth:`preset`. Instances compare
    equal when their :meth:`to_dict` documents do.

    Raises
    ------
    ConfigError
        naming the first invalid field
    """

    def __init__(self, model=None, ensembles=None, detectors=None, integrator=None,
                 thresholds=None, design=None, ergodic=None, equivariance=None,
                 simulate=None, seed=0, threads=1, out=None):
        if model is None:
            model = build_double_slit_model(PhysicalParams.natural())
        self.model = model
        ensembles = dict(ensembles or {})
        for key in ensembles:
            if key not in ENSEMBLE_NAMES:
                raise ConfigError('ensembles.{}: unknown ensemble'.format(key))
        self.ensembles = collections.OrderedDict()
        for name in ENSEMBLE_NAMES:
            doc = ensembles.get(name)
            if isinstance(doc, EnsembleSpec):
                doc = doc.to_dict()
            doc = dict(doc or {})
            doc.setdefault('mode', 'gibbs' if name == 'gibbs' else 'constrained_pairs')
            doc.setdefault('seed', None)
            seed_value = doc.pop('seed')
            # Validate with a placeholder seed; the stored seed may be null
            EnsembleSpec.from_dict(dict(doc, seed=seed_value if seed_value is not None else 0),
                                   'ensembles.' + name)
            doc['seed'] = seed_value
            self.ensembles[name] = doc
        self.detectors = detectors if detectors is not None else default_detectors(model.params)
        if self.detectors.L != model.params.L:
            raise ConfigError('detectors.L: {!r} differs from model.L = {!r}'
                              .format(self.detectors.L, model.params.L))
        self.integrator = integrator if integrator is not None else IntegratorOptions()
        self.thresholds = thresholds if thresholds is not None else DetectionThresholds()
        self.design = _section(design, 'design', _DESIGN_DEFAULTS)
        DesignInputs(model.params, **self.design)
        self.ergodic = _section(ergodic, 'ergodic', _ERGODIC_DEFAULTS)
        if self.ergodic['system'] not in SYSTEMS:
            raise ConfigError('ergodic.system: expected one of {}, got {!r}'
                              .format(', '.join(SYSTEMS), self.ergodic['system']))
        _positive_int(self.ergodic['N'], 'ergodic.N', allow_none=True)
        _positive(self.ergodic['tol'], 'ergodic.tol')
        _positive_int(self.ergodic['n_samples'], 'ergodic.n_samples')
        _positive_int(self.ergodic['n_steps'], 'ergodic.n_steps')
        _positive(self.ergodic['dt'], 'ergodic.dt', allow_none=True)
        self.equivariance = _section(equivariance, 'equivariance', _EQUIVARIANCE_DEFAULTS)
        _positive_int(self.equivariance['bins'], 'equivariance.bins')
        _positive(self.equivariance['t_final'], 'equivariance.t_final', allow_none=True)
        self.simulate = _section(simulate, 'simulate', _SIMULATE_DEFAULTS)
        if self.simulate['ensemble'] not in ENSEMBLE_NAMES:
            raise ConfigError('simulate.ensemble: expected one of {}, got {!r}'
                              .format(', '.join(ENSEMBLE_NAMES), self.simulate['ensemble']))
        if isinstance(self.simulate['write_trajectories'], bool) \
                or not isinstance(self.simulate['write_trajectories'], six.integer_types) \
                or self.simulate['write_trajectories'] < 0:
            raise ConfigError('simulate.write_trajectories: must be a non-negative integer')
        if isinstance(seed, bool) or not isinstance(seed, six.integer_types) \
                or not 0 <= seed < 2**64:
            raise ConfigError('seed: must be an integer in [0, 2**64), got {!r}'.format(seed))
        self.seed = int(seed)
        self.threads = _positive_int(threads, 'threads')
        if out is not None and not isinstance(out, six.string_types):
            raise ConfigError('out: must be a path or null')
        self.out = out

    def ensemble_spec(self, name):
        """:class:`~bohmergo.ensemble.EnsembleSpec` for ``'gibbs'`` or ``'constrained'``.

        A null seed becomes the top-level seed (gibbs) or the top-level seed
        plus one (constrained), modulo 2**64.
        """
        if name not in ENSEMBLE_NAMES:
            raise ConfigError('ensembles.{}: unknown ensemble'.format(name))
        doc = dict(self.ensembles[name])
        if doc['seed'] is None:
            doc['seed'] = (self.seed + ENSEMBLE_NAMES.index(name)) % 2**64
        return EnsembleSpec.from_dict(doc, 'ensembles.' + name)

    def design_inputs(self):
        return DesignInputs(self.model.params, **self.design)

    def replace(self, seed=None, out=None, threads=None, n=None, model=None):
        """Copy with command-line overrides applied.

        `n` sets the member count of both ensembles.
        """
        doc = self.to_dict()
        if seed is not None:
            doc['seed'] = seed
        if out is not None:
            doc['out'] = out
        if threads is not None:
            doc['threads'] = threads
        if n is not None:
            for name in ENSEMBLE_NAMES:
                doc['ensembles'][name]['n'] = n
        if model is not None:
            doc['model'] = model_to_dict(model)
        return ScenarioConfig.from_dict(doc)

    def to_dict(self):
        doc = collections.OrderedDict()
        doc['model'] = model_to_dict(self.model)
        doc['ensembles'] = copy.deepcopy(self.ensembles)
        doc['detectors'] = self.detectors.to_dict()
        doc['integrator'] = self.integrator.to_dict()
        doc['thresholds'] = self.thresholds.to_dict()
        doc['design'] = collections.OrderedDict(self.design)
        doc['ergodic'] = collections.OrderedDict(self.ergodic)
        doc['equivariance'] = collections.OrderedDict(self.equivariance)
        doc['simulate'] = collections.OrderedDict(self.simulate)
        doc['seed'] = self.seed
        doc['threads'] = self.threads
        doc['out'] = self.out
        return doc

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError('scenario: expected a JSON object')
        for key in doc:
            if key not in SECTIONS:
                raise ConfigError('{}: unknown section'.format(key))
        model = model_from_dict(doc['model']) if doc.get('model') is not None else None
        detectors = doc.get('detectors')
        integrator = doc.get('integrator')
        thresholds = doc.get('thresholds')
        return cls(
            model=model,
            ensembles=doc.get('ensembles'),
            detectors=DetectorGeometry.from_dict(detectors) if detectors is not None else None,
            integrator=IntegratorOptions.from_dict(integrator) if integrator is not None else None,
            thresholds=(DetectionThresholds.from_dict(thresholds)
                        if thresholds is not None else None),
            design=doc.get('design'),
            ergodic=doc.get('ergodic'),
            equivariance=doc.get('equivariance'),
            simulate=doc.get('simulate'),
            seed=doc.get('seed', 0),
            threads=doc.get('threads', 1),
            out=doc.get('out'))

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def dump(self, path):
        with open(path, 'w') as f:
            f.write(self.dumps())
            f.write('\n')

    @classmethod
    def loads(cls, text, source='<string>'):
        try:
            doc = json.loads(text)
        except ValueError as error:
            raise ConfigError('{}: invalid JSON: {}'.format(source, error))
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path):
        """Load a scenario file.

        Raises
        ------
        ConfigError
            if the file cannot be read or is invalid; the message names the
            path or the field
        """
        try:
            with open(path) as f:
                text = f.read()
        except (IOError, OSError) as error:
            raise ConfigError('{}: cannot read config file: {}'.format(
                path, getattr(error, 'strerror', None) or error))
        config = cls.loads(text, path)
        _logger.info('Loaded scenario from %s', path)
        return config

    @classmethod
    def preset(cls, name):
        """Load one of the shipped presets (see :func:`list_presets`)."""
        if name not in list_presets():
            raise ConfigError('preset: unknown preset {!r} (expected one of {})'
                              .format(name, ', '.join(list_presets())))
        return cls.load(os.path.join(PRESET_DIR, name + '.json'))

    def config_hash(self):
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result


def list_presets():
    """Names of the shipped presets."""
    return sorted(os.path.splitext(name)[0] for name in os.listdir(PRESET_DIR)
                  if name.endswith('.json'))
