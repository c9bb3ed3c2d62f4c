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

"""Joint detection probabilities.

The probability that one particle lands in detector ``D1`` and the other in
``D2`` is estimated three ways:

- the space mean, by quadrature of :math:`R^2` over the detector faces
  (:func:`space_mean_joint_prob`);
- counting arrivals of an equilibrium (gibbs) ensemble;
- counting arrivals of constrained trials, one pair per trial, which is the
  time mean over trials (:func:`trajectory_joint_prob`).

The particles are indistinguishable, so by default a joint detection is the
unordered event ``{x1, x2}`` hits ``{D1, D2}``. Pass ``ordered=True`` to
count only ``x1 in D1 and x2 in D2``.
"""

from __future__ import division, print_function
import collections
import csv
import logging
import warnings

import numpy as np
import scipy.integrate

from bohmergo import ConfigError, EmptyEnsemble, QuadratureNonConvergence
from bohmergo import ensemble, ergodic
from bohmergo.dynamics import IntegratorOptions


_logger = logging.getLogger(__name__)

VERDICTS = ('compatible', 'incompatible', 'inconclusive')
ARRIVAL_COLUMNS = ('trial', 'x1_det', 'x2_det', 'hit')
#: Largest acceptable quadrature error estimate
QUADRATURE_TOLERANCE = 1e-8


def _interval(value, name):
    try:
        lo, hi = (float(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError('detectors.{}: expected [lo, hi], got {!r}'.format(name, value))
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise ConfigError('detectors.{}: need finite lo < hi, got [{}, {}]'.format(name, lo, hi))
    return (lo, hi)


def _intersection(i1, i2):
    lo = max(i1[0], i2[0])
    hi = min(i1[1], i2[1])
    return (lo, hi) if lo < hi else None


class DetectorGeometry(object):
    """Two detector faces on the plane ``y = L``.

    Parameters
    ----------
    D1, D2 : sequence of two floats
        Transverse extent ``[lo, hi]`` of each face (cm)
    L : float
        Distance of the detector plane from the slits (cm)
    ordered : bool
        Count ordered rather than unordered joint detections

    Raises
    ------
    ConfigError
        unless ``lo < hi`` for both faces and `L` is positive
    """

    def __init__(self, D1, D2, L, ordered=False):
        self.D1 = _interval(D1, 'D1')
        self.D2 = _interval(D2, 'D2')
        if not L > 0:
            raise ConfigError('detectors.L: must be positive')
        self.L = float(L)
        self.ordered = bool(ordered)

    @classmethod
    def scaled(cls, params, D1, D2, ordered=False):
        """Faces given in units of the slit separation ``a``."""
        return cls([params.a * x for x in D1], [params.a * x for x in D2], params.L, ordered)

    def swapped(self):
        return DetectorGeometry(self.D2, self.D1, self.L, self.ordered)

    def check_window(self, model, t_det):
        """Raise :exc:`ConfigError` if a face lies outside the transverse window."""
        lo, hi = model.transverse_window(t_det)
        for name, face in [('D1', self.D1), ('D2', self.D2)]:
            if face[0] < lo or face[1] > hi:
                raise ConfigError('detectors.{}: [{:g}, {:g}] extends beyond the simulated '
                                  'window [{:g}, {:g}]'.format(name, face[0], face[1], lo, hi))

    def is_same_side(self, d, guard_gap=None):
        """Whether both faces lie on one side of the band ``[-d/2, d/2]``.

        Each face must be separated from the band by at least `guard_gap`
        (default `d`).
        """
        if guard_gap is None:
            guard_gap = d
        edge = d / 2 + guard_gap
        right = self.D1[0] >= edge and self.D2[0] >= edge
        left = self.D1[1] <= -edge and self.D2[1] <= -edge
        return right or left

    def hits(self, x1, x2):
        """Vectorized joint-detection test for arrival positions."""
        x1 = np.asarray(x1)
        x2 = np.asarray(x2)
        in11 = (x1 >= self.D1[0]) & (x1 <= self.D1[1])
        in22 = (x2 >= self.D2[0]) & (x2 <= self.D2[1])
        hit = in11 & in22
        if not self.ordered:
            in12 = (x1 >= self.D2[0]) & (x1 <= self.D2[1])
            in21 = (x2 >= self.D1[0]) & (x2 <= self.D1[1])
            hit |= in12 & in21
        return hit

    def to_dict(self):
        return collections.OrderedDict([
            ('D1', list(self.D1)), ('D2', list(self.D2)), ('L', self.L),
            ('ordered', self.ordered)])

    @classmethod
    def from_dict(cls, doc):
        for key in doc:
            if key not in ('D1', 'D2', 'L', 'ordered'):
                raise ConfigError('detectors.{}: unknown key'.format(key))
        for key in ('D1', 'D2', 'L'):
            if key not in doc:
                raise ConfigError('detectors.{}: missing'.format(key))
        return cls(doc['D1'], doc['D2'], doc['L'], doc.get('ordered', False))

    def __eq__(self, other):
        if not isinstance(other, DetectorGeometry):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return 'DetectorGeometry(D1={}, D2={}, L={!r}, ordered={})'.format(
            list(self.D1), list(self.D2), self.L, self.ordered)


def _rectangles(geom):
    """Signed rectangles whose integrals combine into the joint probability.

    Unordered: P(D1 x D2) + P(D2 x D1) - P(I x I) with I = D1 n D2. Both
    orderings are integrated, since not every model is exchange-symmetric.
    """
    if geom.ordered:
        return [(1.0, geom.D1, geom.D2)]
    rectangles = [(1.0, geom.D1, geom.D2), (1.0, geom.D2, geom.D1)]
    overlap = _intersection(geom.D1, geom.D2)
    if overlap is not None:
        rectangles.append((-1.0, overlap, overlap))
    return rectangles


def _split(interval, points):
    inner = sorted(x for x in points if interval[0] < x < interval[1])
    edges = [interval[0]] + inner + [interval[1]]
    return list(zip(edges[:-1], edges[1:]))


def _breakpoints(model, t):
    points = []
    for lo, hi in model.slit_support(t):
        points.extend([lo, hi, 0.5 * (lo + hi)])
    return points


def space_mean_joint_prob(model, geom, t_det=None, epsabs=1e-10):
    """Joint detection probability by adaptive quadrature.

    :math:`R^2` is integrated over the detector faces at `t_det`; the
    longitudinal factors integrate to one, so only the transverse density is
    needed. The faces are split at the edges and centres of the slit
    support before integrating with :func:`scipy.integrate.dblquad`.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model to integrate
    geom : :class:`DetectorGeometry`
        Detector faces
    t_det : float, optional
        Detection time; defaults to the flight time ``L / v``
    epsabs : float
        Absolute tolerance per piece

    Raises
    ------
    QuadratureNonConvergence
        if the accumulated error estimate exceeds 1e-8 or quadrature warns
    """
    if t_det is None:
        t_det = model.params.flight_time
    points = _breakpoints(model, t_det)
    total = 0.0
    error = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.integrate.IntegrationWarning)
        for sign, face1, face2 in _rectangles(geom):
            for lo1, hi1 in _split(face1, points):
                for lo2, hi2 in _split(face2, points):
                    try:
                        value, err = scipy.integrate.dblquad(
                            lambda x2, x1: model.transverse_density(x1, x2, t_det),
                            lo1, hi1, lo2, hi2, epsabs=epsabs, epsrel=1e-10)
                    except scipy.integrate.IntegrationWarning as warning:
                        raise QuadratureNonConvergence(
                            'Quadrature over [{:g}, {:g}] x [{:g}, {:g}]: {}'
                            .format(lo1, hi1, lo2, hi2, warning))
                    total += sign * value
                    error += abs(err)
    if error > QUADRATURE_TOLERANCE:
        raise QuadratureNonConvergence('Quadrature error estimate {:g} exceeds {:g}'
                                       .format(error, QUADRATURE_TOLERANCE))
    if not -QUADRATURE_TOLERANCE <= total <= 1 + QUADRATURE_TOLERANCE:
        raise QuadratureNonConvergence('Joint probability {:.12g} lies outside [0, 1]'
                                       .format(total))
    _logger.debug('Space mean %.12g (error %.3g) for %r', total, error, geom)
    return float(np.clip(total, 0.0, 1.0))


def simpson_joint_prob(model, geom, t_det=None, n=2001):
    """Fixed-grid Simpson estimate of :func:`space_mean_joint_prob`.

    Each face is sampled at `n` equally spaced points (n odd).
    """
    if t_det is None:
        t_det = model.params.flight_time
    if n < 3 or n % 2 == 0:
        raise ValueError('n must be odd and at least 3')
    total = 0.0
    for sign, face1, face2 in _rectangles(geom):
        x1 = np.linspace(face1[0], face1[1], n)
        x2 = np.linspace(face2[0], face2[1], n)
        values = model.transverse_density(x1[:, None], x2[None, :], t_det)
        inner = scipy.integrate.simpson(values, x=x2, axis=1)
        total += sign * scipy.integrate.simpson(inner, x=x1)
    return float(total)


JointEstimate = collections.namedtuple(
    'JointEstimate', 'probability standard_error lost n hits')
JointEstimate.__doc__ = """Monte Carlo joint probability.

`n` counts the trials used (lost ones excluded) and `hits` the joint
detections among them.
"""


def _arrivals(trajectories):
    """Arrival positions and lost mask from trajectories or summaries."""
    x1 = []
    x2 = []
    lost = []
    for trajectory in trajectories:
        if hasattr(trajectory, 'summary'):
            trajectory = trajectory.summary()
        final = trajectory.final
        x1.append(final[0])
        x2.append(final[2])
        lost.append(trajectory.lost or not trajectory.reached_detector)
    return np.array(x1), np.array(x2), np.array(lost, bool)


def trajectory_joint_prob(trajectories, geom):
    """Fraction of trials with a joint detection.

    Trials lost to a node, an integrator failure or that never reached the
    detector plane are excluded and counted in `lost`. The fraction is the
    trial mean of the hit indicator, with a binomial standard error.

    Parameters
    ----------
    trajectories : sequence
        :class:`~bohmergo.dynamics.Trajectory` or
        :class:`~bohmergo.dynamics.TrajectorySummary` objects
    geom : :class:`DetectorGeometry`
        Detector faces

    Returns
    -------
    JointEstimate

    Raises
    ------
    EmptyEnsemble
        if no trial is usable
    """
    x1, x2, lost = _arrivals(trajectories)
    states = np.column_stack([x1[~lost], x2[~lost]])
    if len(states) == 0:
        raise EmptyEnsemble('No trial reached the detector plane')
    probability = ergodic.trial_mean(lambda s: geom.hits(s[:, 0], s[:, 1]), states)
    n = len(states)
    se = np.sqrt(probability * (1 - probability) / n)
    hits = int(np.sum(geom.hits(states[:, 0], states[:, 1])))
    return JointEstimate(probability, float(se), int(np.sum(lost)), n, hits)


def write_arrivals_csv(f, trajectories, geom):
    """Write per-trial arrival positions as CSV (:data:`ARRIVAL_COLUMNS`).

    Lost trials have empty positions and ``hit = 0``.
    """
    x1, x2, lost = _arrivals(trajectories)
    hit = geom.hits(x1, x2) & ~lost
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(ARRIVAL_COLUMNS)
    for i in range(len(x1)):
        if lost[i]:
            writer.writerow([i, '', '', 0])
        else:
            writer.writerow([i, repr(float(x1[i])), repr(float(x2[i])), int(hit[i])])


class DetectionThresholds(object):
    """Verdict thresholds for :func:`incompatibility_report`.

    Parameters
    ----------
    incompatible_sigma : float
        Separation of the time mean from the space mean, in standard errors,
        above which they are declared incompatible
    agree_sigma : float
        Largest separation of the gibbs estimate from the space mean for the
        run to be trusted
    max_lost_fraction : float
        Largest fraction of lost trials in either ensemble
    """

    def __init__(self, incompatible_sigma=5.0, agree_sigma=3.0, max_lost_fraction=0.01):
        if not incompatible_sigma > 0:
            raise ConfigError('thresholds.incompatible_sigma: must be positive')
        if not agree_sigma > 0:
            raise ConfigError('thresholds.agree_sigma: must be positive')
        if not 0 <= max_lost_fraction < 1:
            raise ConfigError('thresholds.max_lost_fraction: must lie in [0, 1)')
        self.incompatible_sigma = float(incompatible_sigma)
        self.agree_sigma = float(agree_sigma)
        self.max_lost_fraction = float(max_lost_fraction)

    def to_dict(self):
        return collections.OrderedDict([
            ('incompatible_sigma', self.incompatible_sigma),
            ('agree_sigma', self.agree_sigma),
            ('max_lost_fraction', self.max_lost_fraction)])

    @classmethod
    def from_dict(cls, doc):
        for key in doc:
            if key not in ('incompatible_sigma', 'agree_sigma', 'max_lost_fraction'):
                raise ConfigError('thresholds.{}: unknown key'.format(key))
        return cls(**doc)

    def __eq__(self, other):
        if not isinstance(other, DetectionThresholds):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result


def _z_score(estimate, reference):
    # A zero standard error (p = 0 or 1) is floored at 1/n
    se = max(estimate.standard_error, 1.0 / estimate.n)
    return abs(estimate.probability - reference) / se


def decide(p_space, p_gibbs, p_time, thresholds):
    """Verdict from the three estimates.

    Returns
    -------
    verdict : str
    z_gibbs, z_time : float
        Separations from the space mean in standard errors
    """
    z_gibbs = _z_score(p_gibbs, p_space)
    z_time = _z_score(p_time, p_space)
    lost_fraction = max(p_gibbs.lost / (p_gibbs.lost + p_gibbs.n),
                        p_time.lost / (p_time.lost + p_time.n))
    if lost_fraction > thresholds.max_lost_fraction:
        verdict = 'inconclusive'
    elif z_gibbs > thresholds.agree_sigma:
        verdict = 'inconclusive'
    elif z_time > thresholds.incompatible_sigma:
        verdict = 'incompatible'
    else:
        verdict = 'compatible'
    return verdict, z_gibbs, z_time


class DetectionReport(object):
    """The three joint-probability estimates and the verdict.

    `p_space` is evaluated at the single time `t_det`, by default the flight
    time at which the packet centre reaches the plane. The counting estimates
    use each member's own arrival at ``y = L`` instead; the longitudinal
    packet is rigid and narrow, so arrivals spread over a few
    ``sigma_y / v`` around `t_det` and the transverse density barely changes
    over that interval.

    Attributes
    ----------
    p_space : float
        Quadrature space mean
    p_gibbs, p_time : :class:`JointEstimate`
        Counting estimates from the gibbs and constrained ensembles
    lost : int
        Lost trials over both ensembles
    verdict : str
        One of :data:`VERDICTS`
    z_gibbs, z_time : float
        Separations from `p_space` in standard errors
    t_det : float
        Time of the space mean
    """

    def __init__(self, p_space, p_gibbs, p_time, verdict, z_gibbs, z_time, geom,
                 spec_gibbs, spec_constrained, thresholds, t_det):
        if verdict not in VERDICTS:
            raise ValueError('verdict must be one of {}'.format(', '.join(VERDICTS)))
        for value in (p_space, p_gibbs.probability, p_time.probability):
            if not 0 <= value <= 1:
                raise ValueError('probabilities must lie in [0, 1]')
        self.p_space = p_space
        self.p_gibbs = p_gibbs
        self.p_time = p_time
        self.verdict = verdict
        self.z_gibbs = z_gibbs
        self.z_time = z_time
        self.geom = geom
        self.spec_gibbs = spec_gibbs
        self.spec_constrained = spec_constrained
        self.thresholds = thresholds
        self.t_det = t_det

    @property
    def lost(self):
        return self.p_gibbs.lost + self.p_time.lost

    def to_dict(self):
        doc = collections.OrderedDict()
        doc['p_space'] = self.p_space
        doc['p_gibbs'] = self.p_gibbs._asdict()
        doc['p_time'] = self.p_time._asdict()
        doc['lost'] = self.lost
        doc['z_gibbs'] = self.z_gibbs
        doc['z_time'] = self.z_time
        doc['verdict'] = self.verdict
        doc['t_det'] = self.t_det
        doc['geometry'] = self.geom.to_dict()
        doc['ensembles'] = collections.OrderedDict([
            ('gibbs', self.spec_gibbs.to_dict()),
            ('constrained', self.spec_constrained.to_dict())])
        doc['thresholds'] = self.thresholds.to_dict()
        return doc


def arrival_horizon(model):
    """Latest time by which every member should have reached ``y = L``."""
    p = model.params
    return (p.L + 10 * p.sigma_y) / p.v


def run_ensemble(model, spec, opts=None, threads=1):
    """Sample an ensemble and evolve it to the detector plane.

    Returns the list of :class:`~bohmergo.dynamics.TrajectorySummary`.
    """
    state = ensemble.sample_initial(model, spec)
    _, summaries = ensemble.evolve_ensemble(model, state, arrival_horizon(model), opts,
                                            threads, stop_at_detector=True)
    return summaries


def incompatibility_report(model, geom, spec_gibbs, spec_constrained, opts=None,
                           thresholds=None, threads=1, t_det=None, arrivals=None):
    """Run all three estimators and decide.

    The verdict is ``'inconclusive'`` when either ensemble lost more than
    ``max_lost_fraction`` of its trials or the gibbs estimate disagrees with
    the space mean by more than ``agree_sigma``; otherwise
    ``'incompatible'`` when the time mean differs from the space mean by
    more than ``incompatible_sigma``, and ``'compatible'`` if not.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model
    geom : :class:`DetectorGeometry`
        Detector faces
    spec_gibbs, spec_constrained : :class:`~bohmergo.ensemble.EnsembleSpec`
        Ensembles for the two counting estimates
    opts : :class:`~bohmergo.dynamics.IntegratorOptions`, optional
        Integrator settings
    thresholds : :class:`DetectionThresholds`, optional
        Verdict thresholds
    threads : int
        Worker threads for ensemble evolution
    t_det : float, optional
        Time for the space mean; defaults to the flight time. The counting
        estimates are not taken at `t_det` but at each member's arrival
        event (see :class:`DetectionReport`).
    arrivals : dict, optional
        If given, filled with the summaries under ``'gibbs'`` and
        ``'constrained'``
    """
    if opts is None:
        opts = IntegratorOptions()
    if thresholds is None:
        thresholds = DetectionThresholds()
    if t_det is None:
        t_det = model.params.flight_time
    geom.check_window(model, t_det)
    p_space = space_mean_joint_prob(model, geom, t_det)
    gibbs = run_ensemble(model, spec_gibbs, opts, threads)
    constrained = run_ensemble(model, spec_constrained, opts, threads)
    if arrivals is not None:
        arrivals['gibbs'] = gibbs
        arrivals['constrained'] = constrained
    p_gibbs = trajectory_joint_prob(gibbs, geom)
    p_time = trajectory_joint_prob(constrained, geom)
    verdict, z_gibbs, z_time = decide(p_space, p_gibbs, p_time, thresholds)
    report = DetectionReport(p_space, p_gibbs, p_time, verdict, z_gibbs, z_time, geom,
                             spec_gibbs, spec_constrained, thresholds, t_det)
    log = _logger.warning if verdict == 'inconclusive' else _logger.info
    log('p_space = %.6g, p_gibbs = %.6g +- %.2g, p_time = %.6g +- %.2g: %s',
        p_space, p_gibbs.probability, p_gibbs.standard_error,
        p_time.probability, p_time.standard_error, verdict)
    if p_gibbs.lost or p_time.lost:
        _logger.warning('%d gibbs and %d constrained trials lost',
                        p_gibbs.lost, p_time.lost)
    return report

