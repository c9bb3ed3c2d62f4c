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

"""Pair ensembles: sampling, evolution and the equivariance test.

Two sampling modes are supported:

``gibbs``
    independent draws from :math:`R^2(\\cdot, t_0)` (quantum equilibrium)
``constrained_pairs``
    one pair per trial with :math:`x_1 + x_2 = \\delta_n` exactly, where
    :math:`\\delta_n` fluctuates within the slit width and :math:`x_1` is
    drawn from :math:`R^2` restricted to the line :math:`x_2 = \\delta_n -
    x_1`

Sampling proceeds in fixed blocks of :data:`SAMPLE_BLOCK` members, block
``i`` drawing from ``SeedSequence(seed).spawn(n_blocks)[i]``. Evolution is
split into fixed chunks of :data:`EVOLVE_CHUNK` members that may run on a
thread pool; results are merged in member order. Neither block nor chunk
boundaries depend on the number of threads, so results are bit-identical
for any thread count.
"""

from __future__ import division, print_function
import collections
import concurrent.futures
import csv
import logging
import numbers

import six
import numpy as np
import scipy.stats

from bohmergo import (
    ConfigError, NumericalError, RejectionStall, InsufficientSamples, Configuration)
from bohmergo import dynamics


_logger = logging.getLogger(__name__)

MODES = ('gibbs', 'constrained_pairs')
DELTA_DISTRIBUTIONS = ('uniform', 'fixed')
ENSEMBLE_COLUMNS = ('member_id', 'x1', 'y1', 'x2', 'y2', 'delta_n')
#: Members per sampling block (each block has its own random stream)
SAMPLE_BLOCK = 4096
#: Members per evolution chunk
EVOLVE_CHUNK = 1024
#: Rejection proposals drawn at a time
PROPOSAL_BATCH = 65536
#: Acceptance rate below which the sampler gives up
STALL_RATE = 1e-6
#: Smallest expected count per chi-square cell
MIN_EXPECTED = 5.0
#: Gauss-Legendre order per axis for cell probabilities
CELL_ORDER = 4


class EnsembleSpec(object):
    """How to draw an ensemble.

    Parameters
    ----------
    mode : {'gibbs', 'constrained_pairs'}
        Sampling mode
    n : int
        Number of members
    seed : int
        Seed in [0, 2**64)
    constraint_width : float, optional
        Width of the interval in which :math:`\\delta_n` lies (cm). Defaults
        to the slit width of the model being sampled.
    t0 : float
        Time at which the ensemble is drawn
    delta_distribution : {'uniform', 'fixed'}
        Distribution of :math:`\\delta_n` in constrained mode
    delta_value : float
        :math:`\\delta_n` for the ``fixed`` distribution

    Raises
    ------
    ConfigError
        if a field is invalid
    """

    def __init__(self, mode='gibbs', n=1000, seed=0, constraint_width=None, t0=0.0,
                 delta_distribution='uniform', delta_value=0.0):
        if mode not in MODES:
            raise ConfigError('ensemble.mode: expected one of {}, got {!r}'
                              .format(', '.join(MODES), mode))
        if isinstance(n, bool) or not isinstance(n, six.integer_types) or n < 1:
            raise ConfigError('ensemble.n: must be a positive integer, got {!r}'.format(n))
        if isinstance(seed, bool) or not isinstance(seed, six.integer_types) \
                or not 0 <= seed < 2**64:
            raise ConfigError('ensemble.seed: must be an integer in [0, 2**64), got {!r}'
                              .format(seed))
        if constraint_width is not None and not constraint_width > 0:
            raise ConfigError('ensemble.constraint_width: must be positive')
        if not isinstance(t0, numbers.Real) or not np.isfinite(t0) or t0 < 0:
            raise ConfigError('ensemble.t0: must be finite and non-negative')
        if delta_distribution not in DELTA_DISTRIBUTIONS:
            raise ConfigError('ensemble.delta_distribution: expected one of {}, got {!r}'
                              .format(', '.join(DELTA_DISTRIBUTIONS), delta_distribution))
        if constraint_width is not None and abs(delta_value) > constraint_width / 2:
            raise ConfigError('ensemble.delta_value: |{}| exceeds half the constraint width'
                              .format(delta_value))
        self.mode = mode
        self.n = int(n)
        self.seed = int(seed)
        self.constraint_width = None if constraint_width is None else float(constraint_width)
        self.t0 = float(t0)
        self.delta_distribution = delta_distribution
        self.delta_value = float(delta_value)

    def width_for(self, model):
        """Constraint width to use with `model`.

        Raises
        ------
        ConfigError
            if the width is not in (0, a) or `delta_value` lies outside it
        """
        width = self.constraint_width if self.constraint_width is not None else model.params.d
        if not 0 < width < model.params.a:
            raise ConfigError('ensemble.constraint_width: {} must lie in (0, a = {})'
                              .format(width, model.params.a))
        if abs(self.delta_value) > width / 2:
            raise ConfigError('ensemble.delta_value: |{}| exceeds half the constraint width'
                              .format(self.delta_value))
        return width

    def replace(self, **kwargs):
        doc = self.to_dict()
        doc.update(kwargs)
        return EnsembleSpec(**doc)

    def to_dict(self):
        return collections.OrderedDict([
            ('mode', self.mode), ('n', self.n), ('seed', self.seed),
            ('constraint_width', self.constraint_width), ('t0', self.t0),
            ('delta_distribution', self.delta_distribution),
            ('delta_value', self.delta_value)])

    @classmethod
    def from_dict(cls, doc, prefix='ensemble'):
        known = set(cls().to_dict())
        for key in doc:
            if key not in known:
                raise ConfigError('{}.{}: unknown key'.format(prefix, key))
        try:
            return cls(**doc)
        except ConfigError as error:
            message = str(error)
            if prefix != 'ensemble' and message.startswith('ensemble.'):
                message = prefix + message[len('ensemble'):]
            raise ConfigError(message)

    def __eq__(self, other):
        if not isinstance(other, EnsembleSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return 'EnsembleSpec({})'.format(
            ', '.join('{}={!r}'.format(key, value) for key, value in six.iteritems(self.to_dict())))


class EnsembleState(object):
    """Snapshot of an ensemble.

    Attributes
    ----------
    positions : ndarray, shape (n, 4)
        ``(x1, y1, x2, y2)`` per member (read-only)
    times : ndarray, shape (n,)
        Time of each member's configuration. Members stopped at the detector
        plane or at a node carry their stopping time.
    deltas : ndarray, shape (n,) or (0,)
        :math:`\\delta_n = x_1 + x_2` at sampling (empty in gibbs mode)
    lost : ndarray of bool, shape (n,)
        Members lost to a node or an integrator failure
    mode : str
        Sampling mode
    seed : int
        Seed the ensemble was drawn from
    """

    def __init__(self, positions, times, deltas, mode, seed, lost=None):
        positions = np.array(positions, dtype=np.float64).reshape(-1, 4)
        times = np.broadcast_to(np.asarray(times, dtype=np.float64), (len(positions),)).copy()
        deltas = np.array(deltas, dtype=np.float64).reshape(-1)
        if lost is None:
            lost = np.zeros(len(positions), bool)
        lost = np.array(lost, dtype=bool)
        for array in (positions, times, deltas, lost):
            array.setflags(write=False)
        self.positions = positions
        self.times = times
        self.deltas = deltas
        self.lost = lost
        self.mode = mode
        self.seed = seed

    def __len__(self):
        return len(self.positions)

    @property
    def configurations(self):
        return [Configuration.from_array(q, t) for q, t in zip(self.positions, self.times)]

    @property
    def n_lost(self):
        return int(np.sum(self.lost))

    def summary(self):
        doc = collections.OrderedDict()
        doc['mode'] = self.mode
        doc['n'] = len(self)
        doc['lost'] = self.n_lost
        doc['seed'] = self.seed
        doc['t_min'] = float(np.min(self.times))
        doc['t_max'] = float(np.max(self.times))
        return doc


def write_ensemble_csv(f, state):
    """Write an ensemble snapshot as CSV (columns :data:`ENSEMBLE_COLUMNS`).

    The ``delta_n`` column is empty for gibbs ensembles.
    """
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(ENSEMBLE_COLUMNS)
    for i, q in enumerate(state.positions):
        delta = repr(float(state.deltas[i])) if len(state.deltas) else ''
        writer.writerow([i] + [repr(float(x)) for x in q] + [delta])


class _Rejection(object):
    """Accept/reject bookkeeping shared by the two sampling modes."""

    def __init__(self, what):
        self.what = what
        self.proposed = 0
        self.accepted = 0

    def update(self, proposed, accepted):
        self.proposed += proposed
        self.accepted += accepted
        if self.proposed >= 4 / STALL_RATE and self.accepted < STALL_RATE * self.proposed:
            raise RejectionStall(
                'Rejection sampling of {} accepted {} of {} proposals'
                .format(self.what, self.accepted, self.proposed))


def _uniform_on_union(rng, intervals, size):
    """Uniform draws on a union of disjoint intervals."""
    lengths = np.array([hi - lo for lo, hi in intervals])
    which = rng.choice(len(intervals), size=size, p=lengths / lengths.sum())
    lo = np.array([interval[0] for interval in intervals])[which]
    return lo + rng.random(size) * lengths[which]


def _sample_gibbs_block(model, n, t0, rng, tracker):
    support = model.slit_support(t0)
    bound = model.transverse_bound(t0)
    out = np.empty((0, 2))
    while len(out) < n:
        x1 = _uniform_on_union(rng, support, PROPOSAL_BATCH)
        x2 = _uniform_on_union(rng, support, PROPOSAL_BATCH)
        u = rng.random(PROPOSAL_BATCH) * bound
        keep = u < model.transverse_density(x1, x2, t0)
        tracker.update(PROPOSAL_BATCH, int(np.sum(keep)))
        out = np.concatenate([out, np.stack([x1[keep], x2[keep]], axis=1)])
    return out[:n, 0], out[:n, 1]


def _sample_constrained_block(model, n, t0, width, spec, rng, tracker):
    support = model.slit_support(t0)
    bound = model.transverse_bound(t0)
    # Keep |x1 + (delta - x1)| <= width / 2 after rounding
    reach = max(abs(support[0][0]), abs(support[-1][1]))
    half = width / 2 - 8 * np.finfo(np.float64).eps * reach
    if spec.delta_distribution == 'fixed':
        targets = np.full(n, spec.delta_value)
    else:
        targets = rng.uniform(-half, half, n)
    x1 = np.empty(n)
    pending = np.arange(n)
    while len(pending):
        # One proposal per pending trial per round
        reps = max(1, PROPOSAL_BATCH // len(pending))
        trial = np.repeat(pending, reps)
        proposal = _uniform_on_union(rng, support, len(trial))
        u = rng.random(len(trial)) * bound
        keep = u < model.transverse_density(proposal, targets[trial] - proposal, t0)
        tracker.update(len(trial), int(np.sum(keep)))
        accepted_trials, first = np.unique(trial[keep], return_index=True)
        x1[accepted_trials] = proposal[keep][first]
        pending = np.setdiff1d(pending, accepted_trials, assume_unique=True)
    x2 = targets - x1
    return x1, x2


def sample_initial(model, spec):
    """Draw an ensemble at ``spec.t0``.

    The longitudinal coordinates are drawn from the packet density in both
    modes. In constrained mode the stored :math:`\\delta_n` is the
    floating-point sum ``x1 + x2`` of the stored positions, so the
    constraint holds exactly.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model to sample
    spec : :class:`EnsembleSpec`
        What to draw

    Raises
    ------
    RejectionStall
        if the acceptance rate falls below :data:`STALL_RATE`
    ConfigError
        if the constraint width does not suit the model
    """
    p = model.params
    t0 = spec.t0
    constrained = spec.mode == 'constrained_pairs'
    width = spec.width_for(model) if constrained else None
    n_blocks = -(-spec.n // SAMPLE_BLOCK)
    streams = np.random.SeedSequence(spec.seed).spawn(n_blocks)
    tracker = _Rejection('{} ensemble'.format(spec.mode))
    positions = np.empty((spec.n, 4))
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        start = i * SAMPLE_BLOCK
        size = min(SAMPLE_BLOCK, spec.n - start)
        if constrained:
            x1, x2 = _sample_constrained_block(model, size, t0, width, spec, rng, tracker)
        else:
            x1, x2 = _sample_gibbs_block(model, size, t0, rng, tracker)
        block = positions[start:start + size]
        block[:, 0] = x1
        block[:, 2] = x2
        block[:, 1] = rng.normal(model.longitudinal_centre(t0), p.sigma_y, size)
        block[:, 3] = rng.normal(model.longitudinal_centre(t0), p.sigma_y, size)
    deltas = positions[:, 0] + positions[:, 2] if constrained else np.empty(0)
    _logger.info('Sampled %d %s members (acceptance %.3g)', spec.n, spec.mode,
                 tracker.accepted / max(tracker.proposed, 1))
    return EnsembleState(positions, t0, deltas, spec.mode, spec.seed)


def _evolve_chunk(model, q, t0, t_final, opts, stop_at_detector, offset):
    if opts.scheme == 'rk4_fixed':
        result = dynamics.propagate(model, q, t0, t_final, opts, stop_at_detector)
        summaries = [
            dynamics.TrajectorySummary(
                offset + i, float(q[i, 0] + q[i, 2]), result.positions[i].copy(),
                float(result.t_end[i]), float(result.drift[i]), bool(result.crossed_axis[i]),
                bool(result.node_abort[i]), bool(result.reached_detector[i]), False)
            for i in range(len(q))]
        return summaries
    summaries = []
    for i, row in enumerate(q):
        c0 = Configuration.from_array(row, t0)
        try:
            trajectory = dynamics.integrate_trajectory(model, c0, t_final, opts)
        except NumericalError as error:
            _logger.warning('Member %d failed: %s', offset + i, error)
            summaries.append(dynamics.TrajectorySummary(
                offset + i, float(row[0] + row[2]), row.copy(), t0, 0.0,
                False, False, False, True))
        else:
            summaries.append(trajectory.summary(offset + i))
    return summaries


def evolve_ensemble(model, state, t_final, opts=None, threads=1, stop_at_detector=True):
    """Integrate every member of an ensemble.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model providing the velocity field
    state : :class:`EnsembleState`
        Ensemble sampled at a common time ``t0 < t_final``
    t_final : float
        End time
    opts : :class:`~bohmergo.dynamics.IntegratorOptions`, optional
        Integrator settings
    threads : int
        Number of worker threads
    stop_at_detector : bool
        Stop members at the detector plane

    Returns
    -------
    state : :class:`EnsembleState`
        Members at their stopping time, with the `lost` mask set
    summaries : list of :class:`~bohmergo.dynamics.TrajectorySummary`
        One per member, in member order
    """
    if opts is None:
        opts = dynamics.IntegratorOptions()
    if threads < 1:
        raise ConfigError('threads: must be at least 1')
    t0 = float(state.times[0])
    if np.any(state.times != t0):
        raise ValueError('All members must start at the same time')
    if not t_final > t0:
        raise ValueError('t_final must be greater than the sampling time')
    q = np.array(state.positions)
    starts = list(range(0, len(q), EVOLVE_CHUNK))
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [
            executor.submit(_evolve_chunk, model, q[start:start + EVOLVE_CHUNK], t0, t_final,
                            opts, stop_at_detector, start)
            for start in starts]
        summaries = []
        for future in futures:
            summaries.extend(future.result())
            _logger.debug('Evolved %d of %d members', len(summaries), len(q))
    lost = np.array([summary.lost for summary in summaries], bool)
    n_lost = int(np.sum(lost))
    if n_lost:
        _logger.warning('%d of %d members lost to nodes or integrator failures',
                        n_lost, len(q))
    positions = np.array([summary.final for summary in summaries])
    times = np.array([summary.t_end for summary in summaries])
    final = EnsembleState(positions, times, state.deltas, state.mode, state.seed, lost)
    return final, summaries


class EquivarianceResult(collections.namedtuple(
        'EquivarianceResult', 'statistic p_value verdict dof n_used lost outside bins')):
    """Outcome of :func:`equivariance_test`.

    `verdict` is ``'pass'`` when ``p_value > 0.01``. `n_used` counts the
    members inside the grid; `outside` those that fell outside it.
    """

    __slots__ = ()

    def to_dict(self):
        return collections.OrderedDict(zip(self._fields, self))


def cell_probabilities(model, t, edges1, edges2):
    """Probability of each grid cell under :math:`R^2(t)`.

    Each cell is integrated with a tensor Gauss-Legendre rule of order
    :data:`CELL_ORDER`.
    """
    nodes, weights = np.polynomial.legendre.leggauss(CELL_ORDER)

    def axis_points(edges):
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        points = mid[:, None] + half[:, None] * nodes[None, :]
        return points, half[:, None] * weights[None, :]

    p1, w1 = axis_points(np.asarray(edges1, dtype=np.float64))
    p2, w2 = axis_points(np.asarray(edges2, dtype=np.float64))
    values = model.transverse_density(p1[:, None, :, None], p2[None, :, None, :], t)
    return np.einsum('ijkl,ik,jl->ij', values, w1, w2)


def pool_cells(expected, observed, minimum=MIN_EXPECTED):
    """Merge cells so that every group has an expected count of at least `minimum`.

    Cells are taken in increasing order of expected count and accumulated
    until the group reaches `minimum`; a short final group joins the one
    before it.

    Returns
    -------
    expected, observed : ndarray
        Counts per group

    Raises
    ------
    InsufficientSamples
        if fewer than two groups can be formed
    """
    expected = np.ravel(expected)
    observed = np.ravel(observed)
    order = np.argsort(expected, kind='mergesort')
    groups_e = []
    groups_o = []
    acc_e = acc_o = 0.0
    for i in order:
        acc_e += expected[i]
        acc_o += observed[i]
        if acc_e >= minimum:
            groups_e.append(acc_e)
            groups_o.append(acc_o)
            acc_e = acc_o = 0.0
    if acc_e > 0 or acc_o > 0:
        if groups_e:
            groups_e[-1] += acc_e
            groups_o[-1] += acc_o
        else:
            groups_e.append(acc_e)
            groups_o.append(acc_o)
    if len(groups_e) < 2 or groups_e[0] < minimum:
        raise InsufficientSamples(
            'Only {} group(s) reach an expected count of {}'.format(
                sum(1 for e in groups_e if e >= minimum), minimum))
    return np.array(groups_e), np.array(groups_o)


def equivariance_test(model, spec, t_final, bins=50, opts=None, threads=1):
    """Chi-square test of an evolved gibbs ensemble against :math:`R^2(t)`.

    The members are sampled according to `spec`, evolved to `t_final`
    (without stopping at the detector plane) and histogrammed on a
    ``bins`` by ``bins`` grid over the transverse window at `t_final`.
    Expected counts come from :func:`cell_probabilities`, renormalized to the
    members inside the grid, and sparse cells are pooled with
    :func:`pool_cells`.

    Raises
    ------
    ConfigError
        unless ``spec.mode`` is ``'gibbs'``
    InsufficientSamples
        if the pooled expected counts cannot reach the minimum
    """
    if spec.mode != 'gibbs':
        raise ConfigError('ensemble.mode: the equivariance test needs a gibbs ensemble')
    if isinstance(bins, bool) or not isinstance(bins, six.integer_types) or bins < 1:
        raise ConfigError('equivariance.bins: must be a positive integer')
    state = sample_initial(model, spec)
    if t_final > spec.t0:
        state, _ = evolve_ensemble(model, state, t_final, opts, threads,
                                   stop_at_detector=False)
    elif t_final < spec.t0:
        raise ValueError('t_final precedes the sampling time')
    kept = state.positions[~state.lost]
    lo, hi = model.transverse_window(t_final)
    edges = np.linspace(lo, hi, bins + 1)
    observed, _, _ = np.histogram2d(kept[:, 0], kept[:, 2], bins=[edges, edges])
    n_used = int(observed.sum())
    probabilities = cell_probabilities(model, t_final, edges, edges)
    expected = probabilities * (n_used / probabilities.sum())
    pooled_e, pooled_o = pool_cells(expected, observed)
    pooled_e *= pooled_o.sum() / pooled_e.sum()
    statistic, p_value = scipy.stats.chisquare(pooled_o, pooled_e)
    verdict = 'pass' if p_value > 0.01 else 'fail'
    result = EquivarianceResult(float(statistic), float(p_value), verdict, len(pooled_e) - 1,
                                n_used, state.n_lost, len(kept) - n_used, bins)
    log = _logger.info if verdict == 'pass' else _logger.warning
    log('Equivariance at t = %g: chi2 = %.4g on %d dof, p = %.4g (%s)',
        t_final, result.statistic, result.dof, result.p_value, verdict)
    return result
