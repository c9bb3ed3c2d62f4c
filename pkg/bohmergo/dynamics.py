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

"""Bohmian trajectory integration.

Particles move with the guidance law :math:`\\dot q = \\nabla S / m`. Two
schemes are available:

``rk4_fixed``
    classical fourth-order Runge-Kutta with a fixed step, vectorized over any
    number of members (:func:`propagate`). Between steps the path is
    represented by the cubic Hermite interpolant of positions and velocities,
    which is used to locate the detector-plane event and to look for axis
    crossings inside a step.
``rk45_adaptive``
    :func:`scipy.integrate.solve_ivp` with the Dormand-Prince pair, event
    location and dense output, one trajectory at a time.

A member whose density falls below the node floor is aborted and flagged,
never continued.
"""

from __future__ import division, print_function
import collections
import csv
import logging
import math

import six
import numpy as np
import scipy.integrate

from bohmergo import (
    ConfigError, NodeError, StepUnderflow, Configuration, check_configuration)


_logger = logging.getLogger(__name__)

SCHEMES = ('rk4_fixed', 'rk45_adaptive')
TRAJECTORY_COLUMNS = ('t', 'x1', 'y1', 'x2', 'y2', 'sum_x', 'flag_node', 'flag_cross')
#: Interior points of each step at which the dense output is checked for crossings
CROSSING_PROBES = 8
#: Bisection iterations for the detector-plane event (fraction of a step)
EVENT_BISECTIONS = 60


class IntegratorOptions(object):
    """Integrator settings.

    Parameters
    ----------
    scheme : {'rk4_fixed', 'rk45_adaptive'}
        Integration scheme
    abs_tol : float
        Absolute tolerance for ``rk45_adaptive``, in units of ``sigma0`` for
        transverse and ``L`` for longitudinal coordinates
    rel_tol : float
        Relative tolerance for ``rk45_adaptive``
    max_step : float, optional
        Largest step (s). For ``rk4_fixed`` this is the step; if omitted,
        the flight time divided by `n_steps` is used.
    n_steps : int
        Steps per flight time for ``rk4_fixed`` when `max_step` is omitted
    node_density_floor : float, optional
        Density below which a member is aborted. Defaults to the model's
        :attr:`~bohmergo.wavefunction.TwoParticleWaveFunction.node_floor`.
    min_step : float
        Smallest adaptive step before :exc:`~bohmergo.StepUnderflow`

    Raises
    ------
    ConfigError
        if the scheme is unknown or a tolerance is not positive
    """

    def __init__(self, scheme='rk4_fixed', abs_tol=1e-10, rel_tol=1e-10, max_step=None,
                 n_steps=1000, node_density_floor=None, min_step=1e-18):
        if scheme not in SCHEMES:
            raise ConfigError('integrator.scheme: expected one of {}, got {!r}'
                              .format(', '.join(SCHEMES), scheme))
        for name, value in [('abs_tol', abs_tol), ('rel_tol', rel_tol), ('min_step', min_step)]:
            if not value > 0:
                raise ConfigError('integrator.{}: must be positive'.format(name))
        if max_step is not None and not max_step > 0:
            raise ConfigError('integrator.max_step: must be positive')
        if not isinstance(n_steps, six.integer_types) or n_steps < 1:
            raise ConfigError('integrator.n_steps: must be a positive integer')
        if node_density_floor is not None and not node_density_floor >= 0:
            raise ConfigError('integrator.node_density_floor: must be non-negative')
        self.scheme = scheme
        self.abs_tol = float(abs_tol)
        self.rel_tol = float(rel_tol)
        self.max_step = None if max_step is None else float(max_step)
        self.n_steps = int(n_steps)
        self.node_density_floor = None if node_density_floor is None else float(node_density_floor)
        self.min_step = float(min_step)

    def step_size(self, model):
        if self.max_step is not None:
            return self.max_step
        return model.params.flight_time / self.n_steps

    def node_floor(self, model):
        if self.node_density_floor is not None:
            return self.node_density_floor
        return model.node_floor

    def replace(self, **kwargs):
        doc = self.to_dict()
        doc.update(kwargs)
        return IntegratorOptions(**doc)

    def to_dict(self):
        return collections.OrderedDict([
            ('scheme', self.scheme), ('abs_tol', self.abs_tol), ('rel_tol', self.rel_tol),
            ('max_step', self.max_step), ('n_steps', self.n_steps),
            ('node_density_floor', self.node_density_floor), ('min_step', self.min_step)])

    @classmethod
    def from_dict(cls, doc):
        unknown = set(doc) - set(cls().to_dict())
        if unknown:
            raise ConfigError('integrator.{}: unknown key'.format(sorted(unknown)[0]))
        return cls(**doc)

    def __eq__(self, other):
        if not isinstance(other, IntegratorOptions):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result


class Trajectory(object):
    """Time-stamped pair configurations with diagnostic flags.

    The arrays are read-only. `velocities` holds :math:`\\dot q` at each
    sample, which together with `positions` defines the cubic Hermite dense
    output used by :func:`crossing_check`.

    Attributes
    ----------
    times : ndarray, shape (n,)
        Strictly increasing sample times
    positions : ndarray, shape (n, 4)
        ``(x1, y1, x2, y2)`` at each sample
    velocities : ndarray, shape (n, 4)
        Velocities at each sample
    delta0 : float
        :math:`x_1(0) + x_2(0)`
    crossed_axis : bool
        Whether :math:`x_1 - x_2` changed sign (the pair crossed its own
        mirror axis)
    node_abort : bool
        Integration stopped at a node
    reached_detector : bool
        Integration stopped at the detector plane
    cross_flags : ndarray of bool, shape (n,)
        Running value of `crossed_axis` at each sample
    """

    def __init__(self, times, positions, velocities, crossed_axis=False, node_abort=False,
                 reached_detector=False, cross_flags=None):
        times = np.array(times, dtype=np.float64)
        positions = np.array(positions, dtype=np.float64).reshape(-1, 4)
        velocities = np.array(velocities, dtype=np.float64).reshape(-1, 4)
        if len(times) < 1:
            raise ValueError('A trajectory needs at least one sample')
        if positions.shape[0] != len(times) or velocities.shape[0] != len(times):
            raise ValueError('times, positions and velocities have different lengths')
        if np.any(np.diff(times) <= 0):
            raise ValueError('Trajectory times must be strictly increasing')
        if cross_flags is None:
            cross_flags = np.zeros(len(times), bool)
            cross_flags[-1] = crossed_axis
        cross_flags = np.array(cross_flags, dtype=bool)
        for array in (times, positions, velocities, cross_flags):
            array.setflags(write=False)
        self.times = times
        self.positions = positions
        self.velocities = velocities
        self.cross_flags = cross_flags
        self.delta0 = float(positions[0, 0] + positions[0, 2])
        self.crossed_axis = bool(crossed_axis)
        self.node_abort = bool(node_abort)
        self.reached_detector = bool(reached_detector)

    def __len__(self):
        return len(self.times)

    @property
    def sum_series(self):
        return self.positions[:, 0] + self.positions[:, 2]

    @property
    def samples(self):
        return [(t, Configuration.from_array(q, t)) for t, q in zip(self.times, self.positions)]

    @property
    def final(self):
        return Configuration.from_array(self.positions[-1], self.times[-1])

    def to_rows(self):
        """Rows in the :data:`TRAJECTORY_COLUMNS` order."""
        rows = []
        last = len(self.times) - 1
        for i, (t, q) in enumerate(zip(self.times, self.positions)):
            node = int(self.node_abort and i == last)
            rows.append([t, q[0], q[1], q[2], q[3], q[0] + q[2], node, int(self.cross_flags[i])])
        return rows

    def summary(self, member_id=0):
        return TrajectorySummary(
            member_id, self.delta0, self.positions[-1].copy(), float(self.times[-1]),
            sum_invariant_drift(self), self.crossed_axis, self.node_abort,
            self.reached_detector, False)


class TrajectorySummary(collections.namedtuple(
        'TrajectorySummary',
        'member_id delta0 final t_end drift crossed_axis node_abort reached_detector failed')):
    """End state and flags of one ensemble member.

    `final` is the ``(x1, y1, x2, y2)`` array at `t_end`; `failed` is set
    when the integrator raised for this member.
    """

    __slots__ = ()

    @property
    def lost(self):
        return self.node_abort or self.failed


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_trajectories_csv(f, trajectories):
    """Write trajectories to an open text file as CSV.

    With a single trajectory the columns are :data:`TRAJECTORY_COLUMNS`;
    otherwise a leading ``traj_id`` column is added.
    """
    writer = csv.writer(f, lineterminator='\n')
    concatenated = len(trajectories) != 1
    header = list(TRAJECTORY_COLUMNS)
    if concatenated:
        header.insert(0, 'traj_id')
    writer.writerow(header)
    for traj_id, trajectory in enumerate(trajectories):
        for row in trajectory.to_rows():
            row = [_format(float(value)) if i < 6 else value for i, value in enumerate(row)]
            if concatenated:
                row.insert(0, traj_id)
            writer.writerow(row)


def velocity(model, c, floor=None):
    """Bohmian velocity :math:`\\nabla S / m` at a configuration.

    Raises
    ------
    NodeError
        if :math:`R^2` is below the node floor
    """
    check_configuration(c)
    q = c.as_array()
    if floor is None:
        floor = model.node_floor
    rho = model.density(q, c.t)
    if not rho >= floor:
        raise NodeError('Density {:g} below node floor {:g} at {}'.format(rho, floor, c))
    return model.velocity(q, c.t)


def _hermite(q0, v0, q1, v1, h, s):
    """Cubic Hermite interpolant at fractions `s` of a step of length `h`.

    `q0` etc. have shape (n, k); `s` has shape (n,) or (n, 1).
    """
    s = np.asarray(s).reshape(-1, 1)
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    h = np.asarray(h).reshape(-1, 1)
    return h00 * q0 + h10 * h * v0 + h01 * q1 + h11 * h * v1


def _hermite_crosses(u0, du0, u1, du1, h):
    """Whether a scalar Hermite segment changes sign anywhere in the step."""
    n = len(u0)
    sign0 = np.sign(u0)
    crossed = (np.sign(u1) * sign0) < 0
    for j in range(1, CROSSING_PROBES):
        s = np.full(n, j / CROSSING_PROBES)
        u = _hermite(u0[:, None], du0[:, None], u1[:, None], du1[:, None], h, s)[:, 0]
        crossed |= (np.sign(u) * sign0) < 0
    return crossed


def _locate_arrival(q0, v0, q1, v1, h, L):
    """Fraction of the step at which min(y1, y2) reaches L, by bisection."""
    n = len(q0)
    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(EVENT_BISECTIONS):
        mid = 0.5 * (lo + hi)
        q = _hermite(q0, v0, q1, v1, h, mid)
        below = np.minimum(q[:, 1], q[:, 3]) < L
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return hi


class PropagationResult(object):
    """Outcome of :func:`propagate` for an (n, 4) batch.

    Attributes
    ----------
    positions, velocities : ndarray, shape (n, 4)
        State at `t_end`
    t_end : ndarray, shape (n,)
        Time at which each member stopped
    node_abort, reached_detector, crossed_axis : ndarray of bool
        Per-member flags
    drift : ndarray, shape (n,)
        Largest :math:`|x_1 + x_2 - \\delta_0|` over the accepted steps
    record : list or None
        When recording, one ``(times, positions, velocities, cross_flags)``
        tuple per member
    """

    def __init__(self, positions, velocities, t_end, node_abort, reached_detector,
                 crossed_axis, drift, record=None):
        self.positions = positions
        self.velocities = velocities
        self.t_end = t_end
        self.node_abort = node_abort
        self.reached_detector = reached_detector
        self.crossed_axis = crossed_axis
        self.drift = drift
        self.record = record


def propagate(model, q0, t0, t1, opts=None, stop_at_detector=True, record=False):
    """Advance a batch of configurations with fixed-step RK4.

    All members share the time grid. A member stops early when its density
    drops below the node floor (its last accepted state is kept), or, with
    `stop_at_detector`, when :math:`\\min(y_1, y_2)` reaches ``L``; the
    event time is located on the Hermite dense output by bisection.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model providing the velocity field
    q0 : array-like, shape (n, 4)
        Initial configurations at `t0`
    t0, t1 : float
        Start and end time, ``t1 > t0``
    opts : :class:`IntegratorOptions`, optional
        Step size and node floor
    stop_at_detector : bool
        Stop members at the detector plane
    record : bool
        Keep every accepted step (memory grows with n times steps)

    Returns
    -------
    PropagationResult
    """
    if opts is None:
        opts = IntegratorOptions()
    if not t1 > t0:
        raise ValueError('t1 must be greater than t0')
    q = np.array(q0, dtype=np.float64).reshape(-1, 4)
    n = len(q)
    L = model.params.L
    floor = opts.node_floor(model)
    n_steps = max(1, int(math.ceil((t1 - t0) / opts.step_size(model) - 1e-9)))
    h = (t1 - t0) / n_steps

    delta0 = q[:, 0] + q[:, 2]
    t_end = np.full(n, float(t1))
    node = ~(model.density(q, t0) >= floor)
    with np.errstate(invalid='ignore', divide='ignore'):
        v = model.velocity(q, t0)
    node |= ~np.all(np.isfinite(v), axis=1)
    v[node] = 0.0
    t_end[node] = t0
    arrived = np.zeros(n, bool)
    if stop_at_detector:
        arrived = ~node & (np.minimum(q[:, 1], q[:, 3]) >= L)
        t_end[arrived] = t0
    crossed = np.zeros(n, bool)
    drift = np.zeros(n)
    active = ~(node | arrived)
    if record:
        history = [[(t0, q[i].copy(), v[i].copy(), False)] for i in range(n)]

    for step in range(n_steps):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        t = t0 + step * h
        t_next = t0 + (step + 1) * h
        qa = q[idx]
        k1 = v[idx]
        with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
            k2 = model.velocity(qa + 0.5 * h * k1, t + 0.5 * h)
            k3 = model.velocity(qa + 0.5 * h * k2, t + 0.5 * h)
            k4 = model.velocity(qa + h * k3, t_next)
            q_new = qa + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            v_new = model.velocity(q_new, t_next)
        finite = (np.all(np.isfinite(k2), axis=1) & np.all(np.isfinite(k3), axis=1)
                  & np.all(np.isfinite(k4), axis=1) & np.all(np.isfinite(v_new), axis=1))
        bad = ~finite | ~(model.density(q_new, t_next) >= floor)
        if np.any(bad):
            hit = idx[bad]
            node[hit] = True
            t_end[hit] = t
            active[hit] = False
            _logger.debug('%d member(s) stopped at a node near t = %g', len(hit), t)
        good = ~bad
        idx = idx[good]
        qa = qa[good]
        k1 = k1[good]
        q_new = q_new[good]
        v_new = v_new[good]

        u0 = qa[:, 0] - qa[:, 2]
        u1 = q_new[:, 0] - q_new[:, 2]
        step_crossed = _hermite_crosses(u0, k1[:, 0] - k1[:, 2], u1,
                                        v_new[:, 0] - v_new[:, 2], np.full(len(idx), h))

        if stop_at_detector:
            hits = np.minimum(q_new[:, 1], q_new[:, 3]) >= L
        else:
            hits = np.zeros(len(idx), bool)
        if np.any(hits):
            sel = np.flatnonzero(hits)
            hh = np.full(len(sel), h)
            s = _locate_arrival(qa[sel], k1[sel], q_new[sel], v_new[sel], hh, L)
            q_event = _hermite(qa[sel], k1[sel], q_new[sel], v_new[sel], hh, s)
            # Event times stay strictly after the step start
            t_event = np.maximum(t + s * h, np.nextafter(t, np.inf))
            with np.errstate(invalid='ignore', divide='ignore'):
                v_event = model.velocity(q_event, t_event)
            q_new[sel] = q_event
            v_new[sel] = v_event
            t_end[idx[sel]] = t_event
            arrived[idx[sel]] = True
            active[idx[sel]] = False

        q[idx] = q_new
        v[idx] = v_new
        crossed[idx] |= step_crossed
        drift[idx] = np.maximum(drift[idx], np.abs(q_new[:, 0] + q_new[:, 2] - delta0[idx]))
        if record:
            for j, i in enumerate(idx):
                history[i].append((t_end[i] if hits[j] else t_next, q_new[j].copy(),
                                   v_new[j].copy(), bool(crossed[i])))

    result = PropagationResult(q, v, t_end, node, arrived, crossed, drift)
    if record:
        result.record = []
        for entries in history:
            times, positions, velocities, flags = zip(*entries)
            result.record.append((np.array(times), np.array(positions),
                                  np.array(velocities), np.array(flags)))
    return result


def _integrate_fixed(model, c0, t_final, opts):
    result = propagate(model, c0.as_array()[None, :], c0.t, t_final, opts, record=True)
    times, positions, velocities, flags = result.record[0]
    return Trajectory(times, positions, velocities,
                      crossed_axis=result.crossed_axis[0],
                      node_abort=result.node_abort[0],
                      reached_detector=result.reached_detector[0],
                      cross_flags=flags)


def _integrate_adaptive(model, c0, t_final, opts):
    p = model.params
    floor = opts.node_floor(model)

    def fun(t, y):
        with np.errstate(invalid='ignore', divide='ignore'):
            return model.velocity(y, t)

    def arrival(t, y):
        return min(y[1], y[3]) - p.L
    arrival.terminal = True
    arrival.direction = 1

    def node(t, y):
        return model.density(y, t) - floor
    node.terminal = True
    node.direction = -1

    q0 = c0.as_array()
    if not model.density(q0, c0.t) >= floor:
        return Trajectory([c0.t], [q0], [np.zeros(4)], node_abort=True)
    if min(q0[1], q0[3]) >= p.L:
        return Trajectory([c0.t], [q0], [model.velocity(q0, c0.t)], reached_detector=True)
    atol = opts.abs_tol * np.array([p.sigma0, p.L, p.sigma0, p.L])
    solution = scipy.integrate.solve_ivp(
        fun, (c0.t, t_final), q0, method='RK45', dense_output=True,
        events=[arrival, node], rtol=opts.rel_tol, atol=atol,
        max_step=opts.max_step if opts.max_step is not None else np.inf)
    if solution.status == -1:
        raise StepUnderflow('Integration from {} failed: {}'.format(c0, solution.message))
    times = solution.t
    positions = solution.y.T
    # The last step may be cut short by an event
    steps = np.diff(times)[:-1]
    if len(steps) and np.min(steps) < opts.min_step:
        raise StepUnderflow('Adaptive step fell below {:g} s'.format(opts.min_step))
    node_abort = len(solution.t_events[1]) > 0
    reached = len(solution.t_events[0]) > 0
    with np.errstate(invalid='ignore', divide='ignore'):
        velocities = model.velocity(positions, times)
    if node_abort:
        velocities[-1] = 0.0

    flags = np.zeros(len(times), bool)
    crossed = False
    u = positions[:, 0] - positions[:, 2]
    for i in range(1, len(times)):
        probes = np.linspace(times[i - 1], times[i], CROSSING_PROBES + 1)
        dense = solution.sol(probes)
        values = np.concatenate([[u[i - 1]], dense[0] - dense[2], [u[i]]])
        signs = np.sign(values[values != 0])
        if len(signs) and np.any(signs != signs[0]):
            crossed = True
        flags[i] = crossed
    return Trajectory(times, positions, velocities, crossed_axis=crossed,
                      node_abort=node_abort, reached_detector=reached, cross_flags=flags)


def integrate_trajectory(model, c0, t_final, opts=None):
    """Integrate one Bohmian pair trajectory.

    The trajectory ends at `t_final`, at the detector plane (when both
    :math:`y_i \\geq L`), or at a node, whichever comes first.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`
        Model providing the velocity field
    c0 : :class:`~bohmergo.Configuration`
        Initial configuration
    t_final : float
        Time at which to stop if nothing else happens
    opts : :class:`IntegratorOptions`, optional
        Scheme and tolerances

    Raises
    ------
    ValueError
        if `t_final` does not exceed ``c0.t``
    StepUnderflow
        if the adaptive step collapses
    """
    check_configuration(c0)
    if opts is None:
        opts = IntegratorOptions()
    if not t_final > c0.t:
        raise ValueError('t_final must be greater than the initial time')
    if opts.scheme == 'rk45_adaptive':
        trajectory = _integrate_adaptive(model, c0, t_final, opts)
    else:
        trajectory = _integrate_fixed(model, c0, t_final, opts)
    if trajectory.node_abort:
        _logger.warning('Trajectory from %s stopped at a node at t = %g', c0, trajectory.times[-1])
    return trajectory


def sum_invariant_drift(traj):
    """Largest :math:`|x_1(t) + x_2(t) - \\delta_0|` along a trajectory."""
    if len(traj) < 1:
        raise ValueError('Empty trajectory')
    return float(np.max(np.abs(traj.sum_series - traj.delta0)))


def crossing_check(traj, axis_x):
    """Whether particle 1 crosses the line ``x = axis_x``.

    The sign of :math:`x_1 - x_{axis}` is examined at every sample and at
    interior points of each step on the cubic Hermite dense output.

    Raises
    ------
    ValueError
        if the trajectory has fewer than two samples
    """
    if len(traj) < 2:
        raise ValueError('crossing_check needs at least two samples')
    u = traj.positions[:, 0] - axis_x
    du = traj.velocities[:, 0]
    h = np.diff(traj.times)
    crossed = _hermite_crosses(u[:-1], du[:-1], u[1:], du[1:], h)
    signs = np.sign(u[u != 0])
    return bool(np.any(crossed) or (len(signs) and np.any(signs != signs[0])))
