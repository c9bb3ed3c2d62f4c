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

"""Time means, space means and decomposability of discrete dynamical systems.

A :class:`DynamicalSystem` is a map :math:`\\phi` on a box domain together
with an invariant measure :math:`\\mu`. The time mean of a bounded
observable along an orbit is

.. math:: f^*(x_0) = \\frac{1}{N} \\sum_{n=0}^{N-1} f(\\phi^n x_0)

and its space mean is :math:`\\bar f = \\int f\\,d\\mu`. A system is
ergodic when the two agree for every observable and almost every start, and
decomposable when the domain splits into two invariant sets of positive
measure. Finite data can only be *consistent* with ergodicity, so
:func:`ergodicity_test` returns one of ``'ergodic'``, ``'decomposable'``
or ``'inconclusive'``, and it only says ``'decomposable'`` when it holds an
invariant indicator that :func:`decomposability_test` has checked.

Three fixture systems are shipped, selectable with :func:`get_system`:
``rotation``, ``two_piece`` and ``bohm_pair``.
"""

from __future__ import division, print_function
import collections
import concurrent.futures
import logging
import warnings

import six
import numpy as np
import scipy.integrate

from bohmergo import (
    ConfigError, DivergentOrbit, EmptyEnsemble, QuadratureNonConvergence)


_logger = logging.getLogger(__name__)

VERDICTS = ('ergodic', 'decomposable', 'inconclusive')
#: Golden-ratio rotation angle
GOLDEN = (np.sqrt(5.0) - 1) / 2
#: Orbit points generated at a time
ORBIT_BLOCK = 65536


class DynamicalSystem(object):
    """A map with an invariant measure on a box domain.

    Parameters
    ----------
    name : str
        Name used in reports
    dimension : int
        State dimension
    step : callable
        :math:`\\phi`, mapping an array of states of shape (n, dimension) to
        the next states
    density : callable or None
        Density of :math:`\\mu` on arrays of states; ``None`` if the measure
        can only be sampled
    sample : callable
        ``sample(rng, n)`` returning n states drawn from :math:`\\mu`
    bounds : sequence of (lo, hi)
        Box domain, one interval per coordinate (infinite ends allowed)
    pieces : list of boxes, optional
        Boxes covering the support of :math:`\\mu`, used for quadrature and
        for per-piece sampling. Defaults to ``[bounds]``.
    orbit : callable, optional
        ``orbit(x0, start, count)`` returning :math:`\\phi^n x_0` for ``n``
        in ``[start, start + count)`` in closed form
    observables : mapping, optional
        Named bounded observables, each mapping (n, dimension) arrays to n
        values
    indicators : mapping, optional
        Named candidate invariant indicators, each returning booleans
    starts : array-like, optional
        Default initial states, shape (k, dimension)
    default_N : int
        Default orbit length
    """

    def __init__(self, name, dimension, step, density, sample, bounds, pieces=None,
                 orbit=None, observables=None, indicators=None, starts=None, default_N=1000):
        if len(bounds) != dimension:
            raise ValueError('bounds must have one interval per dimension')
        self.name = name
        self.dimension = dimension
        self.step = step
        self.density = density
        self.sample = sample
        self.bounds = [tuple(b) for b in bounds]
        self.pieces = [list(map(tuple, piece)) for piece in (pieces or [bounds])]
        self.orbit = orbit
        self.observables = collections.OrderedDict(observables or {})
        self.indicators = collections.OrderedDict(indicators or {})
        self.starts = None if starts is None else np.asarray(starts, dtype=np.float64)
        self.default_N = default_N

    def in_domain(self, x):
        x = np.asarray(x).reshape(-1, self.dimension)
        inside = np.all(np.isfinite(x), axis=1)
        for i, (lo, hi) in enumerate(self.bounds):
            inside &= (x[:, i] >= lo) & (x[:, i] <= hi)
        return inside

    def in_piece(self, x, piece):
        x = np.asarray(x).reshape(-1, self.dimension)
        inside = np.ones(len(x), bool)
        for i, (lo, hi) in enumerate(piece):
            inside &= (x[:, i] >= lo) & (x[:, i] <= hi)
        return inside

    def resolve(self, f):
        """Look up a named observable or indicator; callables pass through."""
        if callable(f):
            return f
        if f in self.observables:
            return self.observables[f]
        if f in self.indicators:
            indicator = self.indicators[f]
            return lambda x: indicator(x).astype(np.float64)
        raise ConfigError('ergodic.functions: {!r} is not defined for system {!r}'
                          .format(f, self.name))


TimeMean = collections.namedtuple('TimeMean', 'value tail_variation last_step n')
TimeMean.__doc__ = """Result of :func:`time_mean`.

`tail_variation` is the largest :math:`|A_k - A_N|` over
:math:`N/2 \\leq k \\leq N`, where :math:`A_k` is the mean of the first k
terms; `last_step` is :math:`|A_N - A_{N-1}|`.
"""

SpaceMean = collections.namedtuple('SpaceMean', 'value error method')


def _orbit_blocks(sys, x0, N):
    """Yield consecutive blocks of the orbit of `x0` (N points in total)."""
    start = 0
    x = np.asarray(x0, dtype=np.float64).reshape(1, sys.dimension)
    while start < N:
        count = min(ORBIT_BLOCK, N - start)
        if sys.orbit is not None:
            block = np.asarray(sys.orbit(x[0], start, count)).reshape(count, sys.dimension)
        else:
            block = np.empty((count, sys.dimension))
            for i in range(count):
                if start + i > 0:
                    x = np.asarray(sys.step(x)).reshape(1, sys.dimension)
                block[i] = x[0]
        bad = ~sys.in_domain(block)
        if np.any(bad):
            n = start + int(np.flatnonzero(bad)[0])
            raise DivergentOrbit('Orbit of {} left the domain of {} at step {}'
                                 .format(np.ravel(x0).tolist(), sys.name, n))
        yield block
        start += count


def time_mean(sys, f, x0, N):
    """Time mean of `f` along the orbit of `x0`.

    The sum is accumulated relative to :math:`f(x_0)`, so a constant
    sequence gives :math:`f(x_0)` exactly.

    Parameters
    ----------
    sys : :class:`DynamicalSystem`
        System to iterate
    f : callable or str
        Observable, or the name of one of the system's observables
    x0 : array-like
        Initial state
    N : int
        Number of orbit points

    Returns
    -------
    TimeMean

    Raises
    ------
    DivergentOrbit
        if the orbit leaves the domain or `f` is not finite on it
    """
    if N < 1:
        raise ValueError('N must be at least 1')
    f = sys.resolve(f)
    tail_start = (N + 1) // 2
    total = 0.0
    reference = None
    previous = current = None
    tail_lo = np.inf
    tail_hi = -np.inf
    index = 0
    for block in _orbit_blocks(sys, x0, N):
        values = np.asarray(f(block), dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise DivergentOrbit('Observable is not finite along the orbit of {}'
                                 .format(np.ravel(x0).tolist()))
        if reference is None:
            reference = values[0]
        sums = total + np.cumsum(values - reference)
        k = np.arange(index + 1, index + len(values) + 1)
        means = reference + sums / k
        tail = means[k >= tail_start]
        if len(tail):
            tail_lo = min(tail_lo, tail.min())
            tail_hi = max(tail_hi, tail.max())
        if len(means) >= 2:
            previous = means[-2]
        elif current is not None:
            previous = current
        current = means[-1]
        total = sums[-1]
        index += len(values)
    tail_variation = max(abs(tail_hi - current), abs(current - tail_lo))
    last_step = abs(current - previous) if previous is not None else 0.0
    return TimeMean(float(current), float(tail_variation), float(last_step), N)


def _quadrature(sys, f, epsabs):
    total = 0.0
    error = 0.0
    if sys.dimension > 2:
        raise ConfigError('ergodic.method: quadrature needs dimension <= 2, not {}'
                          .format(sys.dimension))

    def integrand(*x):
        state = np.array(x, dtype=np.float64).reshape(1, sys.dimension)
        return float(f(state)[0] * sys.density(state)[0])

    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.integrate.IntegrationWarning)
        for piece in sys.pieces:
            try:
                value, err = scipy.integrate.nquad(
                    integrand, piece, opts={'epsabs': epsabs, 'epsrel': 1e-10, 'limit': 200})
            except scipy.integrate.IntegrationWarning as warning:
                raise QuadratureNonConvergence('Space mean on {}: {}'.format(piece, warning))
            total += value
            error += err
    if error > 100 * epsabs:
        raise QuadratureNonConvergence('Space mean error {:g} exceeds {:g}'
                                       .format(error, 100 * epsabs))
    return SpaceMean(total, error, 'quadrature')


def space_mean(sys, f, method='quadrature', n=100000, seed=0, epsabs=1e-10):
    """Space mean :math:`\\int f\\,d\\mu` with an error estimate.

    Parameters
    ----------
    sys : :class:`DynamicalSystem`
        System whose invariant measure is used
    f : callable or str
        Observable
    method : {'quadrature', 'monte_carlo'}
        ``quadrature`` integrates ``f * density`` over each piece with
        :func:`scipy.integrate.nquad` (dimension at most 2);
        ``monte_carlo`` averages `f` over `n` samples of the measure and
        reports the standard error.
    n : int
        Number of samples for ``monte_carlo``
    seed : int
        Seed for ``monte_carlo``
    epsabs : float
        Absolute tolerance for ``quadrature``

    Raises
    ------
    QuadratureNonConvergence
        if quadrature does not converge
    """
    f = sys.resolve(f)
    if method == 'quadrature':
        if sys.density is None:
            raise ConfigError('ergodic.method: system {!r} has no density; use monte_carlo'
                              .format(sys.name))
        return _quadrature(sys, f, epsabs)
    elif method == 'monte_carlo':
        if n < 2:
            raise ValueError('n must be at least 2')
        rng = np.random.default_rng(seed)
        values = np.asarray(f(sys.sample(rng, n)), dtype=np.float64)
        return SpaceMean(float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(n)),
                         'monte_carlo')
    else:
        raise ConfigError('ergodic.method: unknown method {!r}'.format(method))


def trial_mean(f, states):
    """Mean of `f` over a sequence of independent trials.

    This is the time mean read over trials rather than iterates: each row of
    `states` is the state of one trial.

    Raises
    ------
    EmptyEnsemble
        if there are no states
    """
    states = np.asarray(states, dtype=np.float64)
    if len(states) == 0:
        raise EmptyEnsemble('No trials to average over')
    return float(np.mean(np.asarray(f(states), dtype=np.float64)))


DecomposabilityResult = collections.namedtuple(
    'DecomposabilityResult', 'indicator invariant max_violation n_violations n_orbits measure')
DecomposabilityResult.__doc__ = """Result of :func:`decomposability_test`.

`max_violation` is the fraction of sampled orbits whose indicator value
changed; `measure` is the fraction of sampled states on which the indicator
is true.
"""


def _sample_piece(sys, piece, n, rng):
    out = []
    have = 0
    for _ in range(1000):
        states = np.asarray(sys.sample(rng, max(n, 16)), dtype=np.float64)
        states = states[sys.in_piece(states, piece)]
        out.append(states)
        have += len(states)
        if have >= n:
            return np.concatenate(out)[:n]
    raise EmptyEnsemble('Could not sample {} states in piece {} of {}'.format(n, piece, sys.name))


def decomposability_test(sys, indicator, n_samples, n_steps, seed=0):
    """Check whether an indicator is invariant along orbits.

    `n_samples` states are drawn from the invariant measure in each piece and
    iterated `n_steps` times; the indicator is invariant when no orbit
    changes its value.

    Parameters
    ----------
    sys : :class:`DynamicalSystem`
        System to iterate
    indicator : callable or str
        Boolean function of states, or the name of one of the system's
        indicators
    n_samples : int
        States per piece
    n_steps : int
        Iterations per state
    seed : int
        Seed for sampling
    """
    name = indicator if isinstance(indicator, six.string_types) else getattr(
        indicator, '__name__', 'indicator')
    if isinstance(indicator, six.string_types):
        if indicator not in sys.indicators:
            raise ConfigError('ergodic.indicator: {!r} is not defined for system {!r}'
                              .format(indicator, sys.name))
        indicator = sys.indicators[indicator]
    rng = np.random.default_rng(seed)
    states = np.concatenate([_sample_piece(sys, piece, n_samples, rng) for piece in sys.pieces])
    initial = np.asarray(indicator(states), dtype=bool)
    changed = np.zeros(len(states), bool)
    x = states
    for step in range(n_steps):
        x = np.asarray(sys.step(x)).reshape(-1, sys.dimension)
        if not np.all(sys.in_domain(x)):
            raise DivergentOrbit('An orbit left the domain of {} at step {}'
                                 .format(sys.name, step + 1))
        changed |= np.asarray(indicator(x), dtype=bool) != initial
    n_violations = int(np.sum(changed))
    result = DecomposabilityResult(name, n_violations == 0, n_violations / len(states),
                                   n_violations, len(states), float(np.mean(initial)))
    _logger.info('Indicator %s on %s: %d of %d orbits changed value',
                 name, sys.name, n_violations, len(states))
    return result


class ErgodicReport(object):
    """Outcome of :func:`ergodicity_test`.

    Attributes
    ----------
    system : str
        System name
    time_means : OrderedDict
        Function name to the list of time means, one per start
    space_means : OrderedDict
        Function name to :class:`SpaceMean`
    spread : OrderedDict
        Function name to the range of its time means over the starts
    max_deviation : float
        Largest :math:`|f^* - \\bar f|`
    tol : float
        Tolerance used
    verdict : str
        One of :data:`VERDICTS`
    witness : :class:`DecomposabilityResult` or None
        Invariant indicator backing a ``'decomposable'`` verdict

    Raises
    ------
    ValueError
        if the verdict is ``'decomposable'`` without an invariant witness
    """

    def __init__(self, system, starts, time_means, space_means, tol, verdict, witness=None):
        if verdict not in VERDICTS:
            raise ValueError('verdict must be one of {}'.format(', '.join(VERDICTS)))
        if verdict == 'decomposable' and (witness is None or not witness.invariant
                                          or not 0 < witness.measure < 1):
            raise ValueError('A decomposable verdict needs a verified invariant indicator')
        self.system = system
        self.starts = np.asarray(starts, dtype=np.float64)
        self.time_means = time_means
        self.space_means = space_means
        self.tol = tol
        self.verdict = verdict
        self.witness = witness

    @property
    def spread(self):
        return collections.OrderedDict(
            (name, max(m.value for m in means) - min(m.value for m in means))
            for name, means in six.iteritems(self.time_means))

    @property
    def max_deviation(self):
        return max(abs(m.value - self.space_means[name].value)
                   for name, means in six.iteritems(self.time_means) for m in means)

    def to_dict(self):
        doc = collections.OrderedDict()
        doc['system'] = self.system
        doc['starts'] = self.starts.tolist()
        doc['time_means'] = collections.OrderedDict(
            (name, [m._asdict() for m in means]) for name, means in six.iteritems(self.time_means))
        doc['space_means'] = collections.OrderedDict(
            (name, mean._asdict()) for name, mean in six.iteritems(self.space_means))
        doc['spread'] = self.spread
        doc['max_deviation'] = self.max_deviation
        doc['tol'] = self.tol
        doc['verdict'] = self.verdict
        doc['witness'] = self.witness._asdict() if self.witness is not None else None
        return doc


def ergodicity_test(sys, functions, starts, N, tol, indicators=None, n_samples=100,
                    n_steps=100, space_method=None, mc_samples=100000, seed=0, threads=1):
    """Compare time means from several starts with space means.

    The verdict is

    ``'ergodic'``
        if every time mean lies within `tol` of its space mean;
    ``'decomposable'``
        if some function has time means spread by more than ``10 * tol``
        across the starts and one of the candidate `indicators` passes
        :func:`decomposability_test` while splitting the measure into two
        parts of positive mass;
    ``'inconclusive'``
        otherwise.

    Parameters
    ----------
    sys : :class:`DynamicalSystem`
        System under test
    functions : sequence
        Observables (callables or names)
    starts : array-like, shape (k, dimension)
        Initial states, at least two
    N : int
        Orbit length for each time mean
    tol : float
        Absolute tolerance on bounded observables
    indicators : sequence, optional
        Candidate invariant indicators; defaults to all of the system's
    n_samples, n_steps : int
        Passed to :func:`decomposability_test`
    space_method : str, optional
        ``'quadrature'`` or ``'monte_carlo'``; by default quadrature is used
        when the system has a density and dimension at most 2
    mc_samples : int
        Samples for a Monte Carlo space mean
    seed : int
        Seed for the sampling steps
    threads : int
        Orbits for distinct starts are computed on this many threads
    """
    starts = np.asarray(starts, dtype=np.float64).reshape(-1, sys.dimension)
    if len(starts) < 2:
        raise ValueError('ergodicity_test needs at least two starts')
    if len(functions) < 1:
        raise ValueError('ergodicity_test needs at least one function')
    if space_method is None:
        space_method = ('quadrature' if sys.density is not None and sys.dimension <= 2
                        else 'monte_carlo')
    if indicators is None:
        indicators = list(sys.indicators)

    time_means = collections.OrderedDict()
    space_means = collections.OrderedDict()
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        for f in functions:
            name = f if isinstance(f, six.string_types) else getattr(f, '__name__', repr(f))
            futures = [executor.submit(time_mean, sys, f, x0, N) for x0 in starts]
            time_means[name] = [future.result() for future in futures]
            space_means[name] = space_mean(sys, f, space_method, n=mc_samples, seed=seed)

    deviation = max(abs(m.value - space_means[name].value)
                    for name, means in six.iteritems(time_means) for m in means)
    spread = max(max(m.value for m in means) - min(m.value for m in means)
                 for means in six.itervalues(time_means))
    verdict = 'inconclusive'
    witness = None
    if deviation < tol:
        verdict = 'ergodic'
    elif spread > 10 * tol:
        for indicator in indicators:
            result = decomposability_test(sys, indicator, n_samples, n_steps, seed)
            if result.invariant and 0 < result.measure < 1:
                verdict = 'decomposable'
                witness = result
                break
    report = ErgodicReport(sys.name, starts, time_means, space_means, tol, verdict, witness)
    log = _logger.warning if verdict == 'inconclusive' else _logger.info
    log('System %s: %s (max deviation %.3g, spread %.3g, tol %g)',
        sys.name, verdict, deviation, spread, tol)
    return report


# Fixture systems

def rotation_system(alpha=GOLDEN):
    """Rotation :math:`\\theta \\mapsto \\theta + \\alpha \\bmod 1` with Lebesgue measure."""

    def step(x):
        return np.mod(np.asarray(x) + alpha, 1.0)

    def orbit(x0, start, count):
        n = np.arange(start, start + count, dtype=np.float64)
        return np.mod(x0[0] + n * alpha, 1.0)[:, None]

    def density(x):
        return np.ones(len(np.asarray(x).reshape(-1, 1)))

    def sample(rng, n):
        return rng.random((n, 1))

    def cosine(x):
        return np.cos(2 * np.pi * np.asarray(x)[:, 0])

    def lower_half(x):
        return np.asarray(x)[:, 0] < 0.5

    return DynamicalSystem(
        'rotation', 1, step, density, sample, [(0.0, 1.0)],
        pieces=[[(0.0, 0.5)], [(0.5, 1.0)]], orbit=orbit,
        starts=[[0.0], [0.3], [0.7]], default_N=1000000,
        observables={'cos': cosine, 'lower_half': lambda x: lower_half(x).astype(np.float64)},
        indicators={'lower_half': lower_half})


def two_piece_system(alpha=GOLDEN):
    """Rotations of [0, 1] and of [2, 3], with measure 1/2 on each."""

    def base(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x[..., :1] >= 2, 2.0, 0.0)

    def step(x):
        x = np.asarray(x, dtype=np.float64).reshape(-1, 1)
        b = base(x)
        return b + np.mod(x - b + alpha, 1.0)

    def orbit(x0, start, count):
        b = 2.0 if x0[0] >= 2 else 0.0
        n = np.arange(start, start + count, dtype=np.float64)
        return (b + np.mod(x0[0] - b + n * alpha, 1.0))[:, None]

    def density(x):
        x = np.asarray(x).reshape(-1, 1)[:, 0]
        return np.where(((x >= 0) & (x <= 1)) | ((x >= 2) & (x <= 3)), 0.5, 0.0)

    def sample(rng, n):
        return (2.0 * rng.integers(0, 2, n) + rng.random(n))[:, None]

    def first_piece(x):
        return np.asarray(x)[:, 0] <= 1.5

    return DynamicalSystem(
        'two_piece', 1, step, density, sample, [(0.0, 3.0)],
        pieces=[[(0.0, 1.0)], [(2.0, 3.0)]], orbit=orbit,
        starts=[[0.5], [2.5]], default_N=1000000,
        observables={'in_first': lambda x: first_piece(x).astype(np.float64),
                     'cos': lambda x: np.cos(2 * np.pi * np.asarray(x)[:, 0])},
        indicators={'first_piece': first_piece})


def bohm_pair_system(model=None, delta=0.0, dt=None, t0=0.0, opts=None):
    """Strobed Bohmian pair flow on constrained states.

    A state is ``(x1, y1, x2, y2, t)``; one step advances it by `dt` along the
    Bohmian flow (without stopping at the detector plane). The invariant
    measure is the constrained-pair ensemble with fixed
    :math:`\\delta = x_1 + x_2`, which can only be sampled. The shipped
    indicator ``side`` is :math:`x_1 > \\delta/2`.

    Parameters
    ----------
    model : :class:`~bohmergo.wavefunction.TwoParticleWaveFunction`, optional
        Defaults to the double-slit model with natural parameters
    delta : float
        Pair sum of the sampled states
    dt : float, optional
        Strobe interval; defaults to a fiftieth of the flight time
    t0 : float
        Sampling time
    opts : :class:`~bohmergo.dynamics.IntegratorOptions`, optional
        Integrator used for each step
    """
    from bohmergo import dynamics, ensemble, wavefunction

    if model is None:
        model = wavefunction.build_double_slit_model(wavefunction.PhysicalParams.natural())
    if dt is None:
        dt = model.params.flight_time / 50
    if not dt > 0:
        raise ConfigError('ergodic.dt: must be positive')
    if opts is None:
        opts = dynamics.IntegratorOptions(max_step=dt / 20)
    inf = np.inf

    def step(x):
        x = np.asarray(x, dtype=np.float64).reshape(-1, 5)
        out = np.empty_like(x)
        for t in np.unique(x[:, 4]):
            sel = x[:, 4] == t
            result = dynamics.propagate(model, x[sel, :4], t, t + dt, opts,
                                        stop_at_detector=False)
            if np.any(result.node_abort):
                raise DivergentOrbit('Orbit reached a node of the wavefunction near t = {:g}'
                                     .format(t))
            out[sel, :4] = result.positions
            out[sel, 4] = t + dt
        return out

    def sample(rng, n):
        spec = ensemble.EnsembleSpec(
            'constrained_pairs', n, int(rng.integers(0, 2**63)), t0=t0,
            delta_distribution='fixed', delta_value=delta)
        state = ensemble.sample_initial(model, spec)
        return np.column_stack([state.positions, np.full(n, t0)])

    def side(x):
        return np.asarray(x)[:, 0] > delta / 2

    # One start on each side of the axis
    candidates = sample(np.random.default_rng(0), 64)
    flags = side(candidates)
    starts = [candidates[np.argmax(flags)], candidates[np.argmin(flags)]]

    return DynamicalSystem(
        'bohm_pair', 5, step, None, sample,
        [(-inf, inf), (-inf, inf), (-inf, inf), (-inf, inf), (0.0, inf)],
        observables={'side': lambda x: side(x).astype(np.float64)},
        indicators={'side': side}, starts=starts, default_N=50)


SYSTEMS = collections.OrderedDict([
    ('rotation', rotation_system),
    ('two_piece', two_piece_system),
    ('bohm_pair', bohm_pair_system)
])


def get_system(name, **kwargs):
    """Build a fixture system by name."""
    try:
        factory = SYSTEMS[name]
    except KeyError:
        raise ConfigError('ergodic.system: unknown system {!r} (expected one of {})'
                          .format(name, ', '.join(SYSTEMS)))
    return factory(**kwargs)
