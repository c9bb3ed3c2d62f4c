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

from __future__ import division, print_function
import csv

import six
import numpy as np
import scipy.integrate
import scipy.stats
from nose.tools import (
    assert_equal, assert_true, assert_false, assert_less, assert_greater,
    assert_almost_equal, assert_raises, assert_less_equal)

from bohmergo import ConfigError, InsufficientSamples
from bohmergo import ensemble
from bohmergo.dynamics import IntegratorOptions
from bohmergo.ensemble import EnsembleSpec, EnsembleState
from bohmergo.wavefunction import PhysicalParams, build_double_slit_model
from bohmergo.test import slow


MODEL = build_double_slit_model(PhysicalParams.natural())


class TestEnsembleSpec(object):
    def test_defaults(self):
        spec = EnsembleSpec()
        assert_equal('gibbs', spec.mode)
        assert_equal(1.0, spec.width_for(MODEL))

    def test_round_trip(self):
        spec = EnsembleSpec('constrained_pairs', 10, 2**64 - 1, constraint_width=0.5,
                            delta_distribution='fixed', delta_value=0.1)
        assert_equal(spec, EnsembleSpec.from_dict(spec.to_dict()))
        assert_equal(spec.replace(n=11).n, 11)

    def test_invalid(self):
        with assert_raises(ConfigError) as cm:
            EnsembleSpec(mode='grand_canonical')
        assert_true(str(cm.exception).startswith('ensemble.mode'))
        assert_raises(ConfigError, EnsembleSpec, n=0)
        assert_raises(ConfigError, EnsembleSpec, n=True)
        assert_raises(ConfigError, EnsembleSpec, seed=-1)
        assert_raises(ConfigError, EnsembleSpec, seed=2**64)
        assert_raises(ConfigError, EnsembleSpec, constraint_width=0.0)
        assert_raises(ConfigError, EnsembleSpec, t0=-1.0)
        assert_raises(ConfigError, EnsembleSpec, delta_distribution='normal')
        assert_raises(ConfigError, EnsembleSpec, constraint_width=0.2, delta_value=0.2)

    def test_width_for(self):
        assert_raises(ConfigError, EnsembleSpec(constraint_width=4.0).width_for, MODEL)
        assert_raises(ConfigError, EnsembleSpec(delta_value=0.6).width_for, MODEL)

    def test_prefix(self):
        with assert_raises(ConfigError) as cm:
            EnsembleSpec.from_dict({'n': 0}, 'ensembles.gibbs')
        assert_true(str(cm.exception).startswith('ensembles.gibbs.n'))
        with assert_raises(ConfigError) as cm:
            EnsembleSpec.from_dict({'size': 3}, 'ensembles.gibbs')
        assert_equal('ensembles.gibbs.size: unknown key', str(cm.exception))


class TestSampling(object):
    def test_gibbs_reproducible(self):
        spec = EnsembleSpec(n=500, seed=42)
        a = ensemble.sample_initial(MODEL, spec)
        b = ensemble.sample_initial(MODEL, spec)
        np.testing.assert_array_equal(a.positions, b.positions)
        c = ensemble.sample_initial(MODEL, spec.replace(seed=43))
        assert_false(np.array_equal(a.positions, c.positions))
        assert_equal(0, len(a.deltas))
        assert_equal('gibbs', a.mode)
        assert_equal(42, a.seed)

    def test_prefix_stable(self):
        """A larger ensemble starts with the smaller one."""
        small = ensemble.sample_initial(MODEL, EnsembleSpec(n=100, seed=5))
        large = ensemble.sample_initial(MODEL, EnsembleSpec(n=300, seed=5))
        np.testing.assert_array_equal(small.positions[:, [0, 2]], large.positions[:100, [0, 2]])

    def test_gibbs_marginal(self):
        state = ensemble.sample_initial(MODEL, EnsembleSpec(n=4000, seed=7))
        x1 = state.positions[:, 0]
        lo, hi = MODEL.transverse_window(0.0)
        grid = np.linspace(lo, hi, 2001)
        cdf = scipy.integrate.cumulative_trapezoid(MODEL.marginal_density(grid, 0.0), grid,
                                                   initial=0.0)
        cdf /= cdf[-1]
        statistic, p_value = scipy.stats.kstest(x1, lambda x: np.interp(x, grid, cdf))
        assert_greater(p_value, 0.001)
        # Longitudinal coordinates follow the packet
        assert_almost_equal(0.0, np.mean(state.positions[:, 1]), delta=0.005)
        assert_almost_equal(0.05, np.std(state.positions[:, 3]), delta=0.005)

    def test_constrained_exact(self):
        spec = EnsembleSpec('constrained_pairs', 2000, seed=3)
        state = ensemble.sample_initial(MODEL, spec)
        sums = state.positions[:, 0] + state.positions[:, 2]
        np.testing.assert_array_equal(sums, state.deltas)
        assert_less_equal(np.max(np.abs(state.deltas)), MODEL.params.d / 2)
        # Both sides of the axis are populated
        assert_greater(np.mean(state.positions[:, 0] > 0), 0.3)
        assert_less(np.mean(state.positions[:, 0] > 0), 0.7)

    def test_constrained_fixed(self):
        spec = EnsembleSpec('constrained_pairs', 200, seed=3, delta_distribution='fixed',
                            delta_value=0.25)
        state = ensemble.sample_initial(MODEL, spec)
        np.testing.assert_allclose(state.deltas, 0.25, rtol=0, atol=1e-14)

    def test_constrained_width(self):
        spec = EnsembleSpec('constrained_pairs', 500, seed=9, constraint_width=0.1)
        state = ensemble.sample_initial(MODEL, spec)
        assert_less_equal(np.max(np.abs(state.deltas)), 0.05)

    def test_later_time(self):
        spec = EnsembleSpec(n=200, seed=1, t0=1.0)
        state = ensemble.sample_initial(MODEL, spec)
        np.testing.assert_array_equal(1.0, state.times)
        assert_almost_equal(20.0, np.mean(state.positions[:, 1]), delta=0.02)


class TestEnsembleState(object):
    def make(self):
        positions = [[1.0, 0.0, -0.5, 0.0], [2.0, 0.1, -2.25, 0.0]]
        return EnsembleState(positions, 0.0, [0.5, -0.25], 'constrained_pairs', 4)

    def test_read_only(self):
        state = self.make()
        with assert_raises(ValueError):
            state.positions[0, 0] = 1.0
        assert_equal(2, len(state))
        assert_equal(0, state.n_lost)

    def test_summary(self):
        doc = self.make().summary()
        assert_equal(2, doc['n'])
        assert_equal('constrained_pairs', doc['mode'])
        assert_equal(4, doc['seed'])

    def test_csv(self):
        f = six.StringIO()
        ensemble.write_ensemble_csv(f, self.make())
        rows = list(csv.reader(six.StringIO(f.getvalue())))
        assert_equal(list(ensemble.ENSEMBLE_COLUMNS), rows[0])
        assert_equal(['1', '2.0', '0.1', '-2.25', '0.0', '-0.25'], rows[2])

    def test_csv_gibbs(self):
        state = EnsembleState([[1.0, 0.0, -0.5, 0.0]], 0.0, [], 'gibbs', 0)
        f = six.StringIO()
        ensemble.write_ensemble_csv(f, state)
        rows = list(csv.reader(six.StringIO(f.getvalue())))
        assert_equal('', rows[1][5])


class TestEvolve(object):
    def test_thread_count_invariant(self):
        spec = EnsembleSpec('constrained_pairs', 1500, seed=11)
        state = ensemble.sample_initial(MODEL, spec)
        one, summaries1 = ensemble.evolve_ensemble(MODEL, state, 0.5)
        four, summaries4 = ensemble.evolve_ensemble(MODEL, state, 0.5, threads=4)
        np.testing.assert_array_equal(one.positions, four.positions)
        assert_equal([s._replace(final=None) for s in summaries1],
                     [s._replace(final=None) for s in summaries4])
        assert_equal(list(range(1500)), [s.member_id for s in summaries1])

    def test_sum_law(self):
        spec = EnsembleSpec('constrained_pairs', 200, seed=12)
        state = ensemble.sample_initial(MODEL, spec)
        final, summaries = ensemble.evolve_ensemble(MODEL, state, 1.0)
        growth = MODEL.sum_growth(1.0)
        kept = ~final.lost
        sums = final.positions[kept, 0] + final.positions[kept, 2]
        np.testing.assert_allclose(sums, state.deltas[kept] * growth, rtol=0, atol=1e-9)
        np.testing.assert_array_equal(state.deltas, final.deltas)
        assert_false(any(s.crossed_axis for s in summaries))

    def test_no_crossings_to_detector(self):
        spec = EnsembleSpec('constrained_pairs', 1000, seed=15)
        state = ensemble.sample_initial(MODEL, spec)
        _, summaries = ensemble.evolve_ensemble(MODEL, state, 2.1, threads=2)
        assert_equal(0, sum(s.crossed_axis for s in summaries))
        assert_equal(1000, sum(s.reached_detector or s.lost for s in summaries))

    def test_adaptive_scheme(self):
        spec = EnsembleSpec('constrained_pairs', 5, seed=13)
        state = ensemble.sample_initial(MODEL, spec)
        opts = IntegratorOptions(scheme='rk45_adaptive')
        fixed, _ = ensemble.evolve_ensemble(MODEL, state, 0.5)
        adaptive, summaries = ensemble.evolve_ensemble(MODEL, state, 0.5, opts)
        np.testing.assert_allclose(adaptive.positions, fixed.positions, rtol=0, atol=1e-6)
        assert_false(any(s.failed for s in summaries))

    def test_failures_recorded(self):
        spec = EnsembleSpec('constrained_pairs', 3, seed=13)
        state = ensemble.sample_initial(MODEL, spec)
        opts = IntegratorOptions(scheme='rk45_adaptive', min_step=0.5)
        final, summaries = ensemble.evolve_ensemble(MODEL, state, 1.0, opts)
        assert_true(all(s.failed for s in summaries))
        assert_equal(3, final.n_lost)

    def test_reaches_detector(self):
        spec = EnsembleSpec(n=50, seed=14)
        state = ensemble.sample_initial(MODEL, spec)
        final, summaries = ensemble.evolve_ensemble(MODEL, state, 2.1)
        assert_true(all(s.reached_detector or s.lost for s in summaries))
        arrived = ~final.lost
        np.testing.assert_allclose(
            np.minimum(final.positions[arrived, 1], final.positions[arrived, 3]), 40.0,
            atol=1e-9)

    def test_invalid(self):
        state = ensemble.sample_initial(MODEL, EnsembleSpec(n=3, seed=1))
        assert_raises(ConfigError, ensemble.evolve_ensemble, MODEL, state, 1.0, threads=0)
        assert_raises(ValueError, ensemble.evolve_ensemble, MODEL, state, 0.0)


class TestPoolCells(object):
    def test_pooling(self):
        expected = np.array([1.0, 2.0, 3.0, 10.0, 20.0])
        observed = np.array([0.0, 3.0, 2.0, 11.0, 20.0])
        e, o = ensemble.pool_cells(expected, observed)
        np.testing.assert_array_equal([6.0, 10.0, 20.0], e)
        np.testing.assert_array_equal([5.0, 11.0, 20.0], o)

    def test_short_tail_joins(self):
        e, o = ensemble.pool_cells([5.0, 6.0, 1.0], [4.0, 7.0, 1.0])
        np.testing.assert_array_equal([6.0, 6.0], e)
        np.testing.assert_array_equal([5.0, 7.0], o)

    def test_insufficient(self):
        assert_raises(InsufficientSamples, ensemble.pool_cells, [1.0, 2.0, 3.0], [1, 2, 3])


class TestEquivariance(object):
    def test_cell_probabilities(self):
        lo, hi = MODEL.transverse_window(0.5)
        edges = np.linspace(lo, hi, 41)
        p = ensemble.cell_probabilities(MODEL, 0.5, edges, edges)
        assert_equal((40, 40), p.shape)
        assert_almost_equal(1.0, p.sum(), delta=1e-4)
        assert_true(np.all(p >= 0))

    def test_initial_ensemble(self):
        result = ensemble.equivariance_test(MODEL, EnsembleSpec(n=3000, seed=21), 0.0, bins=20)
        assert_equal('pass', result.verdict)
        assert_equal(3000, result.n_used)
        assert_equal(0, result.lost)
        assert_greater(result.dof, 10)

    def test_stale_ensemble_fails(self):
        """An unevolved ensemble does not match the density at a later time."""
        state = ensemble.sample_initial(MODEL, EnsembleSpec(n=3000, seed=22))
        lo, hi = MODEL.transverse_window(1.0)
        edges = np.linspace(lo, hi, 21)
        observed, _, _ = np.histogram2d(state.positions[:, 0], state.positions[:, 2],
                                        bins=[edges, edges])
        p = ensemble.cell_probabilities(MODEL, 1.0, edges, edges)
        e, o = ensemble.pool_cells(p * observed.sum() / p.sum(), observed)
        _, p_value = scipy.stats.chisquare(o, e * o.sum() / e.sum())
        assert_less(p_value, 1e-6)

    def test_evolved(self):
        result = ensemble.equivariance_test(MODEL, EnsembleSpec(n=2000, seed=23), 1.0, bins=20,
                                            threads=2)
        assert_equal('pass', result.verdict)
        assert_less(result.lost, 20)

    @slow
    def test_evolved_to_detector(self):
        result = ensemble.equivariance_test(MODEL, EnsembleSpec(n=20000, seed=24),
                                            MODEL.params.flight_time, bins=50, threads=4)
        assert_equal('pass', result.verdict)

    def test_requires_gibbs(self):
        spec = EnsembleSpec('constrained_pairs', 10)
        assert_raises(ConfigError, ensemble.equivariance_test, MODEL, spec, 1.0)
        assert_raises(ConfigError, ensemble.equivariance_test, MODEL, EnsembleSpec(), 1.0, 0)

    def test_too_few(self):
        assert_raises(InsufficientSamples, ensemble.equivariance_test, MODEL,
                      EnsembleSpec(n=5, seed=1), 0.0, bins=10)
