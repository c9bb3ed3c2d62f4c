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
import math

import numpy as np
from nose.tools import (
    assert_equal, assert_true, assert_false, assert_almost_equal, assert_raises, assert_in)

from bohmergo import ConfigError, HBAR, ELECTRON_MASS
from bohmergo import design
from bohmergo.wavefunction import PhysicalParams


class TestGrowth(object):
    def test_growth_factor(self):
        assert_equal(1.0, design.growth_factor(0.0, 1e10, 100.0))
        assert_almost_equal(math.e, design.growth_factor(1e-8, 1e10, 100.0), places=14)
        np.testing.assert_allclose([1.0, math.exp(0.5)],
                                   design.growth_factor([0.0, 0.5], 2.0, 2.0))

    def test_negative_time(self):
        assert_raises(ValueError, design.growth_factor, -1.0, 1.0, 1.0)
        assert_raises(ValueError, design.integrate_growth, [0.0, -1.0], 1.0, 1.0)

    def test_integrated_matches_closed_form(self):
        t = np.linspace(0.0, 2.0, 21)
        np.testing.assert_allclose(design.integrate_growth(t, 20.0, 40.0),
                                   design.growth_factor(t, 20.0, 40.0), rtol=1e-10)

    def test_integrate_zero(self):
        np.testing.assert_array_equal([1.0], design.integrate_growth(0.0, 1.0, 1.0))

    def test_sum_envelope(self):
        assert_almost_equal(0.5 * math.e, design.sum_envelope(0.5, 2.0, 20.0, 40.0), places=14)
        assert_equal(0.0, design.sum_envelope(0.0, 2.0, 20.0, 40.0))
        assert_raises(ValueError, design.sum_envelope, 2.0, 1.0, 1.0, 1.0, d=1.0)


class TestSpreading(object):
    def test_closed_form(self):
        assert_equal(1.0, design.spreading_ratio(0.5, 0.0, 1.0, 1.0))
        assert_almost_equal(math.sqrt(17.0), design.spreading_ratio(0.5, 2.0, 1.0, 1.0),
                            places=14)

    def test_electron_example(self):
        assert_almost_equal(1.0104, design.electron_example_spreading(), delta=1e-4)
        tau = HBAR * 1e-8 / (2 * ELECTRON_MASS * 4e-8)
        assert_almost_equal(math.sqrt(1 + tau * tau), design.electron_example_spreading(),
                            places=14)

    def test_monotone(self):
        t = np.linspace(0.0, 4.0, 41)
        assert_true(np.all(np.diff(design.spreading_ratio(0.5, t, 1.0, 1.0)) > 0))
        widths = [1.0, 0.5, 0.25, 0.125]
        ratios = [float(design.spreading_ratio(s, 1.0, 1.0, 1.0)) for s in widths]
        assert_true(np.all(np.diff(ratios) > 0))

    def test_invalid(self):
        assert_raises(ValueError, design.spreading_ratio, 0.0, 1.0, 1.0, 1.0)


class TestFeasibility(object):
    def test_electron_passes(self):
        inputs = design.DesignInputs(PhysicalParams.electron(), fraunhofer_margin=1.5)
        report = design.feasibility_check(inputs)
        assert_true(report.passed)
        assert_almost_equal(55.0, report.fraunhofer_distance, delta=0.1)
        assert_almost_equal(math.exp(0.55), report.growth_at_onset, delta=1e-3)
        assert_almost_equal(0.0173, report.band.value, delta=1e-4)

    def test_electron_default_margin_fails(self):
        report = design.feasibility_check(design.DesignInputs(PhysicalParams.electron()))
        assert_false(report.passed)
        assert_true(report.spreading.passed)
        assert_false(report.fraunhofer.passed)

    def test_narrow_packet_spreads(self):
        inputs = design.DesignInputs(PhysicalParams.electron(sigma0=2e-6), fraunhofer_margin=1.5)
        report = design.feasibility_check(inputs)
        assert_false(report.spreading.passed)
        assert_true(report.fraunhofer.passed)

    def test_short_apparatus(self):
        """Detectors inside the near field."""
        inputs = design.DesignInputs(PhysicalParams.electron(L=40.0), fraunhofer_margin=1.5)
        report = design.feasibility_check(inputs)
        assert_false(report.fraunhofer.passed)
        assert_true(report.spreading.passed)

    def test_wider_margin_still_passes(self):
        base = design.feasibility_check(
            design.DesignInputs(PhysicalParams.electron(), fraunhofer_margin=1.5))
        looser = design.feasibility_check(
            design.DesignInputs(PhysicalParams.electron(L=150.0), fraunhofer_margin=1.5))
        assert_true(base.fraunhofer.passed)
        assert_true(looser.fraunhofer.passed)

    def test_natural_spreads(self):
        report = design.feasibility_check(design.DesignInputs(PhysicalParams.natural()))
        assert_false(report.spreading.passed)
        assert_almost_equal(math.sqrt(17.0), report.spreading.value, places=12)

    def test_to_dict(self):
        inputs = design.DesignInputs(PhysicalParams.electron(), fraunhofer_margin=1.5)
        report = design.feasibility_check(inputs)
        doc = report.to_dict()
        assert_equal(['spreading', 'fraunhofer', 'band', 'fraunhofer_distance', 'onset_time',
                      'growth_at_onset', 'passed'], list(doc))
        assert_true(doc['passed'])
        assert_equal(1.05, doc['spreading']['limit'])
        table = report.format_table()
        assert_in('spreading', table)
        assert_in('pass', table)

    def test_invalid_inputs(self):
        p = PhysicalParams.natural()
        with assert_raises(ConfigError) as cm:
            design.DesignInputs(p, max_spreading=1.0)
        assert_true(str(cm.exception).startswith('design.max_spreading'))
        assert_raises(ConfigError, design.DesignInputs, p, max_growth=0.5)
        assert_raises(ConfigError, design.DesignInputs, p, fraunhofer_margin=0.9)
        assert_raises(TypeError, design.DesignInputs, {'L': 1})
