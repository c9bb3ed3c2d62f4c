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

"""Experimental design formulas and feasibility checks.

Near the slits the pair sum is not conserved; it grows approximately as

.. math:: x_1(t) + x_2(t) = (x_1(0) + x_2(0)) e^{v t / L}

so an apparatus is usable when the far-field region starts well before the
detectors and the packets do not spread much on the way there.
"""

from __future__ import division, print_function
import collections
import logging
import math

import numpy as np
import scipy.integrate

from bohmergo import ConfigError, HBAR, ELECTRON_MASS
from bohmergo.wavefunction import PhysicalParams


_logger = logging.getLogger(__name__)


def growth_factor(t, v, L):
    """Growth :math:`e^{vt/L}` of the pair sum after time `t`.

    Raises
    ------
    ValueError
        if `t` is negative
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError('t must be non-negative')
    return np.exp(v * np.asarray(t, dtype=np.float64) / L)


def integrate_growth(t, v, L, rtol=1e-12, atol=1e-14):
    """Integrate :math:`\\dot s = (v/L) s` from :math:`s(0) = 1`.

    This is the independent check of :func:`growth_factor`. `t` may be a
    scalar or an increasing array of times.
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t < 0):
        raise ValueError('t must be non-negative')
    t_end = float(t[-1])
    if t_end == 0:
        return np.ones_like(t)
    solution = scipy.integrate.solve_ivp(
        lambda _, s: (v / L) * s, (0.0, t_end), [1.0],
        method='DOP853', t_eval=t, rtol=rtol, atol=atol)
    if not solution.success:
        raise RuntimeError('Growth integration failed: ' + solution.message)
    return solution.y[0]


def sum_envelope(delta0, t, v, L, d=None):
    """Pair sum :math:`\\delta_0 e^{vt/L}` reached from `delta0`.

    If the slit width `d` is given, ``|delta0| <= d`` is enforced.
    """
    if d is not None and abs(delta0) > d:
        raise ValueError('|delta0| = {} exceeds the slit width {}'.format(abs(delta0), d))
    return delta0 * growth_factor(t, v, L)


def spreading_ratio(sigma0, t, mass, hbar):
    """Width ratio :math:`\\sigma_t / \\sigma_0` of a free Gaussian packet.

    .. math:: \\frac{\\sigma_t}{\\sigma_0} = \\sqrt{1 + \\left(\\frac{\\hbar t}{2 m \\sigma_0^2}\\right)^2}
    """
    if sigma0 <= 0:
        raise ValueError('sigma0 must be positive')
    tau = hbar * np.asarray(t, dtype=np.float64) / (2 * mass * sigma0 ** 2)
    return np.sqrt(1 + tau ** 2)


def electron_example_spreading(L=1e2, v=1e10, sigma0=2e-4):
    """Spreading of an electron packet over the flight ``L / v``."""
    return float(spreading_ratio(sigma0, L / v, ELECTRON_MASS, HBAR))


class DesignInputs(object):
    """Apparatus parameters with feasibility thresholds.

    Parameters
    ----------
    params : :class:`~bohmergo.wavefunction.PhysicalParams`
        Apparatus parameters
    max_spreading : float
        Largest acceptable :math:`\\sigma_t / \\sigma_0` at the detectors
    max_growth : float
        Largest acceptable growth of the pair sum before the far field
    fraunhofer_margin : float
        Factor by which the far-field onset must precede the detectors; also
        the factor by which the constraint band must be narrower than `a`

    Raises
    ------
    ConfigError
        if a threshold is not above 1 or the margin is below 1
    """

    def __init__(self, params, max_spreading=1.05, max_growth=math.e, fraunhofer_margin=10.0):
        if not isinstance(params, PhysicalParams):
            raise TypeError('params must be a PhysicalParams instance')
        if not max_spreading > 1:
            raise ConfigError('design.max_spreading: must be greater than 1')
        if not max_growth > 1:
            raise ConfigError('design.max_growth: must be greater than 1')
        if not fraunhofer_margin >= 1:
            raise ConfigError('design.fraunhofer_margin: must be at least 1')
        self.params = params
        self.max_spreading = float(max_spreading)
        self.max_growth = float(max_growth)
        self.fraunhofer_margin = float(fraunhofer_margin)


Check = collections.namedtuple('Check', 'name value limit passed')


class FeasibilityReport(object):
    """Outcome of :func:`feasibility_check`.

    Each of :attr:`spreading`, :attr:`fraunhofer` and :attr:`band` is a
    :class:`Check` ``(name, value, limit, passed)``.
    """

    def __init__(self, spreading, fraunhofer, band, fraunhofer_distance,
                 onset_time, growth_at_onset):
        self.spreading = spreading
        self.fraunhofer = fraunhofer
        self.band = band
        self.fraunhofer_distance = fraunhofer_distance
        self.onset_time = onset_time
        self.growth_at_onset = growth_at_onset

    @property
    def checks(self):
        return [self.spreading, self.fraunhofer, self.band]

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def to_dict(self):
        doc = collections.OrderedDict()
        for check in self.checks:
            doc[check.name] = collections.OrderedDict([
                ('value', check.value), ('limit', check.limit), ('passed', check.passed)])
        doc['fraunhofer_distance'] = self.fraunhofer_distance
        doc['onset_time'] = self.onset_time
        doc['growth_at_onset'] = self.growth_at_onset
        doc['passed'] = self.passed
        return doc

    def format_table(self):
        lines = ['{:<12} {:>14} {:>14}  {}'.format('check', 'value', 'limit', 'result')]
        for check in self.checks:
            lines.append('{:<12} {:>14.6g} {:>14.6g}  {}'.format(
                check.name, check.value, check.limit, 'pass' if check.passed else 'FAIL'))
        lines.append('far field starts at y = {:.6g} cm (t = {:.6g} s, growth {:.6g})'.format(
            self.fraunhofer_distance, self.onset_time, self.growth_at_onset))
        return '\n'.join(lines)


def feasibility_check(inputs):
    """Check an apparatus design.

    Three checks are made:

    spreading
        :math:`\\sigma_t / \\sigma_0` at :math:`t = L/v` is at most
        `max_spreading`.
    fraunhofer
        the far field starts much earlier than the detectors, i.e.
        :math:`y_F \\cdot \\mathrm{margin} \\leq L`, and the pair-sum growth
        at the onset time :math:`t_F = y_F / v` is at most `max_growth`. The
        reported value is :math:`y_F / L`.
    band
        the grown constraint band :math:`d e^{v t_F / L}` is much narrower
        than the slit separation; the value is the ratio to `a` and the limit
        is ``1 / margin``.
    """
    p = inputs.params
    margin = inputs.fraunhofer_margin
    spread = float(spreading_ratio(p.sigma0, p.flight_time, p.mass, p.hbar))
    y_f = p.fraunhofer_distance
    t_f = y_f / p.v
    growth = float(growth_factor(t_f, p.v, p.L))
    band_ratio = p.d * growth / p.a
    report = FeasibilityReport(
        Check('spreading', spread, inputs.max_spreading, spread <= inputs.max_spreading),
        Check('fraunhofer', y_f / p.L, 1.0 / margin,
              y_f * margin <= p.L and growth <= inputs.max_growth),
        Check('band', band_ratio, 1.0 / margin, band_ratio <= 1.0 / margin),
        y_f, t_f, growth)
    if not report.passed:
        _logger.warning('Design fails: %s',
                        ', '.join(check.name for check in report.checks if not check.passed))
    return report
