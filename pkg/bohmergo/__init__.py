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

"""Two-particle de Broglie-Bohm dynamics in a double-slit geometry.

The package is split by concern:

- :mod:`bohmergo.wavefunction`: symmetric two-particle wavefunction models
- :mod:`bohmergo.dynamics`: Bohmian trajectory integration and invariants
- :mod:`bohmergo.ensemble`: Gibbs and constrained-pair ensembles
- :mod:`bohmergo.detection`: joint detection probabilities
- :mod:`bohmergo.ergodic`: time means, space means and decomposability
- :mod:`bohmergo.design`: apparatus design formulas
- :mod:`bohmergo.config`: scenario configuration files

This module holds the pieces shared by all of them: the exception hierarchy,
physical constants and the :class:`Configuration` record.
"""

from __future__ import division, print_function
import collections
import logging

import numpy as _np
import scipy.constants as _constants

from bohmergo._version import __version__       # noqa: F401


_logger = logging.getLogger(__name__)

#: Reduced Planck constant in erg s
HBAR = _constants.hbar * 1e7
#: Electron rest mass in g
ELECTRON_MASS = _constants.m_e * 1e3


class ConfigError(ValueError):
    """Invalid parameter or configuration value.

    The message starts with the dotted name of the offending field.
    """


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure"""


class NodeError(NumericalError):
    """The configuration is at (or too close to) a node of the wavefunction"""


class StepUnderflow(NumericalError):
    """The adaptive integrator step collapsed below the minimum step"""


class RejectionStall(NumericalError):
    """Rejection sampling acceptance rate fell below the stall threshold"""


class InsufficientSamples(NumericalError):
    """Too few samples for the requested statistical test"""


class QuadratureNonConvergence(NumericalError):
    """Adaptive quadrature did not reach the requested accuracy"""


class EmptyEnsemble(NumericalError):
    """No usable members remain to form an estimate"""


class DivergentOrbit(NumericalError):
    """An orbit left the domain of the dynamical system"""


_ConfigurationBase = collections.namedtuple('Configuration', 'x1 y1 x2 y2 t')


class Configuration(_ConfigurationBase):
    """Positions of both particles (cm) at time `t` (s).

    This is an immutable record. Use :meth:`as_array` to get the
    ``(x1, y1, x2, y2)`` coordinate vector used by the vectorized evaluators.
    """

    __slots__ = ()

    def as_array(self):
        return _np.array([self.x1, self.y1, self.x2, self.y2], dtype=_np.float64)

    def swapped(self):
        """Configuration with the particle labels exchanged"""
        return Configuration(self.x2, self.y2, self.x1, self.y1, self.t)

    def reflected(self):
        """Configuration mirrored about the axis x = 0"""
        return Configuration(-self.x1, self.y1, -self.x2, self.y2, self.t)

    @classmethod
    def from_array(cls, q, t):
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]), float(t))


def check_configuration(c):
    """Raise :exc:`ValueError` unless every coordinate of `c` is finite."""
    if not isinstance(c, Configuration):
        raise TypeError('Expected a Configuration, not {}'.format(type(c).__name__))
    if not _np.all(_np.isfinite(c)):
        raise ValueError('Configuration has non-finite coordinates: {}'.format(c))
    return c
