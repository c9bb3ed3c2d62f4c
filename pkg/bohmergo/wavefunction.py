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

"""Two-particle wavefunction models.

A model evaluates :math:`\\Psi(x_1, y_1, x_2, y_2, t) = R e^{iS/\\hbar}` for
two particles moving through a double slit towards a detector plane at
:math:`y = L`. All evaluators are vectorized: configurations are passed as
arrays whose last axis holds ``(x1, y1, x2, y2)``, and the time may be a
scalar or an array broadcastable against the leading axes.

Models are immutable after construction, so a single model may be evaluated
from any number of threads at once.

Units are CGS throughout. :meth:`PhysicalParams.natural` builds parameters
with :math:`\\hbar = m = 1`, which is what the tests mostly use.
"""

from __future__ import division, print_function
import collections
import logging
import numbers

import six
import numpy as np
import scipy.integrate
import scipy.optimize

from bohmergo import (
    HBAR, ELECTRON_MASS, ConfigError, Configuration, check_configuration)


_logger = logging.getLogger(__name__)

#: Relative node threshold: R^2 below this fraction of the t = 0 peak is a node
NODE_FRACTION = 1e-12
#: Half-width of the slit support, in packet widths
SUPPORT_SIGMAS = 6.0

_REQUIRED_KEYS = ('hbar', 'mass', 'k', 'L', 'a', 'd', 'sigma0')


def _wrap_phase(phi):
    """Fold an angle into (-pi, pi]."""
    return np.pi - np.mod(np.pi - phi, 2 * np.pi)


class PhysicalParams(object):
    """Physical parameters of the two-slit apparatus.

    Parameters
    ----------
    hbar : float
        Reduced Planck constant (erg s)
    mass : float
        Particle mass (g)
    k : float
        Longitudinal wavenumber (1/cm)
    L : float
        Distance from the slits to the detector plane (cm)
    a : float
        Separation of the slit centres (cm)
    d : float
        Slit width (cm)
    sigma0 : float
        Initial transverse packet width (cm)
    sigma_y : float, optional
        Longitudinal packet width (cm). Defaults to `sigma0`.

    Raises
    ------
    ConfigError
        if any value is not strictly positive and finite, or unless
        ``d < a < L``
    """

    def __init__(self, hbar, mass, k, L, a, d, sigma0, sigma_y=None):
        if sigma_y is None:
            sigma_y = sigma0
        values = collections.OrderedDict([
            ('hbar', hbar), ('mass', mass), ('k', k), ('L', L), ('a', a),
            ('d', d), ('sigma0', sigma0), ('sigma_y', sigma_y)])
        for name, value in six.iteritems(values):
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise ConfigError('model.{}: expected a number, got {!r}'.format(name, value))
            if not np.isfinite(value) or value <= 0:
                raise ConfigError('model.{}: must be positive and finite, got {!r}'
                                  .format(name, value))
        if not d < a:
            raise ConfigError('model.d: slit width {} must be smaller than the separation {}'
                              .format(d, a))
        if not a < L:
            raise ConfigError('model.a: slit separation {} must be smaller than L = {}'
                              .format(a, L))
        self.hbar = float(hbar)
        self.mass = float(mass)
        self.k = float(k)
        self.L = float(L)
        self.a = float(a)
        self.d = float(d)
        self.sigma0 = float(sigma0)
        self.sigma_y = float(sigma_y)

    @property
    def v(self):
        """Longitudinal speed (cm/s), :math:`\\hbar k / m`"""
        return self.hbar * self.k / self.mass

    @property
    def wavelength(self):
        return 2 * np.pi / self.k

    @property
    def fraunhofer_distance(self):
        """Onset of the far-field region, :math:`d^2 / \\lambda`"""
        return self.d ** 2 / self.wavelength

    @property
    def flight_time(self):
        """Time for the packet centre to travel from the slits to the detectors"""
        return self.L / self.v

    def spreading(self, sigma, t):
        """Width ratio :math:`\\sigma_t / \\sigma` of a free Gaussian packet."""
        tau = self.hbar * t / (2 * self.mass * sigma ** 2)
        return np.sqrt(1 + tau ** 2)

    @classmethod
    def electron(cls, L=1e2, v=1e10, a=2e-2, d=2e-4, sigma0=2e-4, sigma_y=None):
        """Electron parameters in CGS units, with :math:`k = m v / \\hbar`."""
        return cls(HBAR, ELECTRON_MASS, ELECTRON_MASS * v / HBAR, L, a, d, sigma0, sigma_y)

    @classmethod
    def natural(cls, k=20.0, L=40.0, a=4.0, d=1.0, sigma0=0.5, sigma_y=0.05):
        """Parameters in units with :math:`\\hbar = m = 1`.

        The defaults give strongly overlapping packets at the detector plane,
        so that the interference pattern covers both sides of the axis.
        """
        return cls(1.0, 1.0, k, L, a, d, sigma0, sigma_y)

    def to_dict(self):
        return collections.OrderedDict([
            ('hbar', self.hbar), ('mass', self.mass), ('k', self.k), ('L', self.L),
            ('a', self.a), ('d', self.d), ('sigma0', self.sigma0),
            ('sigma_y', self.sigma_y)])

    @classmethod
    def from_dict(cls, doc, prefix='model'):
        """Build from a mapping with the keys of :meth:`to_dict`.

        An optional ``v`` entry is checked against :math:`\\hbar k / m` to a
        relative tolerance of 1e-12.
        """
        for key in _REQUIRED_KEYS:
            if key not in doc:
                raise ConfigError('{}.{}: missing'.format(prefix, key))
        params = cls(*[doc[key] for key in _REQUIRED_KEYS], sigma_y=doc.get('sigma_y'))
        if doc.get('v') is not None:
            if abs(doc['v'] - params.v) > 1e-12 * params.v:
                raise ConfigError('{}.v: {!r} disagrees with hbar*k/mass = {!r}'
                                  .format(prefix, doc['v'], params.v))
        return params

    def __eq__(self, other):
        if not isinstance(other, PhysicalParams):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return 'PhysicalParams({})'.format(
            ', '.join('{}={!r}'.format(key, value) for key, value in six.iteritems(self.to_dict())))


Evaluation = collections.namedtuple('Evaluation', 'R S grad_s node')
Evaluation.__doc__ = """Result of :func:`evaluate`.

``grad_s`` is the 4-vector of :math:`\\partial S / \\partial (x_1, y_1, x_2,
y_2)`. When ``node`` is true the density is below the node floor and
``grad_s`` is unreliable.
"""

SymmetryReport = collections.namedtuple(
    'SymmetryReport',
    'exchange reflection translation n_samples n_far_field tol')


def _merge_intervals(intervals):
    intervals = sorted(intervals)
    merged = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [tuple(interval) for interval in merged]


class TwoParticleWaveFunction(object):
    """Base class for two-particle models.

    Subclasses implement :meth:`log_psi` and :meth:`grad_log_psi`; phase,
    amplitude, density and velocity follow from those. The longitudinal
    factor is a rigid Gaussian packet of width ``sigma_y`` moving at
    :math:`v = \\hbar k / m` from ``y = 0`` at ``t = 0``, shared by all
    models.

    Parameters
    ----------
    params : :class:`PhysicalParams`
        Apparatus parameters
    """

    model_kind = None

    def __init__(self, params):
        if not isinstance(params, PhysicalParams):
            raise TypeError('params must be a PhysicalParams instance')
        self._params = params
        self._omega = params.hbar * params.k ** 2 / (2 * params.mass)
        self._peak_density = None

    @property
    def params(self):
        return self._params

    # Longitudinal packet

    def _log_chi(self, y, t):
        p = self._params
        s = p.sigma_y
        return (-0.25 * np.log(2 * np.pi * s * s)
                - (y - p.v * t) ** 2 / (4 * s * s)
                + 1j * (p.k * y - self._omega * t))

    def _dlog_chi(self, y, t):
        p = self._params
        return -(y - p.v * t) / (2 * p.sigma_y ** 2) + 1j * p.k

    def longitudinal_density(self, y, t):
        """Density of one particle's longitudinal coordinate (integrates to 1)."""
        p = self._params
        s = p.sigma_y
        return np.exp(-(y - p.v * t) ** 2 / (2 * s * s)) / np.sqrt(2 * np.pi * s * s)

    def longitudinal_centre(self, t):
        return self._params.v * t

    # Model-specific pieces

    def log_psi(self, q, t):
        """Complex logarithm of :math:`\\Psi` at configurations `q`."""
        raise NotImplementedError

    def grad_log_psi(self, q, t):
        """Gradient of :meth:`log_psi`, with shape ``q.shape``."""
        raise NotImplementedError

    def log_transverse(self, x1, x2, t):
        """Transverse factor of :meth:`log_psi`.

        Its imaginary part is the transverse phase :math:`S_\\perp / \\hbar`.
        """
        raise NotImplementedError

    def transverse_density(self, x1, x2, t):
        """Transverse factor of :math:`R^2`, integrating to 1 over the plane."""
        raise NotImplementedError

    def marginal_density(self, x1, t):
        """One-particle transverse marginal of :math:`R^2`."""
        raise NotImplementedError

    def transverse_widths(self, t):
        """Transverse packet widths at time `t`, as a tuple"""
        raise NotImplementedError

    def transverse_bound(self, t):
        """Upper bound of :meth:`transverse_density` at time `t`."""
        raise NotImplementedError

    def slit_support(self, t):
        """Transverse intervals where the packets are non-negligible.

        Each interval spans ``SUPPORT_SIGMAS`` packet widths either side of a
        packet centre; overlapping intervals are merged.
        """
        raise NotImplementedError

    def transverse_window(self, t):
        """Single interval covering :meth:`slit_support`."""
        support = self.slit_support(t)
        return (support[0][0], support[-1][1])

    # Derived quantities

    def psi(self, q, t):
        return np.exp(self.log_psi(np.asarray(q, dtype=np.float64), t))

    def amplitude(self, q, t):
        return np.exp(np.real(self.log_psi(np.asarray(q, dtype=np.float64), t)))

    def density(self, q, t):
        return np.exp(2 * np.real(self.log_psi(np.asarray(q, dtype=np.float64), t)))

    def phase(self, q, t):
        """Phase :math:`S` in action units.

        The superposition part of the phase is folded into
        :math:`(-\\pi\\hbar, \\pi\\hbar]`, so `S` is continuous modulo
        :math:`2\\pi\\hbar`; the gradient is analytic and unaffected.
        """
        return self._params.hbar * np.imag(self.log_psi(np.asarray(q, dtype=np.float64), t))

    def grad_phase(self, q, t):
        return self._params.hbar * np.imag(self.grad_log_psi(np.asarray(q, dtype=np.float64), t))

    def velocity(self, q, t):
        """Bohmian velocity :math:`\\nabla S / m` (no node check)."""
        return self.grad_phase(q, t) / self._params.mass

    def is_far_field(self, q):
        q = np.asarray(q)
        y_f = self._params.fraunhofer_distance
        return (q[..., 1] > y_f) & (q[..., 3] > y_f)

    @property
    def peak_density(self):
        """Maximum of :math:`R^2` at ``t = 0``"""
        if self._peak_density is None:
            self._peak_density = self._find_peak_density()
        return self._peak_density

    @property
    def node_floor(self):
        """Density below which a configuration counts as a node"""
        return NODE_FRACTION * self.peak_density

    def _find_peak_density(self):
        p = self._params
        widths = self.transverse_widths(0.0)
        scale = min(widths)
        start = np.array([p.a / 2, -p.a / 2])

        def objective(z):
            x = start + z * scale
            value = self.transverse_density(x[0], x[1], 0.0)
            return -np.log(value) if value > 0 else np.inf

        result = scipy.optimize.minimize(objective, np.zeros(2), method='Nelder-Mead',
                                         options={'xatol': 1e-10, 'fatol': 1e-14})
        best = start + result.x * scale
        transverse = max(self.transverse_density(best[0], best[1], 0.0),
                         self.transverse_density(start[0], start[1], 0.0))
        longitudinal = self.longitudinal_density(0.0, 0.0)
        return float(transverse * longitudinal ** 2)

    def to_dict(self):
        doc = self._params.to_dict()
        doc['model_kind'] = self.model_kind
        return doc


class DoubleSlitModel(TwoParticleWaveFunction):
    """Symmetrized double-slit model.

    .. math::

       \\Psi = N [\\psi_A(x_1, t) \\psi_B(x_2, t) + \\psi_B(x_1, t) \\psi_A(x_2, t)]
               \\chi(y_1, t) \\chi(y_2, t)

    where :math:`\\psi_A` and :math:`\\psi_B` are free Gaussian packets with
    zero transverse momentum centred on :math:`x = \\pm a/2`. The product
    is exchange symmetric by construction and reflection symmetric when both
    packets have the same width.

    Because the centre-of-mass factor of this state is a single free
    Gaussian, the pair sum obeys :math:`x_1 + x_2 = \\delta_0
    \\sigma_t/\\sigma_0` exactly (see :meth:`sum_growth`); in particular a
    pair launched on the axis keeps :math:`x_1 + x_2 = 0`.

    Parameters
    ----------
    params : :class:`PhysicalParams`
        Apparatus parameters
    sigma_b : float, optional
        Width of the packet at :math:`x = -a/2`. Defaults to ``sigma0``; a
        different value breaks reflection symmetry (negative control).
    """

    model_kind = 'double_slit'

    def __init__(self, params, sigma_b=None):
        super(DoubleSlitModel, self).__init__(params)
        if sigma_b is None:
            sigma_b = params.sigma0
        if not np.isfinite(sigma_b) or sigma_b <= 0:
            raise ConfigError('model.sigma_b: must be positive and finite, got {!r}'
                              .format(sigma_b))
        self._sigma_a = params.sigma0
        self._sigma_b = float(sigma_b)
        s2 = self._sigma_a ** 2 + self._sigma_b ** 2
        self._overlap = (np.sqrt(2 * self._sigma_a * self._sigma_b / s2)
                         * np.exp(-params.a ** 2 / (4 * s2)))
        self._norm = 1.0 / np.sqrt(2 + 2 * self._overlap ** 2)
        self._log_norm = np.log(self._norm)

    @property
    def symmetric(self):
        return self._sigma_a == self._sigma_b

    @property
    def overlap(self):
        """Overlap of the two slit packets (time independent)"""
        return self._overlap

    def _w(self, sigma, t):
        p = self._params
        return 1 + 1j * p.hbar * t / (2 * p.mass * sigma ** 2)

    def _packet(self, x, centre, sigma, w):
        log = (-0.25 * np.log(2 * np.pi * sigma * sigma) - 0.5 * np.log(w)
               - (x - centre) ** 2 / (4 * sigma * sigma * w))
        dlog = -(x - centre) / (2 * sigma * sigma * w)
        return log, dlog

    def _terms(self, x1, x2, t):
        half = self._params.a / 2
        w_a = self._w(self._sigma_a, t)
        w_b = self._w(self._sigma_b, t)
        la1, da1 = self._packet(x1, half, self._sigma_a, w_a)
        lb1, db1 = self._packet(x1, -half, self._sigma_b, w_b)
        la2, da2 = self._packet(x2, half, self._sigma_a, w_a)
        lb2, db2 = self._packet(x2, -half, self._sigma_b, w_b)
        t1 = la1 + lb2
        t2 = lb1 + la2
        shift = np.maximum(np.real(t1), np.real(t2))
        e1 = np.exp(t1 - shift)
        e2 = np.exp(t2 - shift)
        return shift, e1, e2, (da1, db1, da2, db2)

    def log_transverse(self, x1, x2, t):
        shift, e1, e2, _ = self._terms(x1, x2, t)
        with np.errstate(divide='ignore'):
            return self._log_norm + shift + np.log(e1 + e2)

    def log_psi(self, q, t):
        q = np.asarray(q, dtype=np.float64)
        # Longitudinal factors are summed first so that exchanging the
        # particles reproduces the result bit for bit.
        longitudinal = self._log_chi(q[..., 1], t) + self._log_chi(q[..., 3], t)
        return self.log_transverse(q[..., 0], q[..., 2], t) + longitudinal

    def grad_log_psi(self, q, t):
        q = np.asarray(q, dtype=np.float64)
        x1 = q[..., 0]
        x2 = q[..., 2]
        _, e1, e2, (da1, db1, da2, db2) = self._terms(x1, x2, t)
        z = e1 + e2
        with np.errstate(divide='ignore', invalid='ignore'):
            g1 = (e1 * da1 + e2 * db1) / z
            g2 = (e1 * db2 + e2 * da2) / z
        grad = np.empty(np.broadcast(q[..., 0], np.asarray(t)).shape + (4,), np.complex128)
        grad[..., 0] = g1
        grad[..., 1] = self._dlog_chi(q[..., 1], t)
        grad[..., 2] = g2
        grad[..., 3] = self._dlog_chi(q[..., 3], t)
        return grad

    def transverse_density(self, x1, x2, t):
        return np.exp(2 * np.real(self.log_transverse(x1, x2, t)))

    def marginal_density(self, x1, t):
        half = self._params.a / 2
        la, _ = self._packet(x1, half, self._sigma_a, self._w(self._sigma_a, t))
        lb, _ = self._packet(x1, -half, self._sigma_b, self._w(self._sigma_b, t))
        psi_a = np.exp(la)
        psi_b = np.exp(lb)
        cross = 2 * np.real(psi_a * np.conj(psi_b)) * self._overlap
        return self._norm ** 2 * (np.abs(psi_a) ** 2 + np.abs(psi_b) ** 2 + cross)

    def transverse_widths(self, t):
        p = self._params
        return (self._sigma_a * p.spreading(self._sigma_a, t),
                self._sigma_b * p.spreading(self._sigma_b, t))

    def transverse_bound(self, t):
        width_a, width_b = self.transverse_widths(t)
        # |psi_A psi_B + psi_B psi_A|^2 <= 4 max|psi_A|^2 max|psi_B|^2
        return 4 * self._norm ** 2 / (2 * np.pi * width_a * width_b)

    def slit_support(self, t):
        half = self._params.a / 2
        width_a, width_b = self.transverse_widths(t)
        return _merge_intervals([
            (half - SUPPORT_SIGMAS * width_a, half + SUPPORT_SIGMAS * width_a),
            (-half - SUPPORT_SIGMAS * width_b, -half + SUPPORT_SIGMAS * width_b)])

    def sum_growth(self, t, t0=0.0):
        """Factor by which :math:`x_1 + x_2` grows between `t0` and `t`.

        Only meaningful for the symmetric model, where it is exact.
        """
        if not self.symmetric:
            raise ValueError('sum_growth requires equal slit packet widths')
        sigma = self._sigma_a
        return self._params.spreading(sigma, t) / self._params.spreading(sigma, t0)

    def to_dict(self):
        doc = super(DoubleSlitModel, self).to_dict()
        if not self.symmetric:
            doc['sigma_b'] = self._sigma_b
        return doc


class PlaneWaveModel(TwoParticleWaveFunction):
    """Test model with a phase linear in the coordinates.

    .. math::

       S = \\hbar k_x (x_1 - x_2) + \\hbar k (y_1 + y_2)

    The amplitude is a product of Gaussian envelopes of width ``sigma0``
    that travel with the resulting constant velocities, so every trajectory
    is a straight line and :math:`R^2` is carried rigidly by the flow. This is
    not a solution of the Schrodinger equation; it exists to exercise the
    integrators and statistics against closed forms.

    Parameters
    ----------
    params : :class:`PhysicalParams`
        Apparatus parameters
    kx : float, optional
        Transverse wavenumber. Defaults to ``k / 100``.
    """

    model_kind = 'plane_wave'

    def __init__(self, params, kx=None):
        super(PlaneWaveModel, self).__init__(params)
        if kx is None:
            kx = params.k / 100
        if not np.isfinite(kx):
            raise ConfigError('model.kx: must be finite, got {!r}'.format(kx))
        self._kx = float(kx)

    @property
    def kx(self):
        return self._kx

    @property
    def transverse_speed(self):
        return self._params.hbar * self._kx / self._params.mass

    def _centres(self, t):
        half = self._params.a / 2
        u = self.transverse_speed * t
        return half + u, -half - u

    def _log_envelope(self, x, centre):
        s = self._params.sigma0
        return -0.25 * np.log(2 * np.pi * s * s) - (x - centre) ** 2 / (4 * s * s)

    def log_psi(self, q, t):
        q = np.asarray(q, dtype=np.float64)
        p = self._params
        c1, c2 = self._centres(t)
        real = (self._log_envelope(q[..., 0], c1) + self._log_envelope(q[..., 2], c2)
                - (q[..., 1] - p.v * t) ** 2 / (4 * p.sigma_y ** 2)
                - (q[..., 3] - p.v * t) ** 2 / (4 * p.sigma_y ** 2)
                - 0.5 * np.log(2 * np.pi * p.sigma_y ** 2))
        imag = self._kx * (q[..., 0] - q[..., 2]) + p.k * (q[..., 1] + q[..., 3])
        return real + 1j * imag

    def grad_log_psi(self, q, t):
        q = np.asarray(q, dtype=np.float64)
        p = self._params
        s = p.sigma0
        c1, c2 = self._centres(t)
        grad = np.empty(np.broadcast(q[..., 0], np.asarray(t)).shape + (4,), np.complex128)
        grad[..., 0] = -(q[..., 0] - c1) / (2 * s * s) + 1j * self._kx
        grad[..., 1] = self._dlog_chi(q[..., 1], t)
        grad[..., 2] = -(q[..., 2] - c2) / (2 * s * s) - 1j * self._kx
        grad[..., 3] = self._dlog_chi(q[..., 3], t)
        return grad

    def log_transverse(self, x1, x2, t):
        c1, c2 = self._centres(t)
        return (self._log_envelope(x1, c1) + self._log_envelope(x2, c2)
                + 1j * self._kx * (np.asarray(x1) - np.asarray(x2)))

    def transverse_density(self, x1, x2, t):
        c1, c2 = self._centres(t)
        return np.exp(2 * (self._log_envelope(x1, c1) + self._log_envelope(x2, c2)))

    def marginal_density(self, x1, t):
        c1, _ = self._centres(t)
        return np.exp(2 * self._log_envelope(x1, c1))

    def transverse_widths(self, t):
        return (self._params.sigma0, self._params.sigma0)

    def transverse_bound(self, t):
        return 1.0 / (2 * np.pi * self._params.sigma0 ** 2)

    def slit_support(self, t):
        c1, c2 = self._centres(t)
        half = SUPPORT_SIGMAS * self._params.sigma0
        return _merge_intervals([(c1 - half, c1 + half), (c2 - half, c2 + half)])

    def ballistic(self, c0, t):
        """Closed-form position at time `t` of the trajectory through `c0`."""
        dt = t - c0.t
        u = self.transverse_speed * dt
        v = self._params.v * dt
        return Configuration(c0.x1 + u, c0.y1 + v, c0.x2 - u, c0.y2 + v, t)

    def to_dict(self):
        doc = super(PlaneWaveModel, self).to_dict()
        doc['kx'] = self._kx
        return doc


MODEL_KINDS = collections.OrderedDict([
    (DoubleSlitModel.model_kind, DoubleSlitModel),
    (PlaneWaveModel.model_kind, PlaneWaveModel)
])


def build_double_slit_model(params, sigma_b=None):
    """Build the symmetrized two-Gaussian-slit model.

    Parameters
    ----------
    params : :class:`PhysicalParams`
        Apparatus parameters
    sigma_b : float, optional
        Width of the second slit packet; see :class:`DoubleSlitModel`

    Raises
    ------
    TypeError
        if `params` is not a :class:`PhysicalParams`
    ConfigError
        if `sigma_b` is not positive
    """
    return DoubleSlitModel(params, sigma_b)


def build_plane_wave_model(params, kx=None):
    return PlaneWaveModel(params, kx)


def model_to_dict(model):
    """Serialize a model to a JSON-compatible mapping."""
    return model.to_dict()


def model_from_dict(doc, prefix='model'):
    """Inverse of :func:`model_to_dict`.

    Raises
    ------
    ConfigError
        if the model kind is unknown or a parameter is invalid
    """
    kind = doc.get('model_kind', DoubleSlitModel.model_kind)
    if kind not in MODEL_KINDS:
        raise ConfigError('{}.model_kind: unknown model {!r} (expected one of {})'
                          .format(prefix, kind, ', '.join(MODEL_KINDS)))
    known = set(_REQUIRED_KEYS) | {'sigma_y', 'v', 'model_kind', 'sigma_b', 'kx'}
    for key in doc:
        if key not in known:
            raise ConfigError('{}.{}: unknown key'.format(prefix, key))
    params = PhysicalParams.from_dict(doc, prefix)
    if kind == PlaneWaveModel.model_kind:
        if 'sigma_b' in doc:
            raise ConfigError('{}.sigma_b: not used by the plane_wave model'.format(prefix))
        return PlaneWaveModel(params, doc.get('kx'))
    else:
        if 'kx' in doc:
            raise ConfigError('{}.kx: not used by the double_slit model'.format(prefix))
        return DoubleSlitModel(params, doc.get('sigma_b'))


def evaluate(model, c):
    """Evaluate amplitude, phase and phase gradient at a configuration.

    Parameters
    ----------
    model : :class:`TwoParticleWaveFunction`
        Model to evaluate
    c : :class:`~bohmergo.Configuration`
        Configuration

    Returns
    -------
    Evaluation
        ``(R, S, grad_s, node)``. `node` is set when :math:`R^2` is below
        :attr:`TwoParticleWaveFunction.node_floor`.
    """
    check_configuration(c)
    q = c.as_array()
    log = model.log_psi(q, c.t)
    R = float(np.exp(np.real(log)))
    S = float(model.params.hbar * np.imag(log))
    grad_s = model.grad_phase(q, c.t)
    node = bool(R * R < model.node_floor)
    if node:
        _logger.debug('Configuration %s is at a node (R^2 = %g)', c, R * R)
    return Evaluation(R, S, grad_s, node)


def density(model, c):
    """Probability density :math:`R^2` at a configuration."""
    check_configuration(c)
    return float(model.density(c.as_array(), c.t))


def numerical_grad_phase(model, q, t, h):
    """Central-difference gradient of the phase.

    Differences are taken of :math:`\\mathrm{Im}\\log\\Psi` and folded into
    :math:`(-\\pi, \\pi]` before dividing, so the result is free of the
    :math:`2\\pi` ambiguity of the phase itself.
    """
    q = np.asarray(q, dtype=np.float64)
    grad = np.empty(q.shape)
    for i in range(4):
        step = np.zeros(4)
        step[i] = h
        diff = np.imag(model.log_psi(q + step, t) - model.log_psi(q - step, t))
        grad[..., i] = _wrap_phase(diff) / (2 * h)
    return model.params.hbar * grad


def normalization(model, t=0.0, epsabs=1e-10):
    """Integral of :math:`R^2` over the slit support at time `t`.

    The longitudinal factor is normalized in closed form, so only the
    transverse plane is integrated, using adaptive quadrature.
    """
    support = model.slit_support(t)
    total = 0.0
    for lo1, hi1 in support:
        for lo2, hi2 in support:
            value, _ = scipy.integrate.dblquad(
                lambda x2, x1: model.transverse_density(x1, x2, t),
                lo1, hi1, lo2, hi2, epsabs=epsabs, epsrel=1e-10)
            total += value
    return total


def _sample_configurations(model, n, rng):
    p = model.params
    t = rng.uniform(0.0, p.flight_time, n)
    q = np.empty((n, 4))
    for i in (0, 2):
        lo = np.empty(n)
        hi = np.empty(n)
        for j in range(n):
            lo[j], hi[j] = model.transverse_window(t[j])
        q[:, i] = rng.uniform(lo, hi)
    for i in (1, 3):
        q[:, i] = model.longitudinal_centre(t) + p.sigma_y * rng.uniform(-4, 4, n)
    return q, t


def check_symmetries(model, n_samples, tol=1e-10, seed=None):
    """Measure violations of the model's symmetry conditions.

    Three violations are reported, each the maximum over the sampled
    configurations:

    exchange
        :math:`|\\Psi(x_2, y_2, x_1, y_1) - e^{i\\theta}\\Psi(x_1, y_1, x_2,
        y_2)| / R_{max}`, with the constant phase :math:`\\theta` taken from
        the sample of largest amplitude.
    reflection
        :math:`|R(-x_1, y_1, -x_2, y_2) - R(x_1, y_1, x_2, y_2)| / R_{max}`
    translation
        for far-field samples only, the change of the transverse phase
        :math:`S_\\perp` under a common shift :math:`x_i \\to x_i + h` with
        :math:`|h| \\leq d`, relative to :math:`\\max(|S_\\perp|, \\hbar)`. The
        longitudinal phase is left out; it does not depend on the shift but
        would dominate the scale. It is ``None`` when no sample is in the far
        field.

    Parameters
    ----------
    model : :class:`TwoParticleWaveFunction`
        Model to check
    n_samples : int
        Number of random configurations
    tol : float
        Tolerance echoed into the report
    seed : int, optional
        Seed for :func:`numpy.random.default_rng`
    """
    if n_samples < 1:
        raise ValueError('n_samples must be at least 1')
    rng = np.random.default_rng(seed)
    p = model.params
    q, t = _sample_configurations(model, n_samples, rng)
    r_max = np.sqrt(model.peak_density)

    log = model.log_psi(q, t)
    swapped = q[:, [2, 3, 0, 1]]
    log_swapped = model.log_psi(swapped, t)
    best = np.argmax(np.real(log))
    theta = np.imag(log_swapped[best] - log[best])
    exchange = np.max(np.abs(np.exp(log_swapped) - np.exp(1j * theta) * np.exp(log))) / r_max

    reflected = q * np.array([-1.0, 1.0, -1.0, 1.0])
    reflection = np.max(np.abs(model.amplitude(reflected, t) - np.exp(np.real(log)))) / r_max

    far = model.is_far_field(q)
    n_far = int(np.sum(far))
    translation = None
    if n_far:
        h = rng.uniform(-p.d, p.d, n_far)
        x1 = q[far, 0]
        x2 = q[far, 2]
        before = np.imag(model.log_transverse(x1, x2, t[far]))
        after = np.imag(model.log_transverse(x1 + h, x2 + h, t[far]))
        change = np.abs(_wrap_phase(after - before)) * p.hbar
        scale = np.maximum(np.abs(before) * p.hbar, p.hbar)
        translation = float(np.max(change / scale))
    report = SymmetryReport(float(exchange), float(reflection), translation,
                            n_samples, n_far, tol)
    _logger.info('Symmetry check on %d samples (%d far field): exchange %.3g, '
                 'reflection %.3g, translation %s',
                 n_samples, n_far, report.exchange, report.reflection, translation)
    return report
