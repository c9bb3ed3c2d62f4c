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

import numpy as np
import scipy.integrate
from nose.tools import (
    assert_equal, assert_true, assert_false, assert_less, assert_greater,
    assert_almost_equal, assert_raises, assert_is_instance)

from bohmergo import ConfigError, Configuration
from bohmergo import wavefunction
from bohmergo.wavefunction import (
    PhysicalParams, DoubleSlitModel, PlaneWaveModel, build_double_slit_model)


def natural_model(**kwargs):
    return build_double_slit_model(PhysicalParams.natural(), **kwargs)


def direct_velocity(p, q, t):
    """hbar Im(grad Psi / Psi) / m from the linear-space superposition."""
    def packet(x, centre):
        w = 1 + 1j * p.hbar * t / (2 * p.mass * p.sigma0 ** 2)
        psi = ((2 * np.pi * p.sigma0 ** 2) ** -0.25 / np.sqrt(w)
               * np.exp(-(x - centre) ** 2 / (4 * p.sigma0 ** 2 * w)))
        return psi, psi * -(x - centre) / (2 * p.sigma0 ** 2 * w)

    a1, da1 = packet(q[:, 0], p.a / 2)
    b1, db1 = packet(q[:, 0], -p.a / 2)
    a2, da2 = packet(q[:, 2], p.a / 2)
    b2, db2 = packet(q[:, 2], -p.a / 2)
    psi = a1 * b2 + b1 * a2
    grad = np.empty(q.shape, np.complex128)
    grad[:, 0] = (da1 * b2 + db1 * a2) / psi
    grad[:, 2] = (a1 * db2 + b1 * da2) / psi
    for axis in (1, 3):
        grad[:, axis] = -(q[:, axis] - p.v * t) / (2 * p.sigma_y ** 2) + 1j * p.k
    return p.hbar * np.imag(grad) / p.mass


class TestPhysicalParams(object):
    def test_natural(self):
        p = PhysicalParams.natural()
        assert_equal(1.0, p.hbar)
        assert_equal(20.0, p.v)
        assert_equal(2.0, p.flight_time)
        assert_almost_equal(np.sqrt(17.0), p.spreading(p.sigma0, 2.0), places=12)

    def test_electron(self):
        p = PhysicalParams.electron()
        assert_almost_equal(1e10, p.v, delta=1e-2)
        assert_almost_equal(1e-8, p.flight_time, delta=1e-20)
        assert_almost_equal(55.0, p.fraunhofer_distance, delta=0.1)
        assert_almost_equal(1.0104, p.spreading(p.sigma0, p.flight_time), delta=1e-4)

    def test_invalid(self):
        with assert_raises(ConfigError) as cm:
            PhysicalParams(1.0, 1.0, 20.0, 40.0, 4.0, 1.0, -0.5)
        assert_true(str(cm.exception).startswith('model.sigma0'))
        assert_raises(ConfigError, PhysicalParams, 1.0, 1.0, 20.0, 40.0, 4.0, 4.0, 0.5)
        assert_raises(ConfigError, PhysicalParams, 1.0, 1.0, 20.0, 4.0, 4.0, 1.0, 0.5)
        assert_raises(ConfigError, PhysicalParams, 1.0, 1.0, float('nan'), 40.0, 4.0, 1.0, 0.5)
        assert_raises(ConfigError, PhysicalParams, 1.0, True, 20.0, 40.0, 4.0, 1.0, 0.5)

    def test_from_dict_checks_speed(self):
        doc = PhysicalParams.natural().to_dict()
        doc['v'] = 20.0
        assert_equal(PhysicalParams.natural(), PhysicalParams.from_dict(doc))
        doc['v'] = 21.0
        with assert_raises(ConfigError) as cm:
            PhysicalParams.from_dict(doc)
        assert_true(str(cm.exception).startswith('model.v'))

    def test_missing_key(self):
        doc = PhysicalParams.natural().to_dict()
        del doc['k']
        with assert_raises(ConfigError) as cm:
            PhysicalParams.from_dict(doc)
        assert_equal('model.k: missing', str(cm.exception))


class TestDoubleSlitModel(object):
    model = natural_model()

    def random_points(self, n, t):
        rng = np.random.default_rng(1)
        q = np.empty((n, 4))
        q[:, 0] = rng.uniform(-4, 4, n)
        q[:, 2] = rng.uniform(-4, 4, n)
        q[:, 1] = self.model.params.v * t + rng.uniform(-0.1, 0.1, n)
        q[:, 3] = self.model.params.v * t + rng.uniform(-0.1, 0.1, n)
        return q

    def test_normalization(self):
        for t in [0.0, 1.0]:
            assert_almost_equal(1.0, wavefunction.normalization(self.model, t), delta=1e-6)

    def test_marginal(self):
        t = 0.5
        lo, hi = self.model.transverse_window(t)
        for x1 in [-2.0, 0.1, 1.7]:
            value, _ = scipy.integrate.quad(
                lambda x2: self.model.transverse_density(x1, x2, t), lo, hi,
                points=[-2.0, 0.0, 2.0], limit=200, epsabs=1e-12, epsrel=1e-12)
            assert_almost_equal(value, self.model.marginal_density(x1, t), delta=1e-8)

    def test_longitudinal_density(self):
        t = 1.0
        centre = self.model.longitudinal_centre(t)
        assert_equal(20.0, centre)
        value, _ = scipy.integrate.quad(
            lambda y: self.model.longitudinal_density(y, t), centre - 1.0, centre + 1.0,
            points=[centre], epsabs=1e-12)
        assert_almost_equal(1.0, value, delta=1e-10)
        q = self.random_points(20, t)
        factored = (self.model.transverse_density(q[:, 0], q[:, 2], t)
                    * self.model.longitudinal_density(q[:, 1], t)
                    * self.model.longitudinal_density(q[:, 3], t))
        np.testing.assert_allclose(self.model.density(q, t), factored, rtol=1e-10, atol=1e-300)

    def test_phase_gradient(self):
        t = 0.3
        q = self.random_points(40, t)
        analytic = self.model.grad_phase(q, t)
        numeric = wavefunction.numerical_grad_phase(self.model, q, t, 1e-6)
        rho = self.model.density(q, t)
        good = rho > 1e-6 * self.model.peak_density
        assert_greater(np.sum(good), 5)
        np.testing.assert_allclose(numeric[good], analytic[good], rtol=1e-5, atol=1e-4)

    def test_longitudinal_velocity(self):
        t = 0.7
        q = self.random_points(10, t)
        v = self.model.velocity(q, t)
        np.testing.assert_allclose(v[:, 1], 20.0, rtol=1e-14)
        np.testing.assert_allclose(v[:, 3], 20.0, rtol=1e-14)

    def test_sum_velocity(self):
        """The pair sum moves with the centre-of-mass packet."""
        p = self.model.params
        t = 0.9
        q = self.random_points(50, t)
        v = self.model.velocity(q, t)
        tau = p.hbar * t / (2 * p.mass * p.sigma0 ** 2)
        rate = tau * p.hbar / (2 * p.mass * p.sigma0 ** 2) / (1 + tau ** 2)
        expected = (q[:, 0] + q[:, 2]) * rate
        rho = self.model.density(q, t)
        good = rho > 1e-8 * self.model.peak_density
        np.testing.assert_allclose(v[good, 0] + v[good, 2], expected[good], rtol=1e-8, atol=1e-9)

    def test_velocity_complex_form(self):
        p = self.model.params
        for t in [0.3, p.flight_time]:
            q = self.random_points(1000, t)
            rho = self.model.density(q, t)
            good = rho > 1e-8 * self.model.peak_density
            assert_greater(np.sum(good), 100)
            np.testing.assert_allclose(self.model.velocity(q[good], t),
                                       direct_velocity(p, q[good], t), rtol=1e-8, atol=1e-10)

    def test_sum_growth(self):
        p = self.model.params
        assert_equal(1.0, self.model.sum_growth(0.0))
        assert_almost_equal(np.sqrt(17.0), self.model.sum_growth(2.0), places=12)
        assert_almost_equal(p.spreading(p.sigma0, 2.0) / p.spreading(p.sigma0, 1.0),
                            self.model.sum_growth(2.0, 1.0), places=12)
        assert_raises(ValueError, natural_model(sigma_b=1.0).sum_growth, 1.0)

    def test_bound(self):
        for t in [0.0, 0.5, 2.0]:
            lo, hi = self.model.transverse_window(t)
            x = np.linspace(lo, hi, 401)
            rho = self.model.transverse_density(x[:, None], x[None, :], t)
            assert_less(np.max(rho), self.model.transverse_bound(t))

    def test_support_merges(self):
        support = self.model.slit_support(0.0)
        assert_equal([(-5.0, 5.0)], support)
        narrow = build_double_slit_model(PhysicalParams.natural(sigma0=0.1, d=0.2))
        assert_equal(2, len(narrow.slit_support(0.0)))

    def test_evaluate(self):
        c = Configuration(2.0, 0.0, -2.0, 0.0, 0.0)
        result = wavefunction.evaluate(self.model, c)
        assert_false(result.node)
        assert_almost_equal(result.R ** 2, wavefunction.density(self.model, c), places=12)
        assert_equal((4,), result.grad_s.shape)
        far = wavefunction.evaluate(self.model, Configuration(50.0, 0.0, 50.0, 0.0, 0.0))
        assert_true(far.node)
        assert_raises(ValueError, wavefunction.evaluate, self.model,
                      Configuration(float('inf'), 0.0, 0.0, 0.0, 0.0))

    def test_exchange_bit_exact(self):
        q = self.random_points(100, 0.4)
        log = self.model.log_psi(q, 0.4)
        swapped = self.model.log_psi(q[:, [2, 3, 0, 1]], 0.4)
        np.testing.assert_array_equal(log, swapped)

    def test_symmetries_electron(self):
        model = build_double_slit_model(PhysicalParams.electron())
        report = wavefunction.check_symmetries(model, 200, seed=3)
        assert_less(report.exchange, 1e-10)
        assert_less(report.reflection, 1e-10)
        assert_greater(report.n_far_field, 0)
        # The centre-of-mass packet keeps spreading, so its phase depends on
        # x1 + x2 away from the axis
        assert_greater(report.translation, 1e-3)

    def test_transverse_phase(self):
        q = self.random_points(20, 0.6)
        log = self.model.log_psi(q, 0.6)
        transverse = self.model.log_transverse(q[:, 0], q[:, 2], 0.6)
        longitudinal = log - transverse
        moved = q.copy()
        moved[:, [0, 2]] += 0.3
        shifted = self.model.log_psi(moved, 0.6) - self.model.log_transverse(
            moved[:, 0], moved[:, 2], 0.6)
        np.testing.assert_allclose(longitudinal, shifted, rtol=1e-12)

    def test_asymmetric_breaks_reflection(self):
        model = natural_model(sigma_b=1.0)
        assert_false(model.symmetric)
        report = wavefunction.check_symmetries(model, 200, seed=3)
        assert_less(report.exchange, 1e-10)
        assert_greater(report.reflection, 1e-3)

    def test_invalid_sigma_b(self):
        assert_raises(ConfigError, natural_model, sigma_b=0.0)
        assert_raises(TypeError, DoubleSlitModel, {'k': 1})


class TestPlaneWaveModel(object):
    model = PlaneWaveModel(PhysicalParams.natural(), kx=0.5)

    def test_velocity_constant(self):
        q = np.array([[2.0, 0.0, -2.0, 0.0], [1.0, 0.1, -3.0, -0.1]])
        v = self.model.velocity(q, 0.0)
        np.testing.assert_allclose(v, [[0.5, 20.0, -0.5, 20.0]] * 2)

    def test_ballistic(self):
        c0 = Configuration(2.0, 0.0, -2.0, 0.0, 0.0)
        c1 = self.model.ballistic(c0, 1.0)
        assert_equal(Configuration(2.5, 20.0, -2.5, 20.0, 1.0), c1)

    def test_density_transported(self):
        c0 = np.array([2.3, 0.02, -1.6, -0.03])
        c1 = np.array(self.model.ballistic(Configuration.from_array(c0, 0.0), 1.5)[:4])
        np.testing.assert_allclose(self.model.density(c1, 1.5), self.model.density(c0, 0.0),
                                   rtol=1e-12)

    def test_translation_exact(self):
        report = wavefunction.check_symmetries(self.model, 200, seed=5)
        assert_greater(report.n_far_field, 0)
        assert_less(report.translation, 1e-12)

    def test_default_kx(self):
        assert_equal(0.2, PlaneWaveModel(PhysicalParams.natural()).kx)


class TestSerialization(object):
    def test_double_slit(self):
        model = natural_model(sigma_b=1.0)
        doc = wavefunction.model_to_dict(model)
        assert_equal('double_slit', doc['model_kind'])
        assert_equal(1.0, doc['sigma_b'])
        clone = wavefunction.model_from_dict(doc)
        assert_is_instance(clone, DoubleSlitModel)
        assert_equal(doc, clone.to_dict())

    def test_symmetric_omits_sigma_b(self):
        assert_false('sigma_b' in natural_model().to_dict())

    def test_plane_wave(self):
        doc = PlaneWaveModel(PhysicalParams.natural(), kx=0.5).to_dict()
        clone = wavefunction.model_from_dict(doc)
        assert_is_instance(clone, PlaneWaveModel)
        assert_equal(0.5, clone.kx)

    def test_errors(self):
        doc = natural_model().to_dict()
        with assert_raises(ConfigError) as cm:
            wavefunction.model_from_dict(dict(doc, model_kind='triple_slit'))
        assert_true(str(cm.exception).startswith('model.model_kind'))
        with assert_raises(ConfigError) as cm:
            wavefunction.model_from_dict(dict(doc, colour='blue'))
        assert_equal('model.colour: unknown key', str(cm.exception))
        assert_raises(ConfigError, wavefunction.model_from_dict,
                      dict(doc, model_kind='plane_wave', sigma_b=1.0))
        assert_raises(ConfigError, wavefunction.model_from_dict, dict(doc, kx=1.0))

    def test_default_kind(self):
        doc = PhysicalParams.natural().to_dict()
        assert_is_instance(wavefunction.model_from_dict(doc), DoubleSlitModel)

