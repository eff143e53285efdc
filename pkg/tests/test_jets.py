import math

import numpy as np

from heisenqk import jets
from heisenqk.jets import Jet


class TestJetArithmetic:
    def test_polynomial_derivatives(self):
        x, y = Jet.coordinates(np.array([[0.7, -1.3]]), 3)
        f = x * x * y + y * y * y
        assert np.isclose(f.value[0], 0.7**2 * -1.3 + (-1.3) ** 3)
        assert np.isclose(f.diff(0).value[0], 2 * 0.7 * -1.3)
        assert np.isclose(f.diff(1).diff(1).value[0], 6 * -1.3)
        assert np.isclose(f.diff(0).diff(0).diff(1).value[0], 2.0)

    def test_elementary_functions(self):
        t = Jet.variable(np.array([0.4]), 0, 1, 3)
        for fn, d1, d2 in [
            (jets.exp, math.exp, math.exp),
            (jets.log, lambda v: 1 / v, lambda v: -1 / v**2),
            (jets.sqrt, lambda v: 0.5 / math.sqrt(v), lambda v: -0.25 * v**-1.5),
            (jets.sinh, math.cosh, math.sinh),
        ]:
            j = fn(t)
            assert np.isclose(j.diff(0).value[0], d1(0.4), rtol=1e-13)
            assert np.isclose(j.diff(0).diff(0).value[0], d2(0.4), rtol=1e-13)

    def test_power_matches_sqrt(self):
        t = Jet.variable(np.array([2.0]), 0, 1, 3)
        assert np.allclose(jets.power(t, 0.5).coef, jets.sqrt(t).coef)

    def test_division_and_inverse(self):
        t = Jet.variable(np.array([1.5]), 0, 1, 3)
        q = 1.0 / (1.0 + t * t)
        # d/dt (1 + t^2)^-1 = -2t (1 + t^2)^-2
        assert np.isclose(q.diff(0).value[0], -3.0 / (3.25**2))

    def test_matrix_inverse(self):
        x, y = Jet.coordinates(np.array([[0.2, 0.5]]), 2)
        one = x * 0 + 1
        m = jets.stack([jets.stack([one + x, y], 0), jets.stack([y, one + x * y], 0)], 0)
        inv = jets.matrix_inverse(m)
        prod = jets.einsum("ij...,jk...->ik...", m, inv)
        assert np.allclose(prod.value[..., 0], np.eye(2))
        assert np.allclose(prod.diff(0).value, 0.0, atol=1e-14)
        assert np.allclose(prod.diff(1).diff(0).value, 0.0, atol=1e-13)
