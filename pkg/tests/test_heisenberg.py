import numpy as np
import pytest

from heisenqk.heisenberg import (
    CenterLabeling,
    ChartPoint,
    GroupPoint,
    check_k,
    group_inverse,
    group_multiply,
    left_invariant_coframe,
    left_invariant_frame,
    structure_constants,
)


def _flow_bracket(k, p, h=1e-4):
    """[w2, w3] at p from the Jacobians of the frame fields (central differences)."""

    def field(i, q):
        return left_invariant_frame(k, q)[i]

    def jac(i, q):
        cols = []
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            cols.append((field(i, q + e) - field(i, q - e)) / (2 * h))
        return np.array(cols).T

    return jac(2, p) @ field(1, p) - jac(1, p) @ field(2, p)


class TestGroupLaw:
    def test_identity(self):
        assert group_multiply((0, 0, 0), (1.5, -2.0, 0.25)).as_array().tolist() == [1.5, -2.0, 0.25]

    def test_product_of_generators(self):
        # the cocycle y a - x b makes the two orders differ in z by 2
        assert group_multiply((0, 1, 0), (1, 0, 0)).as_array().tolist() == [1.0, 1.0, 1.0]
        assert group_multiply((1, 0, 0), (0, 1, 0)).as_array().tolist() == [1.0, 1.0, -1.0]

    def test_inverse(self):
        p = (0.3, -1.2, 2.5)
        assert np.allclose(group_multiply(p, group_inverse(p)).as_array(), 0.0)

    def test_associative(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p, q, r = rng.normal(size=(3, 3))
            lhs = group_multiply(group_multiply(p, q), r).as_array()
            rhs = group_multiply(p, group_multiply(q, r)).as_array()
            assert np.allclose(lhs, rhs, atol=1e-12)

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            check_k(0.0)
        with pytest.raises(ValueError):
            left_invariant_frame(-1.0, (0, 0, 0))


class TestFrame:
    def test_origin(self):
        assert left_invariant_frame(1.0, (0, 0, 0))[1].tolist() == [1.0, 0.0, 0.0]

    def test_w2_picks_up_ky(self):
        assert left_invariant_frame(1.0, (0, 2, 0))[1].tolist() == [1.0, 0.0, 2.0]

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_duality(self, k):
        rng = np.random.default_rng(1)
        for p in rng.normal(size=(10, 3)):
            pairing = left_invariant_coframe(k, p) @ left_invariant_frame(k, p).T
            assert np.array_equal(pairing, np.eye(3))

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_bracket(self, k):
        rng = np.random.default_rng(2)
        for p in rng.normal(size=(5, 3)):
            br = _flow_bracket(k, p)
            assert np.allclose(br, -2 * k * left_invariant_frame(k, p)[0], atol=1e-8)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_coframe_left_invariant(self, k):
        # pull back by L_g: (dL_g)^T theta(g.p) = theta(p), with dL_g the Jacobian of q -> g.q
        rng = np.random.default_rng(3)
        for g, p in rng.normal(size=(10, 2, 3)):
            x, y, _ = g
            jac = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [k * y, -k * x, 1.0]])
            gp = group_multiply(g, p, k=k).as_array()
            assert np.allclose(left_invariant_coframe(k, gp) @ jac, left_invariant_coframe(k, p), atol=1e-12)

    def test_dw1(self):
        # w^1 = dz - k y dx + k x dy, so d w^1 = 2k dx^dy
        k, h = 1.7, 1e-6
        p = np.array([0.4, -0.3, 0.9])
        d = lambda j: (left_invariant_coframe(k, p + h * np.eye(3)[j])[0] - left_invariant_coframe(k, p - h * np.eye(3)[j])[0]) / (2 * h)
        dxy = d(0)[1] - d(1)[0]
        assert abs(dxy - 2 * k) < 1e-8
        assert abs(d(0)[2] - d(2)[0]) < 1e-8 and abs(d(1)[2] - d(2)[1]) < 1e-8


class TestStructureConstants:
    def test_timelike(self):
        c = structure_constants(CenterLabeling.TimelikeOrRiemannian, 1.5).c
        assert c[0, 1, 2] == -3.0 and c[0, 2, 1] == 3.0
        assert np.count_nonzero(c) == 2

    def test_spacelike(self):
        assert structure_constants(CenterLabeling.Spacelike, 1.0).c[2, 0, 1] == -2.0

    def test_lightlike(self):
        # slots (u, v, 3): [e_v, e_3] = -2k e_u
        assert structure_constants(CenterLabeling.Lightlike, 1.0).c[0, 1, 2] == -2.0


def test_chart_point_roundtrip():
    p = ChartPoint(0.1, 1.0, 2.0, 3.0)
    assert p.as_array().tolist() == [0.1, 1.0, 2.0, 3.0]
    assert p.group_point == GroupPoint(1.0, 2.0, 3.0)
