import numpy as np
import pytest

from heisenqk.geometry import (
    FrameEvolution,
    FrameKind,
    MetricField,
    bianchi_residual,
    christoffel,
    covariant_derivative_riemann,
    curvature_report,
    einstein_residual,
    exterior_derivative,
    frame_components,
    hodge_star_2forms,
    kretschmann,
    metric_from_evolution,
    ricci,
    scalar_curvature,
    select_orientation,
    weyl_eigenvalues,
    weyl_selfduality,
    weyl_trace_residual,
)
from heisenqk.heisenberg import CenterLabeling, left_invariant_coframe
from heisenqk.jets import Jet
from heisenqk.solutions import SolutionSpec

RNG = np.random.default_rng(7)


def random_points(n, t_range=(-0.3, 0.3)):
    return np.column_stack([RNG.uniform(*t_range, n), RNG.uniform(-2, 2, (n, 3))])


def constant_metric(G):
    """Constant metric G as a MetricField (coframe from a Cholesky-type factor)."""
    w, V = np.linalg.eigh(G)
    theta = np.sqrt(np.abs(w))[:, None] * V.T
    eta = np.diag(np.sign(w))

    def coframe(X):
        zero = X[0] * 0.0
        return Jet.constant(np.broadcast_to(theta[..., None], (4, 4) + X[0].value.shape), 4, X[0].order) + zero

    return MetricField(coframe=coframe, eta4=eta)


def scaled(g: MetricField, phi: float) -> MetricField:
    return MetricField(coframe=lambda X: g.coframe(X) * np.exp(phi), eta4=g.eta4, domain=g.domain)


STATIONARY = SolutionSpec.make("StationaryTimelike", k=1, eps=1)


class TestMetricConstruction:
    def test_identity_evolution_at_t0(self):
        fe = FrameEvolution(eps=1, kind=FrameKind.Orthonormal, labeling=CenterLabeling.TimelikeOrRiemannian, k=1.0)
        p = np.array([0.0, 0.5, -1.0, 2.0])
        th = left_invariant_coframe(1.0, p[1:])
        expect = np.zeros((4, 4))
        expect[0, 0] = 1.0
        expect[1:, 1:] = th.T @ th
        assert np.allclose(metric_from_evolution(fe)(p), expect, atol=1e-15)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_stationary_closed_form(self, eps):
        k = 1.3
        spec = SolutionSpec.make("StationaryTimelike", k=k, eps=eps)
        for p in random_points(5):
            dt = p[0]
            e1, e2, e3 = left_invariant_coframe(k, p[1:])
            expect = np.zeros((4, 4))
            expect[0, 0] = eps
            expect[1:, 1:] = eps * np.exp(4 * k * dt) * np.outer(e1, e1) + np.exp(2 * k * dt) * (np.outer(e2, e2) + np.outer(e3, e3))
            assert np.allclose(spec.metric()(p), expect, rtol=1e-13, atol=1e-13)

    def test_flat_lightlike_closed_form(self):
        k = 0.8
        spec = SolutionSpec.make("HyperKahlerLightlike", k=k)
        for p in random_points(5):
            dt = p[0]
            eu, ev, e3 = left_invariant_coframe(k, p[1:])
            expect = np.zeros((4, 4))
            expect[0, 0] = -1.0
            expect[1:, 1:] = np.outer(eu, ev) + np.outer(ev, eu) + 4 * k * dt * np.outer(ev, ev) + np.outer(e3, e3)
            assert np.allclose(spec.metric()(p), expect, atol=1e-13)

    def test_singular_frame_rejected(self):
        fe = FrameEvolution(
            eps=1, kind=FrameKind.Orthonormal, labeling=CenterLabeling.TimelikeOrRiemannian, k=1.0,
            entries={"a": lambda t: 0.0 * t},
        )
        with pytest.raises(ValueError):
            metric_from_evolution(fe)(np.zeros(4))


class TestChristoffel:
    def test_constant_metric(self):
        assert np.all(christoffel(constant_metric(np.eye(4)), np.zeros(4)) == 0.0)

    def test_symmetric(self):
        G = christoffel(STATIONARY.metric(), random_points(4))
        assert np.array_equal(G, np.swapaxes(G, -1, -2))


class TestEinstein:
    def test_stationary(self):
        assert einstein_residual(STATIONARY.metric(), -6.0, random_points(20)) < 1e-8
        assert einstein_residual(STATIONARY.metric(), -6.0, random_points(20), basis="coordinate") < 1e-8

    def test_wrong_lambda(self):
        pts = random_points(5)
        g = STATIONARY.metric()
        min_g = np.min(np.abs(frame_components(g, pts, np.moveaxis(g(pts), 0, -1))[np.nonzero(np.eye(4))]))
        assert einstein_residual(g, 0.0, pts) >= 6.0 * min_g - 1e-8

    def test_flat(self):
        g = SolutionSpec.make("HyperKahlerLightlike").metric()
        assert np.max(np.abs(ricci(g, random_points(5)))) < 1e-10

    @pytest.mark.parametrize(
        "spec",
        [
            STATIONARY,
            SolutionSpec.make("NegativeTimelike", epslambda=-1),
            SolutionSpec.make("PositiveTimelike", eps=-1, epslambda=3),
            SolutionSpec.make("LightlikeQPK", lam=3),
        ],
        ids=lambda s: s.label,
    )
    def test_scalar_is_4_lambda(self, spec):
        pts = np.column_stack([spec.sample_times(6), RNG.uniform(-2, 2, (6, 3))])
        assert np.max(np.abs(scalar_curvature(spec.metric(), pts) - 4 * spec.lam)) < 1e-8
        assert bianchi_residual(spec.metric(), pts) < 1e-9
        assert weyl_trace_residual(spec.metric(), pts) < 1e-9


class TestHodge:
    def test_euclidean_convention(self):
        S = hodge_star_2forms(constant_metric(np.eye(4)), 1, np.zeros(4))
        # basis (01, 02, 03, 12, 13, 23): *(dt^dx) = dy^dz
        assert np.allclose(S[:, 0], np.eye(6)[5])

    @pytest.mark.parametrize("family", ["StationaryTimelike", "StationarySpacelike", "HyperKahlerLightlike"])
    def test_involution(self, family):
        g = SolutionSpec.make(family).metric()
        for S in hodge_star_2forms(g, 1, random_points(3)):
            w = RNG.normal(size=6)
            assert np.allclose(S @ (S @ w), w, atol=1e-10 * np.linalg.norm(S) ** 2)

    def test_orientation_flip(self):
        p = random_points(1)[0]
        g = STATIONARY.metric()
        assert np.allclose(hodge_star_2forms(g, -1, p), -hodge_star_2forms(g, 1, p))


class TestWeyl:
    def test_stationary_selfdual(self):
        o, res = select_orientation(STATIONARY.metric(), random_points(20))
        assert res[o] < 1e-8
        assert res[-o] > 1.0

    def test_qpk_conformally_flat(self):
        _, res = select_orientation(SolutionSpec.make("LightlikeQPK", lam=3).metric(), random_points(10))
        assert max(res.values()) < 1e-8

    def test_conformal_scaling(self):
        g = STATIONARY.metric()
        p = random_points(1)[0]
        phi = 0.37
        W1 = weyl_selfduality(g, -1, p)
        W2 = weyl_selfduality(scaled(g, phi), -1, p)
        assert np.allclose(W2, np.exp(2 * phi) * W1, rtol=1e-10, atol=1e-10)

    def test_eigenvalue_pinning(self):
        sd, _ = weyl_eigenvalues(STATIONARY.metric(), 1, np.zeros(4))
        assert np.allclose(np.sort(sd), [-4.0, -4.0, 8.0], atol=1e-10)

    def test_flat_eigenvalues(self):
        sd, asd = weyl_eigenvalues(SolutionSpec.make("HyperKahlerLightlike").metric(), 1, random_points(3))
        assert np.max(np.abs(sd)) < 1e-10 and np.max(np.abs(asd)) < 1e-10

    def test_report_consistency(self):
        rep = curvature_report(STATIONARY.metric(), random_points(3))
        assert rep.orientation == 1
        assert np.allclose(np.sort(rep.sd_eigenvalues, axis=1), [[-4.0, -4.0, 8.0]] * 3, atol=1e-9)
        assert np.allclose(rep.scalar, -24.0)


class TestForms:
    def test_d_dt(self):
        X = Jet.coordinates(random_points(3), 1)
        dt = Jet.constant(np.broadcast_to(np.array([1.0, 0, 0, 0])[:, None], (4, 3)), 4, 1) + X[0] * 0.0
        assert np.max(np.abs(exterior_derivative(dt).value)) == 0.0

    def test_d_w1(self):
        k = 1.4
        X = Jet.coordinates(random_points(3), 1)
        t, x, y, z = X
        w1 = [t * 0.0, y * -k, x * k, t * 0.0 + 1.0]
        from heisenqk import jets

        d = exterior_derivative(jets.stack(w1, 0)).value
        expect = np.zeros((4, 4))
        expect[1, 2], expect[2, 1] = 2 * k, -2 * k
        assert np.allclose(d, expect[..., None])


class TestLocalSymmetry:
    def test_stationary(self):
        assert covariant_derivative_riemann(STATIONARY.metric(), random_points(4)) < 1e-7
        spec = SolutionSpec.make("StationarySpacelike")
        pts = np.column_stack([spec.sample_times(4), RNG.uniform(-2, 2, (4, 3))])
        assert covariant_derivative_riemann(spec.metric(), pts) < 1e-7

    def test_one_loop_not_symmetric(self):
        spec = SolutionSpec.make("NegativeTimelike", epslambda=-12)
        assert spec.gamma != 0
        assert covariant_derivative_riemann(spec.metric(), np.array([0.1, 0.3, -0.2, 0.5])) > 1e-3


class TestKretschmann:
    def test_flat(self):
        assert np.max(np.abs(kretschmann(SolutionSpec.make("HyperKahlerLightlike").metric(), random_points(3)))) < 1e-10

    def test_stationary_constant(self):
        K = kretschmann(STATIONARY.metric(), random_points(6, (-2, 2)))
        assert np.ptp(K) < 1e-8 * np.max(np.abs(K))

    def test_hyperkahler_blows_up(self):
        k = 1.0
        spec = SolutionSpec.make("HyperKahlerTimelike", k=k)
        end = -1.0 / (3 * k)
        ts = end + np.geomspace(0.3, 1e-4, 8)
        K = np.abs(kretschmann(spec.metric(), np.column_stack([ts, np.full((8, 3), 0.2)])))
        assert np.all(np.diff(K) > 0) and K[-1] > 1e6 * K[0]


def test_frame_components_of_metric():
    g = SolutionSpec.make("PositiveSpacelike", lam=3).metric()
    pts = random_points(4, (-0.05, 0.05))
    G = frame_components(g, pts, np.moveaxis(g(pts), 0, -1))
    assert np.allclose(np.moveaxis(G, -1, 0), g.eta4, atol=1e-12)
