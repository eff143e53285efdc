"""Metrics built from frame evolutions, and their curvature.

Every metric handled here has the form ``g = theta^T eta4 theta`` where
``theta`` is a field of coframes (rows indexed by frame slot, columns by
coordinate) and ``eta4`` is a constant symmetric matrix.  For a frame
evolution this is

    g = eps dt^2 + eta_ij e^i_t e^j_t,    e^i_t = sum_j e^j (U^t)^{-1}_{ji},

with ``eta`` diagonal ``(eps, 1, 1)`` for orthonormal frames or the Witt
matrix for null frames.

All curvature is computed on truncated Taylor jets of the metric, so a metric
jet of order ``N`` yields Christoffel symbols of order ``N - 1`` and Riemann
of order ``N - 2``.  Order 2 is enough for curvature values; order 3 also
gives first derivatives of curvature (for the covariant derivative of the
Riemann tensor and for closure checks of curvature-weighted forms).

Sign conventions:

* ``R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns}
  - Gamma^r_{nl} Gamma^l_{ms}`` and ``Ric_{sn} = R^r_{srn}``, so round spheres
  have positive Ricci curvature.
* ``(*F)_{mn} = 1/2 F^{rs} eps_{rsmn}`` with ``eps_{0123} = orientation *
  sqrt|det g|``; orientation +1 makes ``dt^dx^dy^dz`` positive.
* The Weyl endomorphism of 2-forms is ``W(w)_{mn} = W_{mnrs} w^{rs}`` with
  ``W_{abcd} = -C_{abcd}``, where ``C`` is the Weyl tensor built from the
  Riemann tensor above.  The minus sign matches the convention in which the
  stationary solution with eps = k = 1 has eigenvalues (8, -4, -4).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import jets
from .heisenberg import CenterLabeling, ChartPoint, check_k, coframe_jets
from .jets import Jet

__all__ = [
    "DomainError",
    "FrameKind",
    "eta_matrix",
    "FrameEvolution",
    "MetricField",
    "TwoFormField",
    "CurvatureReport",
    "metric_from_evolution",
    "as_points",
    "christoffel",
    "riemann",
    "ricci",
    "scalar_curvature",
    "einstein_residual",
    "frame_components",
    "hodge_star_2forms",
    "weyl_selfduality",
    "weyl_eigenvalues",
    "select_orientation",
    "exterior_derivative",
    "covariant_derivative_riemann",
    "kretschmann",
    "curvature_report",
    "curvature_jets",
    "weyl_norm_jet",
    "evolved_forms",
    "wedge_2forms",
    "volume_component",
    "bianchi_residual",
    "weyl_trace_residual",
]


class DomainError(ValueError):
    """Raised when a point lies outside the domain of a metric or chart."""


class FrameKind(enum.Enum):
    Orthonormal = "orthonormal"
    Witt = "witt"


def eta_matrix(kind: FrameKind, eps: int) -> np.ndarray:
    """Inner product of the orbit frame: diag(eps, 1, 1) or the Witt matrix."""
    if kind is FrameKind.Witt:
        return np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    return np.diag([float(eps), 1.0, 1.0])


def _levi_civita() -> np.ndarray:
    e = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        e[perm] = -1.0 if inv % 2 else 1.0
    return e


LEVI = _levi_civita()
PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def as_points(p) -> tuple[np.ndarray, bool]:
    """Normalize a ChartPoint, 4-vector or (n, 4) array to an (n, 4) array."""
    if isinstance(p, ChartPoint):
        return p.as_array()[None, :], True
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _const(v, like: Jet) -> Jet:
    return Jet.constant(np.broadcast_to(np.asarray(v, float), like.shape), like.nvar, like.order)


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class MetricField:
    """A metric ``g = theta^T eta4 theta`` over chart points (s, x, y, z).

    Parameters
    ----------
    coframe : callable
        Maps the four coordinate jets to a jet of shape ``(4, 4, n)`` whose
        row ``a`` is the coframe element theta^a in coordinate components.
    eta4 : ndarray
        Constant 4x4 inner product of the coframe.
    domain : (float, float)
        Open interval allowed for the first coordinate.
    name : str
        Label used in reports.
    """

    coframe: Callable[[list], Jet]
    eta4: np.ndarray
    domain: tuple = (-np.inf, np.inf)
    name: str = "metric"

    def check_domain(self, pts: np.ndarray) -> None:
        lo, hi = self.domain
        s = pts[:, 0]
        if np.any(~np.isfinite(s)) or np.any(s <= lo) or np.any(s >= hi):
            bad = s[(s <= lo) | (s >= hi) | ~np.isfinite(s)][0]
            raise DomainError(f"{self.name}: coordinate {bad!r} outside the domain ({lo}, {hi})")

    def coframe_jet(self, points, order: int) -> Jet:
        pts, _ = as_points(points)
        self.check_domain(pts)
        X = Jet.coordinates(pts, order)
        return self.coframe(X)

    def jet(self, points, order: int = 2) -> Jet:
        """Metric components as a jet with value shape ``(4, 4, n)``."""
        theta = self.coframe_jet(points, order)
        return jets.einsum("am...,ab,bn...->mn...", theta, self.eta4, theta)

    def __call__(self, points) -> np.ndarray:
        """Metric component matrices, shape ``(n, 4, 4)`` (or ``(4, 4)``)."""
        pts, single = as_points(points)
        g = np.moveaxis(self.jet(pts, 0).value, -1, 0)
        return g[0] if single else g


@dataclass(frozen=True)
class FrameEvolution:
    """A frame evolution ``t -> U^t`` on the Heisenberg group.

    ``entries`` maps names among ``a, b, c, h, f, p`` to callables of t
    (accepting floats, arrays or jets).  Missing entries default to
    ``a = b = 1``, ``c = b`` and ``h = f = p = 0``.  The sparsity pattern of
    ``U`` is fixed by the labeling:

    * timelike/Riemannian: ``[[a,0,0],[0,b,0],[0,h,c]]``
    * spacelike:           ``[[c,h,0],[-h,b,0],[0,0,a]]``
    * lightlike (Witt):    ``[[1,0,0],[f,b,p],[0,0,a]]``
    """

    eps: int
    kind: FrameKind
    labeling: CenterLabeling
    k: float
    t0: float = 0.0
    entries: dict = field(default_factory=dict)
    domain: tuple = (-np.inf, np.inf)
    name: str = "evolution"

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        check_k(self.k)
        if (self.kind is FrameKind.Witt) != (self.labeling is CenterLabeling.Lightlike):
            raise ValueError("Witt frames go with the lightlike labeling and only with it")
        extra = set(self.entries) - set("abchfp")
        if extra:
            raise ValueError(f"unknown frame entries {sorted(extra)}")

    def entry(self, name: str, t):
        if name in self.entries:
            return self.entries[name](t)
        zero = 0.0 * t
        if name in ("a", "b"):
            return zero + 1.0
        if name == "c":
            return self.entry("b", t)
        return zero

    def U(self, t):
        """Nested 3x3 list of entries of U^t."""
        e = {n: self.entry(n, t) for n in "abchfp"}
        z = 0.0 * t
        if self.labeling is CenterLabeling.TimelikeOrRiemannian:
            return [[e["a"], z, z], [z, e["b"], z], [z, e["h"], e["c"]]]
        if self.labeling is CenterLabeling.Spacelike:
            return [[e["c"], e["h"], z], [-e["h"], e["b"], z], [z, z, e["a"]]]
        return [[z + 1.0, z, z], [e["f"], e["b"], e["p"]], [z, z, e["a"]]]

    def U_matrix(self, t: float) -> np.ndarray:
        return np.array([[float(np.asarray(v)) for v in row] for row in self.U(float(t))])

    @property
    def eta(self) -> np.ndarray:
        return eta_matrix(self.kind, self.eps)

    @property
    def eta4(self) -> np.ndarray:
        out = np.zeros((4, 4))
        out[0, 0] = self.eps
        out[1:, 1:] = self.eta
        return out

    def evolved_coframe(self, X: Sequence[Jet]) -> Jet:
        """Rows (dt, e^1_t, e^2_t, e^3_t) over coordinates, value shape (4, 4, n)."""
        t, x, y, _ = X
        U = jets.stack([jets.stack(row, 0) for row in self.U(t)], 0)
        v = np.moveaxis(U.value, (0, 1), (-2, -1))
        if np.any(np.abs(np.linalg.det(v)) < 1e-300):
            raise DomainError(f"{self.name}: U^t is singular")
        Uinv = jets.matrix_inverse(U)
        E = jets.stack([jets.stack(row, 0) for row in coframe_jets(self.k, x, y, self.labeling)], 0)
        spatial = jets.einsum("ji...,jm...->im...", Uinv, E)
        dt = jets.stack([1.0 + 0.0 * t, 0.0 * t, 0.0 * t, 0.0 * t], 0)
        return jets.stack([dt, spatial[0], spatial[1], spatial[2]], 0)


def metric_from_evolution(fe: FrameEvolution) -> MetricField:
    """The metric ``eps dt^2 + eta_ij e^i_t e^j_t`` of a frame evolution."""
    return MetricField(coframe=fe.evolved_coframe, eta4=fe.eta4, domain=fe.domain, name=fe.name)


@dataclass(frozen=True)
class TwoFormField:
    """A 2-form given by a jet builder over coordinate jets."""

    builder: Callable[[list], Jet]
    domain: tuple = (-np.inf, np.inf)
    name: str = "form"

    def jet(self, points, order: int = 1) -> Jet:
        pts, _ = as_points(points)
        return self.builder(Jet.coordinates(pts, order))

    def __call__(self, points) -> np.ndarray:
        pts, single = as_points(points)
        w = np.moveaxis(self.jet(pts, 0).value, -1, 0)
        return w[0] if single else w


# ---------------------------------------------------------------------------
# curvature on jets


def curvature_jets(g: Jet) -> dict:
    """Curvature tensors of a metric jet (value shape ``(4, 4, ...)``).

    Returns jets keyed by ``g, ginv, christoffel, riemann_up, riemann,
    ricci, scalar, weyl``; Christoffel symbols have order ``N-1`` and the
    rest order ``N-2`` where ``N = g.order``.
    """
    if g.order < 2:
        raise ValueError("curvature needs a metric jet of order >= 2")
    ginv = jets.matrix_inverse(g)
    dg = jets.stack([g.diff(l) for l in range(4)], 0)  # dg[l, m, n] = d_l g_mn
    t1 = jets.einsum("msn...->smn...", dg)
    t2 = jets.einsum("nsm...->smn...", dg)
    gam = jets.einsum("rs...,smn...->rmn...", ginv.truncate(dg.order), t1 + t2 - dg) * 0.5
    dgam = jets.stack([gam.diff(l) for l in range(4)], 0)  # dgam[l, r, m, n]
    gg = jets.einsum("rml...,lns...->rsmn...", gam, gam)
    rup = (
        jets.einsum("mrns...->rsmn...", dgam)
        - jets.einsum("nrms...->rsmn...", dgam)
        + gg
        - jets.einsum("rsnm...->rsmn...", gg)
    )
    low = rup.order
    g_l = g.truncate(low)
    ginv_l = ginv.truncate(low)
    rdn = jets.einsum("ar...,rsmn...->asmn...", g_l, rup)
    ric = jets.einsum("rsrn...->sn...", rup)
    scal = jets.einsum("sn...,sn...->...", ginv_l, ric)
    schouten = (ric - g_l * (scal * (1.0 / 6.0))) * 0.5
    kn = (
        jets.einsum("ac...,bd...->abcd...", g_l, schouten)
        - jets.einsum("ad...,bc...->abcd...", g_l, schouten)
        + jets.einsum("bd...,ac...->abcd...", g_l, schouten)
        - jets.einsum("bc...,ad...->abcd...", g_l, schouten)
    )
    weyl = rdn - kn
    return {
        "g": g,
        "ginv": ginv,
        "christoffel": gam,
        "riemann_up": rup,
        "riemann": rdn,
        "ricci": ric,
        "scalar": scal,
        "weyl": weyl,
    }


def _batch_first(a: np.ndarray, single: bool) -> np.ndarray:
    a = np.moveaxis(a, -1, 0)
    return a[0] if single else a


def christoffel(g: MetricField, p) -> np.ndarray:
    """Gamma^l_{mn}, shape ``(n, 4, 4, 4)`` (or ``(4, 4, 4)`` for one point)."""
    pts, single = as_points(p)
    return _batch_first(curvature_jets(g.jet(pts, 2))["christoffel"].value, single)


def riemann(g: MetricField, p) -> tuple[np.ndarray, np.ndarray]:
    """Riemann tensor as (0,4) and (1,3) arrays."""
    pts, single = as_points(p)
    cj = curvature_jets(g.jet(pts, 2))
    return _batch_first(cj["riemann"].value, single), _batch_first(cj["riemann_up"].value, single)


def ricci(g: MetricField, p) -> np.ndarray:
    pts, single = as_points(p)
    return _batch_first(curvature_jets(g.jet(pts, 2))["ricci"].value, single)


def scalar_curvature(g: MetricField, p) -> np.ndarray:
    pts, single = as_points(p)
    s = curvature_jets(g.jet(pts, 2))["scalar"].value
    return s[0] if single else s


def frame_components(g: MetricField, p, T: np.ndarray) -> np.ndarray:
    """Components of a covariant tensor in the coframe basis of ``g``.

    ``T`` has coordinate indices first and the batch axis last; every index
    is contracted with the frame dual to the coframe.  For an orthonormal
    coframe the max component is a chart-independent size, unlike
    coordinate components, which grow with the coordinate box.
    """
    pts, _ = as_points(p)
    theta = np.moveaxis(g.coframe_jet(pts, 0).value, -1, 0)
    E = np.linalg.inv(theta)  # E[n, m, a]: frame vector a, coordinate m
    out = T
    for _ in range(T.ndim - 1):
        # contract the leading coordinate index and append the frame index before the batch axis
        out = np.einsum("m...n,nma->...an", out, E)
    return out


def _sized(g: MetricField, pts: np.ndarray, T: np.ndarray, basis: str) -> float:
    if basis == "frame":
        T = frame_components(g, pts, T)
    elif basis != "coordinate":
        raise ValueError(f"basis must be 'frame' or 'coordinate', not {basis!r}")
    return float(np.max(np.abs(T)))


def einstein_residual(g: MetricField, lam: float, p, basis: str = "frame") -> float:
    """Max-norm of ``Ric - lam g`` over the given points.

    ``basis="frame"`` measures coframe components, ``"coordinate"`` chart components.
    """
    pts, _ = as_points(p)
    cj = curvature_jets(g.jet(pts, 2))
    return _sized(g, pts, cj["ricci"].value - lam * cj["g"].value, basis)


# ---------------------------------------------------------------------------
# Hodge star and the Weyl tensor on 2-forms


def _volume_tensor(gval: np.ndarray, orientation: int) -> np.ndarray:
    """eps_{abcd} with batch last, from metric values of shape (4, 4, n)."""
    det = np.linalg.det(np.moveaxis(gval, -1, 0))
    return orientation * LEVI[..., None] * np.sqrt(np.abs(det))


def hodge_star_2forms(g: MetricField, orientation: int, p) -> np.ndarray:
    """Matrix of the Hodge star on 2-forms in the basis ``dx^a ^ dx^b`` (a < b).

    Returns shape ``(n, 6, 6)`` (or ``(6, 6)``), acting on component vectors
    ``(F_01, F_02, F_03, F_12, F_13, F_23)``.
    """
    pts, single = as_points(p)
    gval = g.jet(pts, 0).value
    S = _hodge_matrix(gval, orientation)
    return S[0] if single else S


def _hodge_matrix(gval: np.ndarray, orientation: int) -> np.ndarray:
    ginv = np.moveaxis(np.linalg.inv(np.moveaxis(gval, -1, 0)), 0, -1)
    vol = _volume_tensor(gval, orientation)
    # (*F)_{mn} = 1/2 g^{ra} g^{sb} F_ab eps_{rsmn}; with F = e_J, F_ab - F_ba terms give the factor 2
    n = gval.shape[-1]
    S = np.zeros((n, 6, 6))
    for J, (a, b) in enumerate(PAIRS):
        F = np.zeros((4, 4))
        F[a, b], F[b, a] = 1.0, -1.0
        up = np.einsum("ra...,sb...,ab->rs...", ginv, ginv, F)
        star = 0.5 * np.einsum("rs...,rsmn...->mn...", up, vol)
        for I, (m, nn) in enumerate(PAIRS):
            S[:, I, J] = star[m, nn]
    return S


def _star_first_pair(T: np.ndarray, ginv: np.ndarray, vol: np.ndarray) -> np.ndarray:
    """(*T)_{abcd} = 1/2 eps_{ab}^{ef} T_{efcd} for a (0,4) array with batch last."""
    up = np.einsum("ep...,fq...,pqcd...->efcd...", ginv, ginv, T)
    return 0.5 * np.einsum("abef...,efcd...->abcd...", np.moveaxis(vol, (0, 1), (2, 3)), up)


def _signed_weyl(weyl_std: np.ndarray) -> np.ndarray:
    # the self-duality tensor and the eigenvalue pattern use the opposite
    # overall sign to the standard Weyl tensor
    return -weyl_std


def _weyl_pieces(g: MetricField, pts: np.ndarray):
    cj = curvature_jets(g.jet(pts, 2))
    gval = cj["g"].value
    ginv = cj["ginv"].value
    return gval, ginv, _signed_weyl(cj["weyl"].value)


def weyl_selfduality(g: MetricField, orientation: int, p) -> np.ndarray:
    """The tensor ``*W - W`` (star on the first pair), batch first."""
    pts, single = as_points(p)
    gval, ginv, W = _weyl_pieces(g, pts)
    vol = _volume_tensor(gval, orientation)
    sdw = _star_first_pair(W, ginv, vol) - W
    return _batch_first(sdw, single)


def select_orientation(g: MetricField, p, basis: str = "frame") -> tuple[int, dict]:
    """Orientation sign whose ``max|*W - W|`` is smallest, and both maxima."""
    pts, _ = as_points(p)
    gval, ginv, W = _weyl_pieces(g, pts)
    res = {}
    for o in (1, -1):
        vol = _volume_tensor(gval, o)
        res[o] = _sized(g, pts, _star_first_pair(W, ginv, vol) - W, basis)
    best = 1 if res[1] <= res[-1] else -1
    return best, res


def _two_form_operator(T: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """6x6 matrix of w -> T_{mnrs} w^{rs} on the pair basis; batch first."""
    mixed = np.einsum("mnrs...,ra...,sb...->mnab...", T, ginv, ginv)
    n = T.shape[-1]
    M = np.zeros((n, 6, 6))
    for I, (m, nn) in enumerate(PAIRS):
        for J, (a, b) in enumerate(PAIRS):
            M[:, I, J] = mixed[m, nn, a, b] - mixed[m, nn, b, a]
    return M


def _restricted_eigs(M: np.ndarray, S: np.ndarray, sign: int) -> np.ndarray:
    """Eigenvalues of M restricted to the (sign)-eigenspace of S, per point."""
    out = np.zeros((M.shape[0], 3))
    for i in range(M.shape[0]):
        P = 0.5 * (np.eye(6) + sign * S[i])
        u, s, _ = np.linalg.svd(P)
        B = u[:, :3]
        R = np.linalg.pinv(B) @ M[i] @ B
        ev = np.linalg.eigvals(R)
        out[i] = np.sort(ev.real)
    return out


def weyl_eigenvalues(g: MetricField, orientation: int, p) -> tuple[np.ndarray, np.ndarray]:
    """Sorted Weyl eigenvalues on self-dual and anti-self-dual 2-forms."""
    pts, single = as_points(p)
    gval, ginv, W = _weyl_pieces(g, pts)
    M = _two_form_operator(W, ginv)
    S = _hodge_matrix(gval, orientation)
    sd = _restricted_eigs(M, S, +1)
    asd = _restricted_eigs(M, S, -1)
    if single:
        return sd[0], asd[0]
    return sd, asd


# ---------------------------------------------------------------------------
# forms


def exterior_derivative(form: Jet) -> Jet:
    """Coordinate exterior derivative of a 1-form (shape (4, ...)) or 2-form (shape (4, 4, ...))."""
    d = jets.stack([form.diff(l) for l in range(4)], 0)
    rank = len(form.shape) - 1 if len(form.shape) >= 2 and form.shape[0] == 4 and form.shape[1] == 4 else 1
    if rank == 1:
        return d - jets.einsum("nm...->mn...", d)
    return d + jets.einsum("mnl...->lmn...", d) + jets.einsum("nlm...->lmn...", d)


def _wedge_1forms(a: Jet, b: Jet) -> Jet:
    return jets.einsum("m...,n...->mn...", a, b) - jets.einsum("n...,m...->mn...", a, b)


def _star_jet(F: Jet, ginv: Jet, sqrt_det: Jet, orientation: int) -> Jet:
    up = jets.einsum("ra...,sb...,ab...->rs...", ginv, ginv, F)
    return jets.einsum("rs...,rsmn->mn...", up, LEVI) * sqrt_det * (0.5 * orientation)


def evolved_forms(g: MetricField, orientation: int, sign: int = 1) -> list[TwoFormField]:
    """The triplet ``theta^0 ^ theta^i + sign * *(theta^0 ^ theta^i)``, i = 1, 2, 3.

    With ``sign = +1`` these are self-dual for the given orientation.
    """

    def make(i):
        def builder(X):
            theta = g.coframe(X)
            gj = jets.einsum("am...,ab,bn...->mn...", theta, g.eta4, theta)
            ginv = jets.matrix_inverse(gj)
            sd = jets.sqrt_abs_det(gj)
            F = _wedge_1forms(theta[0], theta[i])
            return F + _star_jet(F, ginv, sd, orientation) * sign

        return TwoFormField(builder=builder, domain=g.domain, name=f"omega_{i}")

    return [make(i) for i in (1, 2, 3)]


def wedge_2forms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The dt^dx^dy^dz component of ``a ^ b`` for 2-form components (..., 4, 4)."""
    return 0.25 * np.einsum("abcd,...ab,...cd->...", LEVI, a, b)


def volume_component(g: MetricField, orientation: int, p) -> np.ndarray:
    """The dt^dx^dy^dz component of the volume form."""
    gval = g(p)
    return orientation * np.sqrt(np.abs(np.linalg.det(gval)))


def weyl_norm_jet(g: MetricField, points) -> Jet:
    """``sqrt|W_{abcd} W^{abcd}|`` as a jet of order 1 (metric expanded to order 3)."""
    pts, _ = as_points(points)
    cj = curvature_jets(g.jet(pts, 3))
    W = cj["weyl"]
    ginv = cj["ginv"].truncate(W.order)
    up = jets.einsum("ap...,bq...,cr...,ds...,pqrs...->abcd...", ginv, ginv, ginv, ginv, W)
    sq = jets.einsum("abcd...,abcd...->...", W, up)
    sgn = np.sign(sq.value)
    sgn[sgn == 0] = 1.0
    return jets.sqrt(sq * sgn)


# ---------------------------------------------------------------------------
# derived scalars and identities


def covariant_derivative_riemann(g: MetricField, p, basis: str = "frame") -> float:
    """Max component of the covariant derivative of the (0,4) Riemann tensor."""
    pts, _ = as_points(p)
    cj = curvature_jets(g.jet(pts, 3))
    R = cj["riemann"]
    dR = np.stack([R.diff(l).value for l in range(4)], 0)
    G = cj["christoffel"].value
    Rv = R.value
    nab = (
        dR
        - np.einsum("fea...,fbcd...->eabcd...", G, Rv)
        - np.einsum("feb...,afcd...->eabcd...", G, Rv)
        - np.einsum("fec...,abfd...->eabcd...", G, Rv)
        - np.einsum("fed...,abcf...->eabcd...", G, Rv)
    )
    return _sized(g, pts, nab, basis)


def kretschmann(g: MetricField, p) -> np.ndarray:
    """``R_{abcd} R^{abcd}`` at each point."""
    pts, single = as_points(p)
    cj = curvature_jets(g.jet(pts, 2))
    R = cj["riemann"].value
    gi = cj["ginv"].value
    up = np.einsum("ap...,bq...,cr...,ds...,pqrs...->abcd...", gi, gi, gi, gi, R)
    k = np.einsum("abcd...,abcd...->...", R, up)
    return k[0] if single else k


def bianchi_residual(g: MetricField, p) -> float:
    pts, _ = as_points(p)
    R = curvature_jets(g.jet(pts, 2))["riemann"].value
    cyc = R + np.einsum("abcd...->acdb...", R) + np.einsum("abcd...->adbc...", R)
    return float(np.max(np.abs(cyc)))


def weyl_trace_residual(g: MetricField, p) -> float:
    pts, _ = as_points(p)
    cj = curvature_jets(g.jet(pts, 2))
    tr = np.einsum("ac...,abcd...->bd...", cj["ginv"].value, cj["weyl"].value)
    return float(np.max(np.abs(tr)))


@dataclass
class CurvatureReport:
    """Curvature data at a batch of points (batch axis first)."""

    points: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    riemann_up: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    weyl: np.ndarray
    weyl_sd: np.ndarray
    orientation: int
    sd_eigenvalues: np.ndarray
    asd_eigenvalues: np.ndarray


def curvature_report(g: MetricField, p, orientation: Optional[int] = None) -> CurvatureReport:
    """Everything at once; the orientation is auto-selected when not given."""
    pts, _ = as_points(p)
    if orientation is None:
        orientation, _ = select_orientation(g, pts)
    cj = curvature_jets(g.jet(pts, 2))
    gval, ginv = cj["g"].value, cj["ginv"].value
    W = _signed_weyl(cj["weyl"].value)
    vol = _volume_tensor(gval, orientation)
    sdw = _star_first_pair(W, ginv, vol) - W
    M = _two_form_operator(W, ginv)
    S = _hodge_matrix(gval, orientation)
    return CurvatureReport(
        points=pts,
        christoffel=np.moveaxis(cj["christoffel"].value, -1, 0),
        riemann=np.moveaxis(cj["riemann"].value, -1, 0),
        riemann_up=np.moveaxis(cj["riemann_up"].value, -1, 0),
        ricci=np.moveaxis(cj["ricci"].value, -1, 0),
        scalar=cj["scalar"].value,
        weyl=np.moveaxis(W, -1, 0),
        weyl_sd=np.moveaxis(sdw, -1, 0),
        orientation=orientation,
        sd_eigenvalues=_restricted_eigs(M, S, +1),
        asd_eigenvalues=_restricted_eigs(M, S, -1),
    )
