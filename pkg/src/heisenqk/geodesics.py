"""Geodesics, normal lengths and incompleteness probes.

The normal curves ``s -> (s, x, y, z)`` with fixed ``(x, y, z)`` are unit
speed geodesics for every metric ``eps dt^2 + (orbit metric)``, so the
distance to a boundary of the time interval is just the coordinate distance
in t.  In the rho chart of the one-loop families the same distance is

    sqrt|3 / (2 el)| * integral of |rho|^-1 sqrt|(rho + 2g)/(rho + g)| d rho.

Near ``rho = -g`` the integrand has an inverse square-root singularity that
is removed by the substitution ``rho = -g + u^2``.  Near ``rho = 0`` and at
infinity it behaves like ``1/|rho|``, so those ends are at infinite distance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from .geometry import MetricField, as_points, kretschmann
from .heisenberg import ChartPoint
from .jets import Jet
from . import jets

__all__ = [
    "GeodesicState",
    "Verdict",
    "ProbeResult",
    "christoffel_values",
    "geodesic_rhs",
    "geodesic_residual",
    "integrate_geodesic",
    "normal_length",
    "incompleteness_probe",
    "flat_geodesic",
    "lightlike_qpk_geodesic",
    "conjectural_rho_rhs",
    "conjectural_probe",
]


@dataclass(frozen=True)
class GeodesicState:
    point: ChartPoint
    velocity: tuple

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.point.as_array(), np.asarray(self.velocity, dtype=float)])


class Verdict(enum.Enum):
    IncompleteEvidence = "IncompleteEvidence"
    NoFiniteBoundaryFound = "NoFiniteBoundaryFound"


@dataclass
class ProbeResult:
    """Outcome of an incompleteness probe.

    ``kretschmann_trace`` lists ``(distance to boundary, K)`` pairs sampled
    while approaching the boundary; ``degeneration`` is the ratio of the
    largest metric component magnitude at the last sample to the one at the
    start.
    """

    family: str
    curve: str
    affine_span: float
    length: float
    boundary_reached: bool
    verdict: Verdict
    kretschmann_trace: list = field(default_factory=list)
    degeneration: float = 1.0
    curvature_blowup: bool = False
    conjecture: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "curve": self.curve,
            "affine_span": self.affine_span,
            "length": self.length,
            "boundary_reached": self.boundary_reached,
            "verdict": self.verdict.value,
            "curvature_blowup": self.curvature_blowup,
            "degeneration": self.degeneration,
            "kretschmann_trace": [[float(d), float(k)] for d, k in self.kretschmann_trace],
            "conjecture": self.conjecture,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# geodesic equation


def christoffel_values(g: MetricField, pts: np.ndarray) -> np.ndarray:
    """Christoffel symbols from a first-order metric jet; shape (n, 4, 4, 4)."""
    gj = g.jet(pts, 1)
    ginv = np.linalg.inv(np.moveaxis(gj.value, -1, 0))
    dg = np.stack([gj.diff(l).value for l in range(4)], 0)  # (l, m, n, batch)
    dg = np.moveaxis(dg, -1, 0)  # (batch, l, m, n)
    t = np.swapaxes(dg, 1, 2) + np.transpose(dg, (0, 2, 3, 1)) - dg
    # t[b, s, m, n] = d_m g_sn + d_n g_sm - d_s g_mn
    return 0.5 * np.einsum("brs,bsmn->brmn", ginv, t)


def geodesic_rhs(g: MetricField, state) -> np.ndarray:
    """Derivative of ``(x, v)`` under ``x'' + Gamma(v, v) = 0``."""
    y = state.as_array() if isinstance(state, GeodesicState) else np.asarray(state, dtype=float)
    x, v = y[:4], y[4:]
    G = christoffel_values(g, x[None, :])[0]
    return np.concatenate([v, -np.einsum("lmn,m,n->l", G, v, v)])


def geodesic_residual(g: MetricField, curve, tau) -> float:
    """Max residual of the geodesic equation for a curve given as a jet-friendly callable."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    tj = Jet.variable(tau, 0, 1, 2)
    c = curve(tj)
    X = np.stack([jets.value(ci) * np.ones_like(tau) for ci in c], -1)
    V = np.stack([ci.coef[1] if isinstance(ci, Jet) else np.zeros_like(tau) for ci in c], -1)
    A = np.stack([2 * ci.coef[2] if isinstance(ci, Jet) else np.zeros_like(tau) for ci in c], -1)
    G = christoffel_values(g, X)
    return float(np.max(np.abs(A + np.einsum("blmn,bm,bn->bl", G, V, V))))


def integrate_geodesic(g: MetricField, y0, span, rtol=1e-10, atol=1e-12, events=()):
    """Integrate the geodesic equation; returns the scipy solution object."""
    lo, hi = g.domain

    def rhs(tau, y):
        return geodesic_rhs(g, y)

    evs = []
    margin = 1e-9
    if math.isfinite(lo):
        e = lambda tau, y: y[0] - lo - margin * max(1.0, abs(lo))
        e.terminal = True
        evs.append(e)
    if math.isfinite(hi):
        e = lambda tau, y: hi - y[0] - margin * max(1.0, abs(hi))
        e.terminal = True
        evs.append(e)
    for e in events:
        e.terminal = True
        evs.append(e)
    return solve_ivp(rhs, span, np.asarray(y0, dtype=float), method="RK45", rtol=rtol, atol=atol, events=evs or None, dense_output=True)


# ---------------------------------------------------------------------------
# explicit geodesics


def flat_geodesic(k: float, A):
    """Closed-form geodesic of the flat null-center family (coefficients A1..A8)."""
    A1, A2, A3, A4, A5, A6, A7, A8 = A

    def curve(tau):
        x = tau * A3 + A4
        return [
            tau * A2 - (tau * tau) * (k * A3 * A3) + A1,
            x,
            tau * A6 - (tau * tau) * (k * A3 * A3) + A5,
            tau * A8 + (tau * tau) * (x * (k * A3) + (-2 * A2 + A6)) * (k * A3) + A7,
        ]

    return curve


def lightlike_qpk_geodesic(lam: float, B: float, t0: float = 0.0):
    """Explicit geodesic of the null-center QK family, with ``x = z = 0``.

    ``t = t0 - sqrt(3)/(2 sqrt(Lambda)) log(4 Lambda sinh^2(tau/2 + B) / 3)`` and
    ``y = (3 / (2 Lambda)) (coth B - coth(tau/2 + B))``, the closed form of
    the quadrature of ``3 / (4 Lambda sinh^2(sigma/2 + B))``.
    """
    c = math.sqrt(3.0) / (2.0 * math.sqrt(lam))

    def curve(tau):
        s = jets.sinh(tau * 0.5 + B)
        ch = jets.cosh(tau * 0.5 + B)
        zero = tau * 0.0
        t = t0 - jets.log(s * s * (4.0 * lam / 3.0)) * c
        y = (ch / s) * (-3.0 / (2.0 * lam)) + (3.0 / (2.0 * lam)) / math.tanh(B)
        return [t, zero, y, zero]

    return curve


# ---------------------------------------------------------------------------
# lengths


def _rho_integrand(gamma: float):
    return lambda r: math.sqrt(abs((r + 2 * gamma) / (r + gamma))) / abs(r)


def normal_length(spec, start: float, end: float, coordinate: Optional[str] = None) -> float:
    """Length of the normal geodesic between two values of rho (or t).

    One-loop families default to the rho coordinate, the others to t.
    Endpoints at ``rho = 0`` or infinity give ``inf``.
    """
    coord = coordinate or ("rho" if spec.family.one_loop else "t")
    if coord == "t":
        return abs(float(end) - float(start))
    g = spec.gamma
    el = spec.timelike_el
    pref = math.sqrt(abs(3.0 / (2.0 * el)))
    lo, hi = sorted((float(start), float(end)))
    dlo, dhi = spec.rho_chart.domain
    if lo < dlo - 1e-15 or hi > dhi + 1e-15:
        raise ValueError(f"rho interval [{lo}, {hi}] leaves the chart domain ({dlo}, {dhi})")
    if lo == hi:
        return 0.0
    if (lo <= 0.0 <= hi) or not math.isfinite(lo) or not math.isfinite(hi):
        return math.inf
    f = _rho_integrand(g)
    sing = [e for e in (-g, -2 * g) if e != 0.0 and (abs(e - lo) < 1e-15 * max(1, abs(e)) or abs(e - hi) < 1e-15 * max(1, abs(e)))]
    if not sing:
        val, _ = quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        return pref * val
    total = 0.0
    mid = 0.5 * (lo + hi)
    for a, e in ((mid, lo), (mid, hi)):
        if any(abs(e - s) < 1e-15 * max(1, abs(s)) for s in sing):
            h = a - e
            val, _ = quad(lambda w: f(e + h * w * w) * 2.0 * abs(h) * w, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
        else:
            val, _ = quad(f, min(a, e), max(a, e), epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return pref * total


# ---------------------------------------------------------------------------
# probes


def _trace(g: MetricField, start: float, end: float, base: np.ndarray, steps: int = 8):
    """Kretschmann scalar and metric size approaching ``end`` from ``start``."""
    out = []
    size = []
    for j in range(1, steps + 1):
        d = abs(end - start) * 10.0 ** (-j / 1.5)
        s = end - math.copysign(d, end - start)
        p = np.array([[s, *base]])
        out.append((d, float(kretschmann(g, p)[0])))
        size.append(float(np.max(np.abs(g(p)))))
    return out, size


def _verdict_from_trace(trace, size, start_size):
    ks = np.array([abs(k) for _, k in trace])
    blowup = bool(ks[-1] > 100.0 * max(ks[0], 1e-300))
    degen = max(size[-1] / start_size, start_size / max(size[-1], 1e-300))
    return blowup, degen


def incompleteness_probe(spec, base=(0.3, -0.2, 0.1)) -> ProbeResult:
    """Look for a finite-length curve reaching the boundary of the chart.

    * Families with a finite end of their time interval: the normal geodesic
      toward that end, with the length from ``normal_length``.
    * ``LightlikeQPK``: the explicit null-center geodesic, which reaches
      ``t = +inf`` at finite affine parameter.
    * ``NegativeTimelike`` with l = 1, eps = -1 and Lambda > 6k^2: the
      x-boosted geodesic of the conjectural branch (reported as conjecture
      support only).

    Evidence of incompleteness requires a finite length (or affine span) and
    either curvature growth or metric degeneration at the boundary.
    """
    from .solutions import Family

    fam = spec.family
    label = spec.label
    if fam is Family.LightlikeQPK:
        return _qpk_probe(spec)
    if fam is Family.NegativeTimelike and spec.branch == 1 and spec.eps == -1 and spec.lam > 6 * spec.k**2:
        return conjectural_probe(spec)

    lo, hi = spec.domain
    finite = [e for e in (hi, lo) if math.isfinite(e)]
    if not finite:
        return ProbeResult(
            family=label,
            curve="normal t-geodesic",
            affine_span=math.inf,
            length=math.inf,
            boundary_reached=False,
            verdict=Verdict.NoFiniteBoundaryFound,
            note="time interval is the whole line; no finite-length boundary-reaching probe found",
        )
    if fam.one_loop:
        g = spec.rho_metric()
        chart = spec.rho_chart
        rlo, rhi = chart.domain
        ends = [e for e in (rlo, rhi) if math.isfinite(e) and e != 0.0]
        best = None
        for e in ends:
            L = normal_length(spec, spec.rho0, e)
            if math.isfinite(L) and (best is None or L < best[1]):
                best = (e, L)
        e, L = best
        start = spec.rho0
        s0 = float(np.max(np.abs(g(np.array([[start, *base]])))))
        trace, size = _trace(g, start, e, np.asarray(base))
        curve = "normal rho-geodesic"
    else:
        g = spec.metric()
        e = min(finite, key=lambda v: abs(v - spec.t0))
        L = normal_length(spec, spec.t0, e, "t")
        start = spec.t0
        s0 = float(np.max(np.abs(g(np.array([[start, *base]])))))
        trace, size = _trace(g, start, e, np.asarray(base))
        curve = "normal t-geodesic"
    blowup, degen = _verdict_from_trace(trace, size, s0)
    evidence = math.isfinite(L) and (blowup or degen > 100.0)
    return ProbeResult(
        family=label,
        curve=curve,
        affine_span=L,
        length=L,
        boundary_reached=True,
        verdict=Verdict.IncompleteEvidence if evidence else Verdict.NoFiniteBoundaryFound,
        kretschmann_trace=trace,
        degeneration=degen,
        curvature_blowup=blowup,
        note=f"boundary at {e:.12g}",
    )


def _qpk_probe(spec, B: float = 0.5) -> ProbeResult:
    lam, t0 = spec.lam, spec.t0
    g = spec.metric()
    curve = lightlike_qpk_geodesic(lam, B, t0)
    tj = Jet.variable(np.array([0.0]), 0, 1, 1)
    c = curve(tj)
    y0 = np.array([jets.value(ci)[0] for ci in c] + [ci.coef[1][0] if isinstance(ci, Jet) else 0.0 for ci in c])
    # t grows like -2c log|tau + 2B| near the end, so 24 c above the start
    # means the affine parameter is within about e^-12 of -2B.
    c = math.sqrt(3.0) / (2.0 * math.sqrt(lam))
    t_stop = y0[0] + 24.0 * c
    ev = lambda tau, y: t_stop - y[0]
    sol = integrate_geodesic(g, y0, (0.0, -4.0 * B), events=(ev,))
    tau_end = float(sol.t[-1])
    reached = sol.status == 1
    # compare the numerical and explicit t at the stopping parameter
    taus = np.linspace(0.0, tau_end, 20)
    tref = np.array([_qpk_t(lam, B, t0, tv) for tv in taus])
    dev = float(np.max(np.abs(sol.sol(taus)[0] - tref)))
    trace = []
    size = []
    for tv in np.linspace(0.0, tau_end, 6):
        p = sol.sol(tv)[:4][None, :]
        trace.append((abs(tau_end - tv), float(kretschmann(g, p)[0])))
        size.append(float(np.min(np.abs(np.linalg.eigvalsh(g(p)[0])))))
    degen = size[0] / max(size[-1], 1e-300)
    evidence = reached and math.isfinite(tau_end) and degen > 100.0
    return ProbeResult(
        family=spec.label,
        curve="explicit null-center geodesic",
        affine_span=abs(tau_end),
        length=0.0,
        boundary_reached=reached,
        verdict=Verdict.IncompleteEvidence if evidence else Verdict.NoFiniteBoundaryFound,
        kretschmann_trace=trace,
        degeneration=degen,
        curvature_blowup=False,
        note=f"t -> +inf as tau -> {-2 * B:g}; integrated t exceeded {t_stop:.3g} at tau = {tau_end:.9g}; "
        f"max |t_num - t_closed| = {dev:.2e}",
    )


def _qpk_t(lam, B, t0, tau):
    return t0 - math.sqrt(3.0) / (2.0 * math.sqrt(lam)) * math.log(4.0 * lam * math.sinh(tau / 2.0 + B) ** 2 / 3.0)


def conjectural_rho_rhs(gamma: float, kappa: float):
    """The rho equation of the x-boosted geodesic, as a first-order system.

    ``kappa`` is the conserved x-momentum in the normalization where
    ``x' = kappa rho^2 / (rho + 2 gamma)``.
    """

    def rhs(tau, y):
        r, rp = y
        g = gamma
        return [
            rp,
            kappa * kappa * r**3 * (r + g) * (r + 4 * g) / (r + 2 * g) ** 3
            + rp * rp * (4 * g * g + 7 * g * r + 2 * r * r) / (2 * r * (r + g) * (r + 2 * g)),
        ]

    return rhs


def conjectural_probe(spec, v0: float = 1.0, span: float = 50.0, levels=(1e2, 1e4, 1e6)) -> ProbeResult:
    """Integrate the x-boosted geodesic in the rho chart.

    Starts at ``rho = rho0`` with ``x' = v0`` and all other velocities zero.
    The full geodesic equation is integrated up to ``rho = levels[-1] rho0``
    and compared with the reduced rho equation.  The affine parameters at
    which rho crosses ``levels * rho0`` are recorded; when their increments
    shrink geometrically, rho escapes to infinity at finite affine parameter.
    This is reported as support for the conjectured incompleteness, never as
    a verification.
    """
    g = spec.rho_metric()
    r0, gam = spec.rho0, spec.gamma
    kappa = v0 * (r0 + 2 * gam) / r0**2
    y0 = np.array([r0, 0.0, 0.0, 0.0, 0.0, v0, 0.0, 0.0])
    top = levels[-1] * r0
    up = lambda tau, y: top - y[0]
    down = lambda tau, y: y[0] - 1e-6 * r0
    sol = integrate_geodesic(g, y0, (0.0, span), events=(up, down))
    tau_end = float(sol.t[-1])
    reached = sol.status == 1 and sol.y[0, -1] > r0

    crossings = []
    for lv in levels:
        ev = lambda tau, y, L=lv * r0: L - y[0]
        ev.terminal = True
        red = solve_ivp(conjectural_rho_rhs(gam, kappa), (0.0, span), [r0, 0.0], rtol=1e-11, atol=1e-13, events=ev, dense_output=True)
        crossings.append(float(red.t[-1]) if red.status == 1 else math.inf)
    taus = np.linspace(0.0, min(tau_end, crossings[-1]), 50)
    dev = float(np.max(np.abs(sol.sol(taus)[0] - red.sol(taus)[0]) / np.maximum(1.0, np.abs(red.sol(taus)[0]))))
    incs = np.diff(crossings)
    converging = bool(np.all(np.isfinite(crossings)) and len(incs) >= 2 and np.all(incs[1:] < 0.5 * incs[:-1]))

    gv = g(sol.y[:4, 0])
    norm0 = float(sol.y[4:, 0] @ gv @ sol.y[4:, 0])
    gl = g(sol.y[:4, -1])
    norm1 = float(sol.y[4:, -1] @ gl @ sol.y[4:, -1])
    yz = float(np.max(np.abs(sol.y[[2, 3], :])))
    note = (
        f"rho reached {sol.y[0, -1]:.6g} at affine parameter {tau_end:.9g}; "
        f"crossing parameters {', '.join(f'{c:.9g}' for c in crossings)}; "
        f"reduced-equation relative deviation {dev:.1e}; "
        f"relative g(v,v) drift {abs(norm1 - norm0) / max(abs(norm0), 1e-300):.1e}; max |y|,|z| = {yz:.1e}"
    )
    return ProbeResult(
        family=spec.label,
        curve="x-boosted geodesic",
        affine_span=crossings[-1] if converging else tau_end,
        length=math.nan,
        boundary_reached=reached,
        verdict=Verdict.IncompleteEvidence if (reached and converging) else Verdict.NoFiniteBoundaryFound,
        conjecture=True,
        note=note,
    )
