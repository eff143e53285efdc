"""Closed-form catalog of the Heisenberg-invariant self-dual Einstein metrics.

Families
--------
``StationaryTimelike``, ``StationarySpacelike``
    Locally symmetric solutions with constant logarithmic derivatives.
``NegativeTimelike`` (branch l = 1, 2, 3), ``PositiveTimelike``
    The one-parameter deformation in its rho chart, with initial data fixed
    by the cubic for rho0.
``NegativeSpacelike``, ``PositiveSpacelike`` (branch l)
    Obtained from the eps = -1 timelike solutions by reversing time.
``LightlikeQPK``, ``LorentzianLightlike``
    Conformally flat solutions with a null center.
``HyperKahlerTimelike``, ``HyperKahlerSpacelike``, ``HyperKahlerLightlike``
    Ricci-flat solutions.

Throughout ``el`` stands for the product eps * Lambda of the timelike
problem; a spacelike family with Einstein constant Lambda uses the timelike
data with eps = -1 and ``el = -Lambda``.

Branch slopes
-------------
At fixed ``(a, b)`` the self-duality constraint is a cubic in the slope
``b'``.  Writing ``beta = k b^3 - a b'`` it reads

    beta^3 + (el a^2 b^2 / 3) beta + (2 k el / 3) a^2 b^5 = 0.

Branches are labeled by the ordinal of the real slope: branch 1 (and the
positive family) takes the smallest real ``b'``, branches 2 and 3 the middle
and largest one at ``t0``.  Along a trajectory two of the three real slopes
can merge at a fold and become complex, so branch-following integration uses
the second-order system in ``(a, b, b')`` instead of the slope formula.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jets
from .evolution import Event, ODEProblem, RhoFlow, Termination
from .geometry import FrameEvolution, FrameKind, MetricField, metric_from_evolution
from .heisenberg import CenterLabeling, check_k, coframe_jets
from .jets import Jet

__all__ = [
    "Family",
    "ParameterError",
    "InvalidBranchError",
    "SingularSlopeError",
    "SolutionSpec",
    "RhoRoot",
    "CubicRoots",
    "RhoChart",
    "StationarityDiagnostics",
    "cubic_rho_roots",
    "positive_rho0",
    "gamma_of_rho0",
    "one_loop_profile",
    "rho_flow_speed",
    "branch_slopes",
    "qk_timelike_rhs",
    "qk_spacelike_rhs",
    "qk_constraint",
    "qk_lifted_rhs",
    "qk_tracked_rhs",
    "lightlike_einstein_rhs",
    "lightlike_residuals",
    "stationary_timelike",
    "stationary_spacelike",
    "lightlike_qpk",
    "lorentzian_lightlike",
    "hyperkahler_timelike",
    "hyperkahler_spacelike",
    "hyperkahler_lightlike",
    "stationarity_diagnostics",
    "rho_chart_metric",
    "weyl_nu",
]


class ParameterError(ValueError):
    """Family and parameters are incompatible; the message names the constraint."""


class InvalidBranchError(ParameterError):
    """The requested slope branch is not real at this point."""


class SingularSlopeError(ZeroDivisionError):
    """The slope b' vanishes where a formula divides by it."""


class Family(enum.Enum):
    StationaryTimelike = "StationaryTimelike"
    StationarySpacelike = "StationarySpacelike"
    NegativeTimelike = "NegativeTimelike"
    PositiveTimelike = "PositiveTimelike"
    NegativeSpacelike = "NegativeSpacelike"
    PositiveSpacelike = "PositiveSpacelike"
    LightlikeQPK = "LightlikeQPK"
    LorentzianLightlike = "LorentzianLightlike"
    HyperKahlerTimelike = "HyperKahlerTimelike"
    HyperKahlerSpacelike = "HyperKahlerSpacelike"
    HyperKahlerLightlike = "HyperKahlerLightlike"

    @property
    def one_loop(self) -> bool:
        return self in _ONE_LOOP

    @property
    def spacelike(self) -> bool:
        return self in (
            Family.StationarySpacelike,
            Family.NegativeSpacelike,
            Family.PositiveSpacelike,
            Family.HyperKahlerSpacelike,
        )

    @property
    def lightlike(self) -> bool:
        return self in (Family.LightlikeQPK, Family.LorentzianLightlike, Family.HyperKahlerLightlike)

    @property
    def hyperkahler(self) -> bool:
        return self in (Family.HyperKahlerTimelike, Family.HyperKahlerSpacelike, Family.HyperKahlerLightlike)

    @property
    def branched(self) -> bool:
        return self in (Family.NegativeTimelike, Family.PositiveSpacelike)


_ONE_LOOP = (Family.NegativeTimelike, Family.PositiveTimelike, Family.NegativeSpacelike, Family.PositiveSpacelike)

CONSTRAINTS = {
    Family.StationaryTimelike: "eps in {+1,-1}; eps*Lambda = -6k^2",
    Family.StationarySpacelike: "eps = -1; Lambda = 6k^2",
    Family.NegativeTimelike: "eps in {+1,-1}; eps*Lambda < 0; l in {1,2,3}; l >= 2 needs eps*Lambda <= -81k^2",
    Family.PositiveTimelike: "eps in {+1,-1}; eps*Lambda > 0",
    Family.NegativeSpacelike: "eps = -1; Lambda < 0",
    Family.PositiveSpacelike: "eps = -1; Lambda > 0; l in {1,2,3}; l >= 2 needs Lambda >= 81k^2",
    Family.LightlikeQPK: "eps = -1; Lambda > 0",
    Family.LorentzianLightlike: "eps = +1 (Lorentzian); Lambda < 0",
    Family.HyperKahlerTimelike: "eps in {+1,-1}; Lambda = 0",
    Family.HyperKahlerSpacelike: "eps = -1; Lambda = 0",
    Family.HyperKahlerLightlike: "eps = -1; Lambda = 0",
}


# ---------------------------------------------------------------------------
# cubic initial data


def _cbrt(z: complex) -> complex:
    """Principal cube root, argument in (-pi/3, pi/3]."""
    z = complex(z)
    if z == 0:
        return 0j
    return abs(z) ** (1.0 / 3.0) * cmath.exp(1j * cmath.phase(z) / 3.0)


def gamma_of_rho0(rho0: float, el: float) -> float:
    """``gamma = -rho0 (1 + el rho0 / 3) / 2``."""
    return -rho0 * (1.0 + el * rho0 / 3.0) / 2.0


def _cubic(rho, k, el):
    lam2 = el * el
    return rho**3 + 3.0 / (4.0 * el * k * k) * rho - 9.0 / (4.0 * k * k * lam2)


@dataclass(frozen=True)
class RhoRoot:
    """One closed-form root of the initial-data cubic.

    ``value`` is complex in general; ``real`` says whether its imaginary part
    is negligible.  ``valid`` maps each sign s in {+1, -1} to whether the
    root solves the unsquared conditions A_s = B_s = 1 inside its chart.
    """

    l: int
    value: complex
    real: bool
    residual: float
    valid: dict
    coincident: bool = False

    @property
    def rho(self) -> float:
        if not self.real:
            raise InvalidBranchError(f"rho_{self.l} is not real")
        return self.value.real


@dataclass(frozen=True)
class CubicRoots:
    k: float
    el: float
    roots: tuple

    def valid_count(self, s: int) -> int:
        return sum(1 for r in self.roots if r.valid.get(s, False))

    def __getitem__(self, l: int) -> RhoRoot:
        return self.roots[l - 1]


def _profile_is_unit(s: int, rho: float, k: float, el: float, tol: float = 1e-9) -> bool:
    gam = gamma_of_rho0(rho, el)
    try:
        A, B = one_loop_profile(s, gam, el, k, rho)
    except (ParameterError, ValueError, ZeroDivisionError):
        return False
    return bool(abs(A - 1.0) < tol and abs(B - 1.0) < tol)


def cubic_rho_roots(k: float, el: float) -> CubicRoots:
    """The three closed-form roots of ``rho^3 + 3/(4 el k^2) rho - 9/(4 k^2 Lambda^2) = 0``.

    Cube roots use the principal branch.  For ``el < 0`` the validity flags
    refer to the negative-case profile with sign s; for ``el > 0`` both
    flags refer to the positive-case profile.
    """
    k = check_k(k)
    el = float(el)
    if el == 0.0:
        raise ParameterError("eps*Lambda must be non-zero for the initial-data cubic")
    S = _cbrt(9.0 * k + cmath.sqrt(81.0 * k * k + el))
    e1 = _cbrt(el)
    roots = []
    vals = []
    for l in (1, 2, 3):
        w = cmath.exp((4 - 2 * l) * 1j * math.pi / 3.0)
        r = -1.0 / (w * 2.0 * k * e1 * S) + w * S / (2.0 * k * e1 * e1)
        vals.append(r)
    scale = max(1.0, max(abs(v) for v in vals))
    for l, r in zip((1, 2, 3), vals):
        real = abs(r.imag) <= 1e-10 * scale
        res = abs(_cubic(r, k, el))
        if real:
            rr = r.real
            if el < 0:
                valid = {s: _profile_is_unit(s, rr, k, el) for s in (1, -1)}
            else:
                valid = {s: _profile_is_unit(0, rr, k, el) for s in (1, -1)}
        else:
            valid = {1: False, -1: False}
        roots.append([l, r, real, res, valid])
    out = []
    for i, (l, r, real, res, valid) in enumerate(roots):
        coinc = any(
            j != i and real and roots[j][2] and abs(r - roots[j][1]) <= 1e-6 * scale for j in range(3)
        )
        out.append(RhoRoot(l=l, value=r, real=real, residual=res, valid=valid, coincident=coinc))
    return CubicRoots(k=k, el=el, roots=tuple(out))


def positive_rho0(k: float, el: float) -> float:
    """The initial value rho0 of the positive family (el > 0)."""
    k = check_k(k)
    if el <= 0:
        raise ParameterError("the positive family needs eps*Lambda > 0")
    S = (9.0 * k + math.sqrt(81.0 * k * k + el)) ** (1.0 / 3.0)
    e1 = el ** (1.0 / 3.0)
    return (-1.0 + S * S / e1) / (2.0 * k * e1 * S)


# ---------------------------------------------------------------------------
# one-loop profiles


def _sqrt(x):
    return jets.sqrt(x)


def one_loop_profile(s: int, gamma: float, el: float, k: float, rho):
    """The pair ``(A(rho), B(rho))``.

    For ``el < 0`` the negative-case formulas with sign ``s`` are used; for
    ``el > 0`` the positive-case ones (``s`` is ignored).  ``rho`` may be a
    float, array or jet.
    """
    r = jets.value(rho)
    if el < 0:
        if np.any(r + gamma <= 0):
            raise ParameterError("rho + gamma > 0 violated")
        if np.any(r + 2 * gamma <= 0):
            raise ParameterError("rho + 2 gamma > 0 violated")
        if s not in (1, -1):
            raise ParameterError("sign s must be +1 or -1 in the negative case")
        c = math.sqrt(-2.0 * el / 3.0)
        A = (rho * _sqrt((rho + 2 * gamma) / (rho + gamma))) * (s * k * c)
        B = (rho / _sqrt(rho + 2 * gamma)) * (s * math.sqrt(-el / 3.0))
        return A, B
    if el > 0:
        if np.any(r + gamma <= 0):
            raise ParameterError("rho + gamma > 0 violated")
        if np.any(r + 2 * gamma >= 0):
            raise ParameterError("rho + 2 gamma < 0 violated")
        c = math.sqrt(2.0 * el / 3.0)
        A = (rho * _sqrt(-(rho + 2 * gamma) / (rho + gamma))) * (k * c)
        B = (rho / _sqrt(-(rho + 2 * gamma))) * math.sqrt(el / 3.0)
        return A, B
    raise ParameterError("eps*Lambda must be non-zero")


def rho_flow_speed(gamma: float, el: float):
    """The stated right-hand side ``F`` of the rho flow (positive on its chart)."""
    if el < 0:
        c = math.sqrt(-2.0 * el / 3.0)
        return lambda rho: (rho * _sqrt((rho + gamma) / (rho + 2 * gamma))) * c
    c = math.sqrt(2.0 * el / 3.0)
    return lambda rho: (rho * _sqrt(-(rho + gamma) / (rho + 2 * gamma))) * c


@dataclass(frozen=True)
class RhoChart:
    """The rho coordinate of a one-loop solution."""

    gamma: float
    rho0: float
    domain: tuple

    def contains(self, rho) -> bool:
        lo, hi = self.domain
        return bool(np.all((np.asarray(rho) > lo) & (np.asarray(rho) < hi)))

    def interior(self, n: int, margin: float = 0.05, span: float = 4.0) -> np.ndarray:
        """``n`` points inside the domain (unbounded ends cut at ``span`` * |rho0|)."""
        lo, hi = self.domain
        hi_eff = hi if math.isfinite(hi) else max(lo, 0.0) + span * abs(self.rho0)
        width = hi_eff - lo
        return lo + width * (margin + (1 - 2 * margin) * (np.arange(n) + 0.5) / n)


# ---------------------------------------------------------------------------
# branch right-hand sides


def branch_slopes(a: float, b: float, k: float, el: float) -> np.ndarray:
    """Real slopes ``b'`` solving the self-duality cubic at ``(a, b)``, ascending."""
    p = el * a * a * b * b / 3.0
    q = 2.0 * k * el * a * a * b**5 / 3.0
    real = []
    for x in _depressed_cubic_real_roots(p, q):
        for _ in range(2):  # polish
            df = 3 * x * x + p
            if df != 0:
                x -= (x**3 + p * x + q) / df
        real.append((k * b**3 - x) / a)
    return np.sort(np.array(real))


def _depressed_cubic_real_roots(p: float, q: float, imag_tol: float = 1e-7) -> list:
    """Real roots of ``x^3 + p x + q``.

    A conjugate pair whose imaginary part is below ``imag_tol`` times the
    root scale counts as a (near) double real root, so that root counts do
    not flicker where two slopes merge.
    """
    if 4 * p**3 + 27 * q * q < 0:
        # three distinct real roots (p < 0): trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        c = min(1.0, max(-1.0, 3.0 * q / (p * m)))
        th = math.acos(c) / 3.0
        return [m * math.cos(th - 2.0 * math.pi * j / 3.0) for j in range(3)]
    h = math.sqrt(max(0.0, q * q / 4.0 + p**3 / 27.0))
    r = float(np.cbrt(-q / 2.0 + h) + np.cbrt(-q / 2.0 - h))
    # the other two roots solve x^2 + r x + r^2 + p = 0
    disc = -3.0 * r * r - 4.0 * p
    im = 0.5 * math.sqrt(max(0.0, -disc))
    scale = max(1.0, abs(r), math.hypot(r / 2.0, im))
    if im <= imag_tol * scale:
        return [r, -r / 2.0, -r / 2.0]
    return [r]


def _select_branch(slopes: np.ndarray, l: int) -> float:
    if l == 1:
        return float(slopes[0])
    if len(slopes) < 3:
        raise InvalidBranchError(f"branch {l} needs three real slopes, found {len(slopes)}")
    return float(slopes[l - 1])


def _a_prime(a, b, bp, k, el):
    """``a'`` on the self-duality constraint surface.

    The branch formula ``-(k^2 b^6 + a^2 (el b^2 + b'^2)) / (2 a b b')`` is a
    removable 0/0 where ``b' = 0``.  Eliminating ``el`` with the cubic gives
    the equivalent ``-(B^2 + K B + 2 K^2) / (b (B + 2 K))`` with ``K = k b^3``
    and ``B = K - a b'``, which is regular there.  It degenerates only at
    ``B = -2K``, where the Einstein constant would be infinite.
    """
    K = k * b**3
    beta = K - a * bp
    den = b * (beta + 2.0 * K)
    if den == 0:
        raise SingularSlopeError("k b^3 - a b' = -2 k b^3")
    return -(beta * beta + K * beta + 2.0 * K * K) / den


def qk_timelike_rhs(a: float, b: float, k: float, eps: int, lam: float, l: int = 1) -> tuple[float, float]:
    """``(a', b')`` of the timelike branch system at ``(a, b)``."""
    if a == 0 or b == 0:
        raise ParameterError("a and b must be non-zero")
    if l not in (1, 2, 3):
        raise ParameterError("branch l must be 1, 2 or 3")
    el = eps * lam
    bp = _select_branch(branch_slopes(a, b, k, el), l)
    return _a_prime(a, b, bp, k, el), bp


def qk_spacelike_rhs(a: float, b: float, k: float, lam: float, l: int = 1) -> tuple[float, float]:
    """``(a', b')`` of the spacelike branch system: the eps = -1 timelike one, reversed."""
    ap, bp = qk_timelike_rhs(a, b, k, -1, lam, l)
    return -ap, -bp


def qk_constraint(a, b, bp, k, el, spacelike: bool = False) -> float:
    """Residual of the Einstein-constant relation.

    Timelike: ``el - 3 (k b^3 - a b')^3 / (a^2 b^2 (-3 k b^3 + a b'))``.
    Spacelike (``el = Lambda``): ``Lambda - 3 (k b^3 + a b')^3 / (a^2 b^2 (3 k b^3 + a b'))``.
    """
    if spacelike:
        return el - 3.0 * (k * b**3 + a * bp) ** 3 / (a * a * b * b * (3.0 * k * b**3 + a * bp))
    return el - 3.0 * (k * b**3 - a * bp) ** 3 / (a * a * b * b * (-3.0 * k * b**3 + a * bp))


def qk_lifted_rhs(k: float, el: float, spacelike: bool = False):
    """Right-hand side for the state ``(a, b, b')``.

    ``a'`` is the branch formula and
    ``b'' = 3 k^2 b^5 / (2 a^2) + (5 b'^2 + el b^2) / (2 b)``, the derivative
    of the slope relation along solutions.  It stays regular where two
    slopes merge.  Spacelike solutions are time-reversed timelike ones with
    ``el = -Lambda``; pass ``spacelike=True`` to integrate them forward.
    """
    s = -1.0 if spacelike else 1.0

    def rhs(t, y):
        a, b, bp = y
        return [
            s * _a_prime(a, b, s * bp, k, el),
            bp,
            1.5 * k * k * b**5 / (a * a) + (5.0 * bp * bp + el * b * b) / (2.0 * b),
        ]

    return rhs


def qk_tracked_rhs(k: float, el: float, spacelike: bool = False, gap: float = 1e-2):
    """Branch system that follows its slope through root crossings.

    The state is ``(a, b, s)``.  ``b'`` is the real slope nearest to ``s``
    and ``s`` evolves by the ``b''`` equation of ``qk_lifted_rhs``, so the
    solution stays on the cubic's solution set (a stable first-order flow)
    while its branch label is carried by continuity.  Where the nearest slope
    is within ``gap`` (relative) of another one, root finding is
    ill-conditioned and ``s`` itself is used.
    """
    sg = -1.0 if spacelike else 1.0

    def rhs(t, y):
        a, b, s = y
        slopes = branch_slopes(a, b, k, el) * sg
        bp = s
        if len(slopes):
            i = int(np.argmin(np.abs(slopes - s)))
            others = np.delete(slopes, i)
            sep = np.min(np.abs(others - slopes[i])) if len(others) else np.inf
            if sep > gap * float(np.max(np.abs(slopes))):
                bp = float(slopes[i])
        return [
            sg * _a_prime(a, b, sg * bp, k, el),
            bp,
            1.5 * k * k * b**5 / (a * a) + (5.0 * bp * bp + el * b * b) / (2.0 * b),
        ]

    return rhs


def lightlike_einstein_rhs(state, lam: float) -> np.ndarray:
    """Derivatives of ``(a, b, f, p, a', b', f', p')`` for the null-center system."""
    a, b, f, p, ap, bp, fp, pp = state
    if a == 0 or b == 0:
        raise ParameterError("a and b must be non-zero")
    app = -lam * a + 2.0 * ap * ap / a + ap * bp / b
    bpp = -lam * b + 7.0 * bp * bp / (4.0 * b)
    fpp = (
        ap * (-f * bp + b * fp) / (a * b)
        + (p * bp - b * pp) ** 2 / (2.0 * a * a * b * b)
        + (-3.0 * f * bp * bp + 3.0 * b * bp * fp + b * f * bpp) / (b * b)
    )
    ppp = -2.0 * p * bp * bp / (b * b) + 3.0 * ap * pp / a + (2.0 * a * bp * pp + p * (-3.0 * ap * bp + a * bpp)) / (a * b)
    return np.array([ap, bp, fp, pp, app, bpp, fpp, ppp])


def lightlike_residuals(a, b, f, p, d1, d2, lam: float) -> np.ndarray:
    """Residuals of the five null-center equations.

    ``d1`` and ``d2`` hold first and second derivatives of ``(a, b, f, p)``.
    The last entry is the first-order relation ``a' = a (Lambda b / b' - b'/(4 b))``.
    """
    ap, bp, fp, pp = d1
    app, bpp, fpp, ppp = d2
    if bp == 0:
        raise SingularSlopeError("b' = 0")
    pred = lightlike_einstein_rhs([a, b, f, p, ap, bp, fp, pp], lam)
    return np.array(
        [
            app - pred[4],
            bpp - pred[5],
            fpp - pred[6],
            ppp - pred[7],
            ap - a * (lam * b / bp - bp / (4.0 * b)),
        ]
    )


# ---------------------------------------------------------------------------
# closed-form frame evolutions


def _exp_entry(rate: float, t0: float):
    return lambda t: jets.exp((t - t0) * rate)


def _pow_entry(c: float, p: float, t0: float):
    return lambda t: jets.power((t - t0) * c + 1.0, p)


def stationary_timelike(k: float, eps: int = 1, t0: float = 0.0) -> FrameEvolution:
    """``a = exp(-2k dt)``, ``b = c = exp(-k dt)``; eps * Lambda = -6k^2."""
    k = check_k(k)
    return FrameEvolution(
        eps=eps,
        kind=FrameKind.Orthonormal,
        labeling=CenterLabeling.TimelikeOrRiemannian,
        k=k,
        t0=t0,
        entries={"a": _exp_entry(-2 * k, t0), "b": _exp_entry(-k, t0)},
        name="StationaryTimelike",
    )


def stationary_spacelike(k: float, t0: float = 0.0) -> FrameEvolution:
    """``a = exp(2k dt)``, ``b = c = exp(k dt)``, eps = -1; Lambda = 6k^2."""
    k = check_k(k)
    return FrameEvolution(
        eps=-1,
        kind=FrameKind.Orthonormal,
        labeling=CenterLabeling.Spacelike,
        k=k,
        t0=t0,
        entries={"a": _exp_entry(2 * k, t0), "b": _exp_entry(k, t0)},
        name="StationarySpacelike",
    )


def lightlike_qpk(lam: float, k: float, t0: float = 0.0) -> FrameEvolution:
    """Null-center solution with ``b = exp(2 sqrt(Lambda/3) dt)``, ``a = exp(sqrt(Lambda/3) dt)``."""
    k = check_k(k)
    if lam <= 0:
        raise ParameterError("LightlikeQPK needs Lambda > 0")
    r = math.sqrt(lam / 3.0)
    return FrameEvolution(
        eps=-1,
        kind=FrameKind.Witt,
        labeling=CenterLabeling.Lightlike,
        k=k,
        t0=t0,
        entries={"a": _exp_entry(r, t0), "b": _exp_entry(2 * r, t0)},
        name="LightlikeQPK",
    )


def lorentzian_lightlike(lam: float, k: float, t0: float = 0.0) -> FrameEvolution:
    """Lorentzian analog: eps = +1, Witt frame, Lambda < 0."""
    k = check_k(k)
    if lam >= 0:
        raise ParameterError("LorentzianLightlike needs Lambda < 0")
    r = math.sqrt(-lam / 3.0)
    return FrameEvolution(
        eps=1,
        kind=FrameKind.Witt,
        labeling=CenterLabeling.Lightlike,
        k=k,
        t0=t0,
        entries={"a": _exp_entry(r, t0), "b": _exp_entry(2 * r, t0)},
        name="LorentzianLightlike",
    )


def hyperkahler_timelike(k: float, eps: int = 1, t0: float = 0.0) -> FrameEvolution:
    """``a = (1 + 3k dt)^(1/3)``, ``b = c = (1 + 3k dt)^(-1/3)`` on ``(t0 - 1/(3k), inf)``."""
    k = check_k(k)
    return FrameEvolution(
        eps=eps,
        kind=FrameKind.Orthonormal,
        labeling=CenterLabeling.TimelikeOrRiemannian,
        k=k,
        t0=t0,
        entries={"a": _pow_entry(3 * k, 1 / 3, t0), "b": _pow_entry(3 * k, -1 / 3, t0)},
        domain=(t0 - 1.0 / (3.0 * k), math.inf),
        name="HyperKahlerTimelike",
    )


def hyperkahler_spacelike(k: float, t0: float = 0.0) -> FrameEvolution:
    """Mirror of the timelike family: ``1 - 3k dt`` on ``(-inf, t0 + 1/(3k))``."""
    k = check_k(k)
    return FrameEvolution(
        eps=-1,
        kind=FrameKind.Orthonormal,
        labeling=CenterLabeling.Spacelike,
        k=k,
        t0=t0,
        entries={"a": _pow_entry(-3 * k, 1 / 3, t0), "b": _pow_entry(-3 * k, -1 / 3, t0)},
        domain=(-math.inf, t0 + 1.0 / (3.0 * k)),
        name="HyperKahlerSpacelike",
    )


def hyperkahler_lightlike(k: float, t0: float = 0.0) -> FrameEvolution:
    """Flat null-center family: ``a = b = 1``, ``f = -2k dt``, ``p = 0``."""
    k = check_k(k)
    return FrameEvolution(
        eps=-1,
        kind=FrameKind.Witt,
        labeling=CenterLabeling.Lightlike,
        k=k,
        t0=t0,
        entries={"f": lambda t: (t - t0) * (-2.0 * k)},
        name="HyperKahlerLightlike",
    )


# ---------------------------------------------------------------------------
# the specification object


@dataclass(frozen=True)
class SolutionSpec:
    """A catalog family with validated parameters.

    Build instances with ``SolutionSpec.make``; it derives the Einstein
    constant for families where it is fixed and computes ``gamma`` and
    ``rho0`` for the one-loop families.
    """

    family: Family
    k: float
    eps: int
    lam: float
    t0: float = 0.0
    branch: Optional[int] = None
    gamma: Optional[float] = None
    rho0: Optional[float] = None
    sign: Optional[int] = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # -- construction ---------------------------------------------------
    @classmethod
    def make(
        cls,
        family,
        k: float = 1.0,
        eps: Optional[int] = None,
        lam: Optional[float] = None,
        epslambda: Optional[float] = None,
        branch: Optional[int] = None,
        t0: float = 0.0,
    ) -> "SolutionSpec":
        fam = family if isinstance(family, Family) else Family(family)
        try:
            k = check_k(k)
        except ValueError as exc:
            raise ParameterError(str(exc)) from None
        fixed_eps = {
            Family.StationarySpacelike: -1,
            Family.NegativeSpacelike: -1,
            Family.PositiveSpacelike: -1,
            Family.LightlikeQPK: -1,
            Family.LorentzianLightlike: 1,
            Family.HyperKahlerSpacelike: -1,
            Family.HyperKahlerLightlike: -1,
        }
        if fam in fixed_eps:
            if eps is not None and eps != fixed_eps[fam]:
                raise ParameterError(f"{fam.value}: {CONSTRAINTS[fam]}")
            eps = fixed_eps[fam]
        elif eps is None:
            eps = 1
        if eps not in (1, -1):
            raise ParameterError("eps must be +1 or -1")
        if lam is not None and epslambda is not None and abs(eps * lam - epslambda) > 1e-12 * max(1, abs(lam)):
            raise ParameterError("Lambda and eps*Lambda disagree")
        if lam is None and epslambda is not None:
            lam = eps * epslambda
        fixed_lam = {
            Family.StationaryTimelike: -6.0 * k * k * eps,
            Family.StationarySpacelike: 6.0 * k * k,
            Family.HyperKahlerTimelike: 0.0,
            Family.HyperKahlerSpacelike: 0.0,
            Family.HyperKahlerLightlike: 0.0,
        }
        if fam in fixed_lam:
            if lam is not None and abs(lam - fixed_lam[fam]) > 1e-12 * max(1.0, abs(fixed_lam[fam])):
                raise ParameterError(f"{fam.value}: {CONSTRAINTS[fam]}")
            lam = fixed_lam[fam]
        if lam is None:
            raise ParameterError(f"{fam.value} needs an Einstein constant (--lambda or --epslambda)")
        lam = float(lam)
        el = eps * lam
        if fam.branched:
            branch = 1 if branch is None else int(branch)
            if branch not in (1, 2, 3):
                raise ParameterError("branch l must be 1, 2 or 3")
        elif branch not in (None, 1):
            raise ParameterError(f"{fam.value} has no branch index")
        else:
            branch = None

        if fam is Family.NegativeTimelike:
            if not el < 0:
                raise ParameterError("NegativeTimelike needs eps*Lambda < 0")
            if branch >= 2 and el > -81.0 * k * k:
                raise InvalidBranchError(f"branch {branch} needs eps*Lambda <= -81k^2 = {-81.0 * k * k}")
        elif fam is Family.PositiveTimelike:
            if not el > 0:
                raise ParameterError("PositiveTimelike needs eps*Lambda > 0")
        elif fam is Family.NegativeSpacelike:
            if not lam < 0:
                raise ParameterError("NegativeSpacelike needs Lambda < 0")
        elif fam is Family.PositiveSpacelike:
            if not lam > 0:
                raise ParameterError("PositiveSpacelike needs Lambda > 0")
            if branch >= 2 and lam < 81.0 * k * k:
                raise InvalidBranchError(f"branch {branch} needs Lambda >= 81k^2 = {81.0 * k * k}")
        elif fam is Family.LightlikeQPK and not lam > 0:
            raise ParameterError("LightlikeQPK needs Lambda > 0")
        elif fam is Family.LorentzianLightlike and not lam < 0:
            raise ParameterError("LorentzianLightlike needs Lambda < 0")

        gamma = rho0 = sign = None
        if fam.one_loop:
            tel = -lam if fam.spacelike else el
            if tel < 0:
                sign = 1 if branch == 1 else -1
                root = cubic_rho_roots(k, tel)[branch]
                if not root.real or not root.valid[sign]:
                    raise ParameterError(f"rho_{branch} is not a valid initial value at eps*Lambda = {tel}")
                rho0 = root.rho
            else:
                sign = 1
                rho0 = positive_rho0(k, tel)
            gamma = gamma_of_rho0(rho0, tel)
            if abs(gamma) < 1e-13 * max(1.0, abs(rho0)):
                gamma = 0.0
        return cls(family=fam, k=k, eps=eps, lam=lam, t0=float(t0), branch=branch, gamma=gamma, rho0=rho0, sign=sign)

    # -- derived data ---------------------------------------------------
    @property
    def epslambda(self) -> float:
        return self.eps * self.lam

    @property
    def timelike_el(self) -> float:
        """``eps * Lambda`` of the timelike problem this family is built from."""
        return -self.lam if self.family.spacelike else self.epslambda

    @property
    def label(self) -> str:
        b = f" l={self.branch}" if self.branch else ""
        return f"{self.family.value}{b} k={self.k:g} eps={self.eps:+d} Lambda={self.lam:g}"

    def params(self) -> dict:
        out = {"family": self.family.value, "k": self.k, "eps": self.eps, "Lambda": self.lam, "t0": self.t0}
        if self.branch is not None:
            out["branch"] = self.branch
        if self.family.one_loop:
            out.update(gamma=self.gamma, rho0=self.rho0, s=self.sign)
        return out

    @property
    def rho_chart(self) -> RhoChart:
        if not self.family.one_loop:
            raise ParameterError(f"{self.family.value} has no rho chart")
        g, r0, tel = self.gamma, self.rho0, self.timelike_el
        if tel > 0:
            dom = (-g, -2 * g)
        elif self.sign == 1:
            dom = (0.0, math.inf) if g >= 0 else (-2 * g, math.inf)
        else:
            dom = (-g, 0.0)
        return RhoChart(gamma=g, rho0=r0, domain=dom)

    @property
    def rho_direction(self) -> int:
        """Sign relating the timelike chart time to the stated rho flow."""
        if self.timelike_el > 0:
            return 1
        return -self.sign

    @property
    def rho_flow(self) -> RhoFlow:
        """The rho flow in the (timelike) chart time, starting at ``t0``."""
        if "flow" not in self._cache:
            chart = self.rho_chart
            self._cache["flow"] = RhoFlow(
                F=rho_flow_speed(self.gamma, self.timelike_el),
                rho0=self.rho0,
                t0=self.t0,
                rho_domain=chart.domain,
                direction=self.rho_direction,
            )
        return self._cache["flow"]

    @property
    def domain(self) -> tuple:
        """Open t-interval of the frame evolution."""
        if self.family.one_loop:
            lo, hi = self.rho_flow.t_domain
            if self.family.spacelike:
                lo, hi = 2 * self.t0 - hi, 2 * self.t0 - lo
            return (lo, hi)
        return self.frame_evolution().domain

    # -- frame evolutions and metrics ----------------------------------
    def _one_loop_entries(self):
        flow = self.rho_flow
        s, g, tel, k = self.sign, self.gamma, self.timelike_el, self.k

        memo = {}

        def ab(t):
            # a and b are requested separately at the same times; share rho
            key = t.coef.tobytes() + bytes(str(t.coef.shape), "ascii") if isinstance(t, Jet) else np.asarray(t, float).tobytes()
            if key not in memo:
                memo.clear()
                memo[key] = one_loop_profile(s, g, tel, k, flow.jet(t))
            return memo[key]

        return (lambda t: ab(t)[0]), (lambda t: ab(t)[1])

    def frame_evolution(self) -> FrameEvolution:
        if "fe" in self._cache:
            return self._cache["fe"]
        fam, k, t0 = self.family, self.k, self.t0
        if fam is Family.StationaryTimelike:
            fe = stationary_timelike(k, self.eps, t0)
        elif fam is Family.StationarySpacelike:
            fe = stationary_spacelike(k, t0)
        elif fam is Family.LightlikeQPK:
            fe = lightlike_qpk(self.lam, k, t0)
        elif fam is Family.LorentzianLightlike:
            fe = lorentzian_lightlike(self.lam, k, t0)
        elif fam is Family.HyperKahlerTimelike:
            fe = hyperkahler_timelike(k, self.eps, t0)
        elif fam is Family.HyperKahlerSpacelike:
            fe = hyperkahler_spacelike(k, t0)
        elif fam is Family.HyperKahlerLightlike:
            fe = hyperkahler_lightlike(k, t0)
        else:
            fa, fb = self._one_loop_entries()
            if fam.spacelike:
                a_ent = lambda t: fa(2 * t0 - t)
                b_ent = lambda t: fb(2 * t0 - t)
                lab = CenterLabeling.Spacelike
            else:
                a_ent, b_ent = fa, fb
                lab = CenterLabeling.TimelikeOrRiemannian
            fe = FrameEvolution(
                eps=self.eps,
                kind=FrameKind.Orthonormal,
                labeling=lab,
                k=k,
                t0=t0,
                entries={"a": a_ent, "b": b_ent},
                domain=self.domain,
                name=self.label,
            )
        self._cache["fe"] = fe
        return fe

    def metric(self) -> MetricField:
        """The metric in the chart time t."""
        return metric_from_evolution(self.frame_evolution())

    def rho_metric(self) -> MetricField:
        """The metric in the rho coordinate (one-loop families only)."""
        return rho_chart_metric(self)

    def entry_derivatives(self, t, order: int = 2) -> dict:
        """Values and t-derivatives of the frame entries a, b (and f, p) at ``t``."""
        fe = self.frame_evolution()
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tj = Jet.variable(t_arr, 0, 1, order)
        out = {}
        for name in "abfp":
            e = fe.entry(name, tj)
            if not isinstance(e, Jet):
                e = Jet.constant(np.broadcast_to(e, t_arr.shape), 1, order)
            out[name] = np.array([e.coef[m] * math.factorial(m) for m in range(order + 1)])
        return out

    @property
    def time_scale(self) -> float:
        """Characteristic time ``1 / max(k, sqrt(|Lambda| / 6))`` of the family."""
        return 1.0 / max(self.k, math.sqrt(abs(self.lam) / 6.0))

    def sample_times(self, n: int, margin: float = 0.05, span: Optional[float] = None) -> np.ndarray:
        """``n`` interior times; infinite ends are cut ``span`` (default: one time scale) from ``t0``."""
        span = self.time_scale if span is None else span
        lo, hi = self.domain
        lo_e = lo if math.isfinite(lo) else min(self.t0, hi) - span
        hi_e = hi if math.isfinite(hi) else max(self.t0, lo) + span
        w = hi_e - lo_e
        return lo_e + w * (margin + (1 - 2 * margin) * (np.arange(n) + 0.5) / n)

    # -- ODE problem ----------------------------------------------------
    def ode_problem(self) -> ODEProblem:
        """Initial value problem reproducing this family, with its closed form."""
        fam, k, t0 = self.family, self.k, self.t0
        fe = self.frame_evolution()
        dom = self.domain

        def closed(names):
            def ref(t):
                d = self.entry_derivatives(t, 1)
                return np.array([d[n][0][0] for n in names])

            return ref

        if fam.hyperkahler and not fam.lightlike:
            sgn = -1.0 if fam.spacelike else 1.0

            def rhs(t, y):
                a, b, c = y
                return [sgn * k * b * c, -sgn * k * b * b * c / a, -sgn * k * b * c * c / a]

            return ODEProblem(
                rhs=rhs, y0=np.ones(3), t0=t0, reference=lambda t: np.array([fe.entry(n, t) for n in "abc"]),
                compare=(0, 1, 2), t_domain=dom, names=("a", "b", "c"),
                events=(Event(lambda t, y: y[0] - 1e-6, Termination.DomainBoundary, "a->0"),),
            )
        if fam.lightlike:
            # the system is written for eps = -1; eps = +1 flips the sign of Lambda
            lam = -fe.eps * self.lam
            d = self.entry_derivatives(t0, 1)
            y0 = np.array([1.0, 1.0, 0.0, 0.0] + [float(d[n][1][0]) for n in "abfp"])
            if fam is Family.HyperKahlerLightlike:
                # flat case: b' = 0, the null-center system degenerates; integrate y'' = 0 for (a, b, f, p)
                rhs = lambda t, y: np.concatenate([y[4:], np.zeros(4)])
                constraint = None
            else:
                rhs = lambda t, y: lightlike_einstein_rhs(y, lam)
                constraint = lambda y: y[4] - y[0] * (lam * y[1] / y[5] - y[5] / (4.0 * y[1]))
            ref = lambda t: np.array([fe.entry(n, t) for n in "abfp"], dtype=float)
            return ODEProblem(
                rhs=rhs, y0=y0, t0=t0, reference=ref, compare=(0, 1, 2, 3), t_domain=dom,
                constraint=constraint, names=("a", "b", "f", "p", "a'", "b'", "f'", "p'"),
            )
        # Einstein families with orthonormal frames: the branch system, with
        # the slope carried along so that branch labels survive root crossings
        tel = self.timelike_el
        spacelike = fam.spacelike
        l = self.branch if fam in (Family.NegativeTimelike, Family.PositiveSpacelike) else 1
        bp0 = _select_branch(branch_slopes(1.0, 1.0, k, tel), l) * (-1.0 if spacelike else 1.0)
        if fam.one_loop:
            # At a double root (eps*Lambda = -81 k^2) the cubic gives the slope
            # only to sqrt(machine eps); the closed form pins it exactly.
            exact = float(self.entry_derivatives(t0, 1)["b"][1][0])
            if abs(exact - bp0) > 1e-6 * max(1.0, abs(bp0)):
                raise InvalidBranchError(f"closed-form slope {exact} does not match branch root {bp0}")
            bp0 = exact
        rhs = qk_tracked_rhs(k, tel, spacelike)
        c_el = self.lam if spacelike else tel

        def constraint(y):
            # the Einstein constant implied by the slope the flow actually uses
            return qk_constraint(y[0], y[1], rhs(0.0, y)[1], k, c_el, spacelike=spacelike)

        events = (
            Event(lambda t, y: y[0] - 1e-8, Termination.DomainBoundary, "a->0"),
            Event(lambda t, y: y[1] - 1e-8, Termination.DomainBoundary, "b->0"),
        )
        if fam.one_loop:
            def ref(t):
                d = self.entry_derivatives(t, 0)
                return np.array([d["a"][0], d["b"][0]])
        else:
            ref = lambda t: np.array([np.broadcast_to(fe.entry(n, t), np.shape(t)) for n in "ab"], dtype=float)
        return ODEProblem(
            rhs=rhs, y0=np.array([1.0, 1.0, bp0]), t0=t0, reference=ref, compare=(0, 1), t_domain=dom,
            events=events, constraint=constraint, names=("a", "b", "b'"), vectorized=True,
        )


# ---------------------------------------------------------------------------
# rho-chart metric


def rho_chart_metric(spec: SolutionSpec) -> MetricField:
    """The one-loop metric in the coordinates ``(rho, x, y, z)``.

    Timelike: ``-3/(2 el rho^2) (rho+2g)/(rho+g) (eps drho^2 + eps/k^2 Q^2 e1^2
    + 2 (rho+g)(e2^2 + e3^2))`` with ``Q = (rho+g)/(rho+2g)``.
    Spacelike: ``3/(2 Lambda rho^2) (rho+2g)/(rho+g) (-drho^2 + 2(rho+g)(-e1^2 + e2^2)
    + (Q/k)^2 e3^2)``.
    """
    if not spec.family.one_loop:
        raise ParameterError(f"{spec.family.value} has no rho chart")
    g, k, eps = spec.gamma, spec.k, spec.eps
    chart = spec.rho_chart
    spacelike = spec.family.spacelike
    lab = CenterLabeling.Spacelike if spacelike else CenterLabeling.TimelikeOrRiemannian
    el = spec.timelike_el

    def coeffs(rho):
        P = ((rho + 2 * g) / (rho + g)) / (rho * rho)
        Q = (rho + g) / (rho + 2 * g)
        if spacelike:
            P = P * (3.0 / (2.0 * spec.lam))
            return [P * -1.0, P * (rho + g) * -2.0, P * (rho + g) * 2.0, P * Q * Q * (1.0 / (k * k))]
        P = P * (-3.0 / (2.0 * el))
        return [P * eps, P * Q * Q * (eps / (k * k)), P * (rho + g) * 2.0, P * (rho + g) * 2.0]

    probe = np.array([chart.rho0])
    signs = np.sign([float(np.asarray(c)[0]) for c in coeffs(probe)])
    eta4 = np.diag(signs)

    def coframe(X):
        rho, x, y, _ = X
        E = coframe_jets(k, x, y, lab)
        C = coeffs(rho)
        zero = rho * 0.0
        rows = [jets.stack([jets.sqrt(C[0] * signs[0]), zero, zero, zero], 0)]
        for i in range(3):
            f = jets.sqrt(C[i + 1] * signs[i + 1])
            rows.append(jets.stack([f * E[i][j] for j in range(4)], 0))
        return jets.stack(rows, 0)

    return MetricField(coframe=coframe, eta4=eta4, domain=chart.domain, name=spec.label + " (rho chart)")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class StationarityDiagnostics:
    t: np.ndarray
    mu: np.ndarray
    lam: np.ndarray

    @property
    def mu_spread(self) -> float:
        return float(np.ptp(self.mu))

    @property
    def lam_spread(self) -> float:
        return float(np.ptp(self.lam))


def stationarity_diagnostics(fe: FrameEvolution, t) -> StationarityDiagnostics:
    """Logarithmic derivatives ``mu = (log a)'`` and ``lambda = (log b)'`` at times ``t``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    tj = Jet.variable(t_arr, 0, 1, 1)
    a = fe.entry("a", tj)
    b = fe.entry("b", tj)
    mu = a.coef[1] / a.coef[0]
    lam = b.coef[1] / b.coef[0]
    return StationarityDiagnostics(t=t_arr, mu=np.asarray(mu), lam=np.asarray(lam))


def weyl_nu(spec: SolutionSpec, t) -> np.ndarray:
    """Closed-form eigenvalue ``nu`` (timelike) or ``nu'`` (spacelike) at times ``t``.

    ``nu = 16 k^3 b^7 / (eps a^2 (-3 k b^3 + a b'))`` and
    ``nu' = -16 k^3 b^7 / (eps a^2 (3 k b^3 + a b'))``.  The power of ``a`` is
    fixed by requiring constant eigenvalues on the stationary families; the
    sign of ``nu'`` by time reversal, which is an isometry flipping ``b'``.
    """
    d = spec.entry_derivatives(t, 1)
    a, b, bp = d["a"][0], d["b"][0], d["b"][1]
    k, eps = spec.k, spec.eps
    if spec.family.spacelike:
        return -16 * k**3 * b**7 / (eps * a**2 * (3 * k * b**3 + a * bp))
    return 16 * k**3 * b**7 / (eps * a**2 * (-3 * k * b**3 + a * bp))
