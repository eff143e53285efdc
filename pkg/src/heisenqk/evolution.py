"""Adaptive integration of the branch systems and of the rho flow.

The integrator is scipy's explicit Runge-Kutta 5(4) pair (``RK45``) with dense
output.  Domain boundaries are handled with terminal events, whose roots
scipy refines by bracketing, so trajectories stop just short of the boundary
instead of stepping across it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from . import jets
from .jets import Jet

__all__ = [
    "Termination",
    "Trajectory",
    "Event",
    "integrate",
    "RhoFlow",
    "ODEProblem",
    "CrosscheckReport",
    "crosscheck",
    "taylor_flow",
    "compose_taylor",
    "time_of_rho",
]


class Termination(enum.Enum):
    ReachedSpan = "reached_span"
    DomainBoundary = "domain_boundary"
    SingularSlope = "singular_slope"
    StepUnderflow = "step_underflow"


@dataclass(frozen=True)
class Event:
    """A terminal event: integration stops where ``fn(t, y)`` crosses zero.

    ``kind`` is the termination reason reported when the event fires.
    """

    fn: Callable[[float, np.ndarray], float]
    kind: Termination = Termination.DomainBoundary
    name: str = "boundary"


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    termination: Termination
    interpolant: Callable = field(repr=False)
    event: Optional[str] = None

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __call__(self, t) -> np.ndarray:
        return self.interpolant(t)


def integrate(
    rhs: Callable,
    y0: Sequence[float],
    span: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-12,
    events: Sequence[Event] = (),
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``span`` with terminal events."""
    t0, t1 = map(float, span)
    fns = []
    for ev in events:
        f = (lambda e: lambda t, y: e.fn(t, y))(ev)
        f.terminal = True
        fns.append(f)
    sol = solve_ivp(
        rhs,
        (t0, t1),
        np.asarray(y0, dtype=float),
        method="RK45",
        rtol=rtol,
        atol=atol,
        events=fns or None,
        dense_output=True,
        max_step=max_step,
    )
    name = None
    if sol.status == 1:
        fired = [i for i, te in enumerate(sol.t_events) if len(te)]
        ev = events[fired[0]]
        term, name = ev.kind, ev.name
    elif sol.status == -1:
        term = Termination.StepUnderflow
    else:
        term = Termination.ReachedSpan
    return Trajectory(t=sol.t, y=sol.y, termination=term, interpolant=sol.sol, event=name)


# ---------------------------------------------------------------------------
# Taylor expansion of scalar autonomous flows


def taylor_flow(x0: np.ndarray, rhs: Callable, order: int) -> np.ndarray:
    """Taylor coefficients of the solution of ``x' = rhs(x)`` through ``x0``.

    ``rhs`` must accept one-variable jets.  Returns an array of shape
    ``(order + 1,) + x0.shape``.
    """
    x0 = np.asarray(x0, dtype=float)
    c = np.zeros((order + 1,) + x0.shape)
    c[0] = x0
    for m in range(order):
        x = Jet(c[: m + 1], 1, m)
        c[m + 1] = rhs(x).coef[m] / (m + 1)
    return c


def compose_taylor(t, coef: np.ndarray):
    """Evaluate ``sum_j coef[j] (t - t_value)^j`` with ``t`` a jet (Horner)."""
    if not isinstance(t, Jet):
        return coef[0]
    dt = t - t.value
    out = Jet.constant(coef[-1], t.nvar, t.order)
    for j in range(coef.shape[0] - 2, -1, -1):
        out = out * dt + coef[j]
    return out


# ---------------------------------------------------------------------------
# rho flow


def _segment_integral(f: Callable[[float], float], a: float, e: float) -> float:
    """``int_a^e f`` for ``f`` with an inverse square-root singularity at ``e``.

    Substituting ``rho = e + (a - e) w^2`` removes the singularity.
    """
    h = a - e

    def g(w):
        r = e + h * w * w
        if r == e:  # rounding put the node on the endpoint; a single point does not matter
            return 0.0
        return f(r) * 2.0 * h * w

    val, _ = quad(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return -val


@dataclass
class RhoFlow:
    """Solution of ``rho' = direction * F(rho)`` with ``rho(t0) = rho0``.

    ``F`` is the stated right-hand side, of constant sign on the chart;
    ``direction = -1`` runs the same orbit backwards in t.  Endpoints of the
    chart domain that are 0 or infinite are reached only after infinite time
    (``F`` vanishes linearly at 0 and grows linearly at infinity); the other
    endpoints are reached in finite time.
    """

    F: Callable
    rho0: float
    t0: float
    rho_domain: tuple[float, float]
    direction: int = 1
    rtol: float = 1e-12
    atol: float = 1e-14

    def __post_init__(self):
        lo, hi = self.rho_domain
        if not lo < self.rho0 < hi:
            raise ValueError(f"rho0 = {self.rho0} outside the chart domain ({lo}, {hi})")
        self._cache = {}

    # -- quadrature ------------------------------------------------------
    def _inv(self, r: float) -> float:
        return 1.0 / float(self.F(r))

    def _finite_time_end(self, e: float) -> bool:
        return math.isfinite(e) and e != 0.0

    def _integral_to(self, rho: float) -> float:
        """``int_{rho0}^{rho} d sigma / F(sigma)`` (inf for the 0/inf endpoints)."""
        lo, hi = self.rho_domain
        if rho == lo or rho == hi:
            if not self._finite_time_end(rho):
                return math.copysign(math.inf, (rho - self.rho0) * float(self.F(self.rho0)))
            return _segment_integral(self._inv, self.rho0, rho)
        if not lo < rho < hi:
            raise ValueError(f"rho = {rho} outside the chart domain ({lo}, {hi})")
        val, _ = quad(self._inv, self.rho0, rho, epsabs=0.0, epsrel=1e-12, limit=200)
        return val

    def time_of_rho(self, rho: float) -> float:
        """Chart time ``t(rho)``."""
        return self.t0 + self.direction * self._integral_to(float(rho))

    @property
    def t_domain(self) -> tuple[float, float]:
        if "tdom" not in self._cache:
            ends = [self.time_of_rho(e) for e in self.rho_domain]
            self._cache["tdom"] = (min(ends), max(ends))
        return self._cache["tdom"]

    # -- rho(t) -------------------------------------------------------------
    def _rhs(self, t, y):
        return [self.direction * float(self.F(y[0]))]

    def rho(self, t) -> np.ndarray:
        """``rho(t)`` at the given times (scalar or array)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t_domain
        if np.any((t_arr <= lo) | (t_arr >= hi)):
            bad = t_arr[(t_arr <= lo) | (t_arr >= hi)][0]
            raise ValueError(f"t = {bad} outside the flow's time domain ({lo}, {hi})")
        out = np.empty_like(t_arr)
        for sgn in (1.0, -1.0):
            mask = (t_arr - self.t0) * sgn > 0
            if not np.any(mask):
                continue
            ts = t_arr[mask]
            order = np.argsort(sgn * ts)
            target = ts[order]
            sol = solve_ivp(
                self._rhs,
                (self.t0, float(target[-1])),
                [self.rho0],
                method="DOP853",
                t_eval=target,
                rtol=self.rtol,
                atol=self.atol * max(1.0, abs(self.rho0)),
            )
            if sol.status != 0 or sol.y.shape[1] != target.size:
                raise RuntimeError(f"rho flow integration failed: {sol.message}")
            vals = np.empty_like(target)
            vals[:] = sol.y[0]
            tmp = np.empty_like(ts)
            tmp[order] = vals
            out[mask] = tmp
        out[t_arr == self.t0] = self.rho0
        out = self._polish(t_arr, out)
        return out if np.ndim(t) else out[0]

    def _polish(self, t_arr: np.ndarray, rho: np.ndarray) -> np.ndarray:
        """Solve ``t(rho) = t`` by bracketing near finite-time endpoints.

        ``F`` vanishes like a square root at such an endpoint, so the flow is
        not Lipschitz there and the integrated values lose accuracy, while
        the quadrature for ``t(rho)`` keeps it.
        """
        lo, hi = self.rho_domain
        out = rho.copy()
        for i, (t, r) in enumerate(zip(t_arr, rho)):
            e = hi if r > self.rho0 else lo
            if not self._finite_time_end(e) or abs(r - self.rho0) <= 0.5 * abs(e - self.rho0):
                continue
            # solve for the offset u = rho - e so the tolerance is relative to it
            f = lambda u: self.time_of_rho(e + u) - t
            u1, u2 = 0.5 * (r - e), min(1.5 * (r - e), self.rho0 - e, key=abs)
            j = 0
            while f(u1) * f(u2) > 0 and j < 60:
                u1 *= 0.5
                j += 1
            if f(u1) * f(u2) <= 0:
                r = e + brentq(f, u1, u2, xtol=1e-300, rtol=1e-15, maxiter=200)
            out[i] = r
        return out

    def taylor(self, t, order: int) -> np.ndarray:
        """Taylor coefficients of ``rho`` around each time in ``t``."""
        r = np.atleast_1d(self.rho(t))
        return taylor_flow(r, lambda x: self.F(x) * float(self.direction), order)

    def jet(self, t):
        """``rho`` evaluated on a time jet (or plain times)."""
        if not isinstance(t, Jet):
            return self.rho(t)
        coef = self.taylor(t.value.ravel(), t.order).reshape((t.order + 1,) + t.value.shape)
        return compose_taylor(t, coef)


def time_of_rho(flow: RhoFlow, rho: float) -> float:
    """Chart time of ``rho`` along ``flow``; see ``RhoFlow.time_of_rho``."""
    return flow.time_of_rho(rho)


# ---------------------------------------------------------------------------
# closed form versus integration


@dataclass
class ODEProblem:
    """An initial value problem with a closed-form reference solution.

    ``reference(t)`` returns the closed-form values of the compared
    components ``compare`` of the state; with ``vectorized`` it accepts an
    array of times and returns shape ``(len(compare), n)``.
    ``constraint(y)`` (optional) is a first integral that should stay at zero.
    """

    rhs: Callable
    y0: np.ndarray
    t0: float
    reference: Callable
    compare: tuple
    t_domain: tuple = (-np.inf, np.inf)
    events: tuple = ()
    constraint: Optional[Callable] = None
    names: tuple = ()
    vectorized: bool = False


@dataclass
class CrosscheckReport:
    max_deviation: float
    max_relative_deviation: float
    constraint_drift: float
    t_end: float
    termination: Termination
    samples: int

    def as_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "max_relative_deviation": self.max_relative_deviation,
            "constraint_drift": self.constraint_drift,
            "t_end": self.t_end,
            "termination": self.termination.value,
        }


# The smallest relative tolerance the scipy Runge-Kutta pairs accept.  The
# growing one-loop solutions need it near their finite ends.
TIGHT_RTOL = 100 * np.finfo(float).eps


def crosscheck(
    problem,
    span: float = 2.0,
    rtol: float = TIGHT_RTOL,
    atol: float = 1e-16,
    samples: int = 400,
    boundary_margin: float = 1e-3,
) -> CrosscheckReport:
    """Integrate ``problem`` over ``[t0, t0 + span]`` and compare with its closed form.

    ``problem`` is an ``ODEProblem`` or any object with an ``ode_problem()``
    method.  When a finite end ``t_b`` of the time domain lies inside the
    span, the comparison stops at ``t_b - boundary_margin * (t_b - t0)``:
    the solution diverges at ``t_b`` and, closer than that, the double
    precision value of rho no longer pins the closed form to 1e-8.
    Deviations are measured on a uniform grid using the dense output;
    the relative deviation divides by ``max(1, |reference|)``.
    """
    if not isinstance(problem, ODEProblem):
        problem = problem.ode_problem()
    t0 = problem.t0
    t1 = t0 + span
    lo, hi = problem.t_domain
    events = list(problem.events)
    if span > 0 and hi < t1:
        t1 = hi - boundary_margin * (hi - t0)
    if span < 0 and lo > t1:
        t1 = lo + boundary_margin * (t0 - lo)
    traj = integrate(problem.rhs, problem.y0, (t0, t1), rtol=rtol, atol=atol, events=events)
    if traj.termination is Termination.ReachedSpan and t1 != t0 + span:
        traj = Trajectory(traj.t, traj.y, Termination.DomainBoundary, traj.interpolant, "t_domain")
    grid = np.linspace(t0, traj.t_end, samples)
    ys = traj(grid)
    if problem.vectorized:
        refs = np.asarray(problem.reference(grid), dtype=float)
    else:
        refs = np.stack([np.asarray(problem.reference(t), dtype=float) for t in grid], -1)
    d = np.abs(ys[list(problem.compare)] - refs)
    dev = float(np.max(d))
    rel = float(np.max(d / np.maximum(1.0, np.abs(refs))))
    drift = 0.0
    if problem.constraint is not None:
        c0 = problem.constraint(traj.y[:, 0])
        for j in range(traj.y.shape[1]):
            drift = max(drift, abs(problem.constraint(traj.y[:, j]) - c0), abs(problem.constraint(traj.y[:, j])))
    return CrosscheckReport(
        max_deviation=dev,
        max_relative_deviation=rel,
        constraint_drift=drift,
        t_end=traj.t_end,
        termination=traj.termination,
        samples=samples,
    )
