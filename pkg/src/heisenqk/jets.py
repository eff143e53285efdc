"""Truncated multivariate Taylor jets.

A :class:`Jet` stores the Taylor coefficients of a (possibly tensor valued)
function of ``nvar`` variables around a base point, truncated at total degree
``order``.  Arithmetic on jets propagates exact partial derivatives up to that
order, which is the same information a nest of ``order`` dual-number layers
would carry, but without the combinatorial blow-up of nested objects.

Coefficients are kept in an array of shape ``(M, *shape)`` where ``M`` is the
number of monomials of degree <= ``order`` and ``shape`` is the value shape.
Monomials are ordered by degree first, so the coefficient table of a lower
order jet is a prefix of the table of a higher order one.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "exp",
    "log",
    "sqrt",
    "power",
    "sinh",
    "cosh",
    "einsum",
    "stack",
    "value",
    "matrix_inverse",
    "sqrt_abs_det",
]

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@lru_cache(maxsize=None)
def _monomials(nvar: int, order: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvar), deg):
            alpha = [0] * nvar
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement already yields each exponent once per degree
    return tuple(out)


@lru_cache(maxsize=None)
def _index(nvar: int, order: int) -> dict:
    return {m: i for i, m in enumerate(_monomials(nvar, order))}


@lru_cache(maxsize=None)
def _product_table(nvar: int, order: int):
    """Pairs (i, j) with deg(i)+deg(j) <= order, sorted by target index."""
    mons = _monomials(nvar, order)
    idx = _index(nvar, order)
    rows = []
    for i, a in enumerate(mons):
        for j, b in enumerate(mons):
            c = tuple(x + y for x, y in zip(a, b))
            if sum(c) <= order:
                rows.append((idx[c], i, j))
    rows.sort()
    K = np.array([r[0] for r in rows])
    I = np.array([r[1] for r in rows])
    J = np.array([r[2] for r in rows])
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    return I, J, starts


@lru_cache(maxsize=None)
def _diff_table(nvar: int, order: int, var: int):
    """Source indices and factors for d/dx_var, producing an order-1 jet."""
    idx = _index(nvar, order)
    low = _monomials(nvar, order - 1)
    src = np.empty(len(low), dtype=int)
    fac = np.empty(len(low))
    for i, a in enumerate(low):
        b = list(a)
        b[var] += 1
        src[i] = idx[tuple(b)]
        fac[i] = b[var]
    return src, fac


@lru_cache(maxsize=None)
def _factorials(nvar: int, order: int) -> np.ndarray:
    return np.array([math.prod(math.factorial(e) for e in m) for m in _monomials(nvar, order)], dtype=float)


def _count(nvar: int, order: int) -> int:
    return math.comb(nvar + order, order)


class Jet:
    """Truncated Taylor expansion of a tensor-valued function.

    Parameters
    ----------
    coef : ndarray
        Coefficients, shape ``(M, *shape)``.
    nvar : int
        Number of independent variables.
    order : int
        Truncation degree.
    """

    __slots__ = ("coef", "nvar", "order")
    __array_priority__ = 1000

    def __init__(self, coef, nvar: int, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[0] != _count(nvar, order):
            raise ValueError(
                f"expected {_count(nvar, order)} coefficients for nvar={nvar}, order={order}, got {coef.shape[0]}"
            )
        self.coef = coef
        self.nvar = nvar
        self.order = order

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, val, nvar: int, order: int) -> "Jet":
        val = np.asarray(val, dtype=float)
        coef = np.zeros((_count(nvar, order),) + val.shape)
        coef[0] = val
        return cls(coef, nvar, order)

    @classmethod
    def variable(cls, val, var: int, nvar: int, order: int) -> "Jet":
        """The coordinate function ``x_var`` expanded around ``val``."""
        jet = cls.constant(val, nvar, order)
        if order >= 1:
            e = [0] * nvar
            e[var] = 1
            jet.coef[_index(nvar, order)[tuple(e)]] = 1.0
        return jet

    @classmethod
    def coordinates(cls, point, order: int) -> list["Jet"]:
        """Seed one jet per coordinate.

        ``point`` has shape ``(nvar,)`` or ``(n, nvar)``; in the batched case
        every jet has value shape ``(n,)``.
        """
        point = np.asarray(point, dtype=float)
        nvar = point.shape[-1]
        return [cls.variable(point[..., v], v, nvar, order) for v in range(nvar)]

    # -- basic accessors ----------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.coef.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    def __repr__(self) -> str:
        return f"Jet(nvar={self.nvar}, order={self.order}, shape={self.shape})"

    def __getitem__(self, item) -> "Jet":
        if not isinstance(item, tuple):
            item = (item,)
        return Jet(self.coef[(slice(None),) + item], self.nvar, self.order)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(self.coef[: _count(self.nvar, order)], self.nvar, order)

    def reshape(self, *shape) -> "Jet":
        return Jet(self.coef.reshape((self.coef.shape[0],) + tuple(shape)), self.nvar, self.order)

    def swapaxes(self, a: int, b: int) -> "Jet":
        return Jet(np.swapaxes(self.coef, a + 1 if a >= 0 else a, b + 1 if b >= 0 else b), self.nvar, self.order)

    def sum(self, axis: int) -> "Jet":
        return Jet(self.coef.sum(axis=axis + 1 if axis >= 0 else axis), self.nvar, self.order)

    # -- derivatives --------------------------------------------------
    def diff(self, var: int) -> "Jet":
        """Partial derivative in ``var``; the result has order ``order - 1``."""
        if self.order == 0:
            raise ValueError("order-0 jet carries no derivative information")
        src, fac = _diff_table(self.nvar, self.order, var)
        coef = self.coef[src] * fac.reshape((-1,) + (1,) * len(self.shape))
        return Jet(coef, self.nvar, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of first partials; new leading value axis of length ``nvar``."""
        return stack([self.diff(v) for v in range(self.nvar)], axis=0)

    def partial(self, alpha: Sequence[int]) -> np.ndarray:
        """Value of the mixed partial derivative with multi-index ``alpha``."""
        alpha = tuple(alpha)
        i = _index(self.nvar, self.order)[alpha]
        return self.coef[i] * _factorials(self.nvar, self.order)[i]

    def derivatives(self, k: int) -> np.ndarray:
        """All k-th partial derivatives, shape ``(nvar,)*k + shape``."""
        out = np.empty((self.nvar,) * k + self.shape)
        for combo in itertools.product(range(self.nvar), repeat=k):
            alpha = [0] * self.nvar
            for v in combo:
                alpha[v] += 1
            out[combo] = self.partial(alpha)
        return out

    # -- arithmetic ---------------------------------------------------
    def _align(self, other: "Jet"):
        if other.nvar != self.nvar:
            raise ValueError("jets over different variable sets")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order), order

    def _align_broadcast(self, other: "Jet"):
        a, b, order = self._align(other)
        # value shapes broadcast from the right, so pad just after the coefficient axis
        nd = max(a.coef.ndim, b.coef.ndim)
        if a.coef.ndim < nd:
            a = Jet(a.coef.reshape(a.coef.shape[:1] + (1,) * (nd - a.coef.ndim) + a.coef.shape[1:]), a.nvar, order)
        if b.coef.ndim < nd:
            b = Jet(b.coef.reshape(b.coef.shape[:1] + (1,) * (nd - b.coef.ndim) + b.coef.shape[1:]), b.nvar, order)
        return a, b, order

    def _const_broadcast(self, c):
        c = np.asarray(c, dtype=float)
        return c.reshape((1,) + c.shape)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, order = self._align_broadcast(other)
            return Jet(a.coef + b.coef, self.nvar, order)
        coef = np.broadcast_to(self.coef, np.broadcast_shapes(self.coef.shape, (1,) + np.shape(other))).copy()
        coef[0] = coef[0] + other
        return Jet(coef, self.nvar, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.nvar, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, order = self._align_broadcast(other)
            I, J, starts = _product_table(self.nvar, order)
            prod = a.coef[I] * b.coef[J]
            return Jet(np.add.reduceat(prod, starts, axis=0), self.nvar, order)
        return Jet(self.coef * self._const_broadcast(other), self.nvar, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coef / self._const_broadcast(other), self.nvar, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.nvar, self.order)
            for _ in range(int(p)):
                out = out * self
            return out
        return power(self, p)

    def reciprocal(self) -> "Jet":
        return power(self, -1.0)

    # -- function composition -----------------------------------------
    def compose(self, derivs: Callable[[np.ndarray, int], list]) -> "Jet":
        """Apply a univariate function elementwise.

        ``derivs(u0, n)`` must return ``[f(u0), f'(u0), ..., f^(n)(u0)]``.
        """
        u0 = self.value
        d = derivs(u0, self.order)
        du = Jet(self.coef.copy(), self.nvar, self.order)
        du.coef[0] = 0.0
        out = Jet.constant(d[0], self.nvar, self.order)
        term = Jet.constant(np.ones(self.shape), self.nvar, self.order)
        for m in range(1, self.order + 1):
            term = term * du
            out = out + term * (d[m] / math.factorial(m))
        return out


# -- elementary functions with float/Jet dispatch -------------------------

def _power_derivs(p: float):
    def derivs(u0, n):
        out = []
        c = 1.0
        for m in range(n + 1):
            out.append(c * np.power(u0, p - m))
            c *= p - m
        return out

    return derivs


def power(x, p):
    """``x**p`` for a float exponent; jets are expanded around their value."""
    if isinstance(x, Jet):
        if float(p).is_integer() and p >= 0:
            return x ** int(p)
        return x.compose(_power_derivs(float(p)))
    return np.power(x, p)


def sqrt(x):
    if isinstance(x, Jet):
        return x.compose(_power_derivs(0.5))
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        return x.compose(lambda u0, n: [np.exp(u0)] * (n + 1))
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        def derivs(u0, n):
            out = [np.log(u0)]
            for m in range(1, n + 1):
                out.append((-1.0) ** (m - 1) * math.factorial(m - 1) * np.power(u0, -float(m)))
            return out

        return x.compose(derivs)
    return np.log(x)


def sinh(x):
    if isinstance(x, Jet):
        return x.compose(lambda u0, n: [np.sinh(u0) if m % 2 == 0 else np.cosh(u0) for m in range(n + 1)])
    return np.sinh(x)


def cosh(x):
    if isinstance(x, Jet):
        return x.compose(lambda u0, n: [np.cosh(u0) if m % 2 == 0 else np.sinh(u0) for m in range(n + 1)])
    return np.cosh(x)


def value(x):
    """Plain value of a jet, or the argument itself."""
    return x.value if isinstance(x, Jet) else np.asarray(x, dtype=float)


# -- tensor operations ----------------------------------------------------

def stack(items: Sequence, axis: int = 0) -> Jet:
    """Stack jets (or constants) along a new value axis."""
    ref = next(x for x in items if isinstance(x, Jet))
    order = min(x.order for x in items if isinstance(x, Jet))
    nvar = ref.nvar
    coefs = []
    shape = None
    for x in items:
        if isinstance(x, Jet):
            c = x.truncate(order).coef
        else:
            c = Jet.constant(x, nvar, order).coef
        coefs.append(c)
    shape = np.broadcast_shapes(*(c.shape for c in coefs))
    coefs = [np.broadcast_to(c, shape) for c in coefs]
    ax = axis + 1 if axis >= 0 else axis
    return Jet(np.stack(coefs, axis=ax), nvar, order)


def _free_letter(*subs: str) -> str:
    used = set("".join(subs))
    for ch in _LETTERS:
        if ch not in used:
            return ch
    raise ValueError("no free einsum letter")


def einsum(subscripts: str, *operands):
    """Einstein summation over value axes of jets and plain arrays.

    Supports any number of operands; jets are multiplied pairwise from the
    left.  Subscripts refer to value axes only (``...`` is allowed).
    """
    lhs, rhs = subscripts.replace(" ", "").split("->")
    subs = lhs.split(",")
    if len(subs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    if not any(isinstance(op, Jet) for op in operands):
        return np.einsum(subscripts, *operands)
    if len(operands) == 1:
        op = operands[0]
        Q = _free_letter(subscripts)
        return Jet(np.einsum(f"{Q}{subs[0]}->{Q}{rhs}", op.coef), op.nvar, op.order)
    if len(operands) > 2:
        # contract the first two, keeping every index still needed later
        later = set("".join(subs[2:]) + rhs)
        keep = "".join(dict.fromkeys(c for c in subs[0] + subs[1] if c in later or c == "."))
        keep = keep.replace(".", "")
        ell = "..." if "..." in subs[0] or "..." in subs[1] else ""
        first = einsum(f"{subs[0]},{subs[1]}->{keep}{ell}", operands[0], operands[1])
        return einsum(",".join([keep + ell] + subs[2:]) + "->" + rhs, first, *operands[2:])
    a, b = operands
    sa, sb = subs
    Q = _free_letter(subscripts)
    if isinstance(a, Jet) and isinstance(b, Jet):
        a2, b2, order = a._align(b)
        I, J, starts = _product_table(a.nvar, order)
        prod = np.einsum(f"{Q}{sa},{Q}{sb}->{Q}{rhs}", a2.coef[I], b2.coef[J])
        return Jet(np.add.reduceat(prod, starts, axis=0), a.nvar, order)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{Q}{sa},{sb}->{Q}{rhs}", a.coef, np.asarray(b, dtype=float)), a.nvar, a.order)
    return Jet(np.einsum(f"{sa},{Q}{sb}->{Q}{rhs}", np.asarray(a, dtype=float), b.coef), b.nvar, b.order)


def matrix_inverse(m: Jet) -> Jet:
    """Inverse of a jet of square matrices (value axes 0 and 1).

    Newton iteration ``Y <- Y (2 - M Y)`` doubles the number of correct
    Taylor degrees per step, starting from the inverse of the value.
    """
    v = np.moveaxis(m.value, (0, 1), (-2, -1))
    y0 = np.moveaxis(np.linalg.inv(v), (-2, -1), (0, 1))
    y = Jet.constant(y0, m.nvar, m.order)
    n = m.shape[0]
    eye = np.eye(n).reshape((n, n) + (1,) * (len(m.shape) - 2))
    correct = 1
    while correct <= m.order:
        my = einsum("ij...,jk...->ik...", m, y)
        y = einsum("ij...,jk...->ik...", y, 2.0 * eye - my)
        correct *= 2
    return y


def sqrt_abs_det(m: Jet) -> Jet:
    """``sqrt(|det m|)`` for a jet of square matrices (value axes 0 and 1).

    Uses ``log det(M0 + D) = log det M0 + tr log(1 + M0^{-1} D)`` where the
    logarithm series terminates because ``M0^{-1} D`` has no constant term.
    """
    v = np.moveaxis(m.value, (0, 1), (-2, -1))
    det0 = np.linalg.det(v)
    inv0 = np.moveaxis(np.linalg.inv(v), (-2, -1), (0, 1))
    d = Jet(m.coef.copy(), m.nvar, m.order)
    d.coef[0] = 0.0
    x = einsum("ij...,jk...->ik...", inv0, d)
    logdet = Jet.constant(np.zeros(det0.shape), m.nvar, m.order)
    xp = x
    for p in range(1, m.order + 1):
        tr = einsum("ii...->...", xp)
        logdet = logdet + tr * ((-1.0) ** (p + 1) / p)
        xp = einsum("ij...,jk...->ik...", xp, x)
    return exp(logdet * 0.5) * np.sqrt(np.abs(det0))
