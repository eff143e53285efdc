"""The three-dimensional Heisenberg group in global coordinates.

The group is R^3 with product

    (x, y, z) . (a, b, c) = (a + x, b + y, c + z + y a - x b),

and for a structure constant k > 0 the left-invariant frame

    w1 = d/dz,   w2 = d/dx + k y d/dz,   w3 = d/dy - k x d/dz

satisfies [w2, w3] = -2k w1.  Its dual coframe is

    w^1 = dz + k x dy - k y dx,   w^2 = dx,   w^3 = dy.

With the product above the frame is left-invariant for k = 1.  For general
k the same frame is left-invariant for the rescaled product
(a + x, b + y, c + z + k (y a - x b)), which ``group_multiply`` accepts via
its ``k`` keyword; both products give isomorphic groups.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupPoint",
    "ChartPoint",
    "CenterLabeling",
    "StructureData",
    "group_multiply",
    "group_inverse",
    "left_invariant_frame",
    "left_invariant_coframe",
    "coframe_jets",
    "structure_constants",
    "check_k",
]


@dataclass(frozen=True)
class GroupPoint:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class ChartPoint:
    """A point (t, x, y, z) of I x H."""

    t: float
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z], dtype=float)

    @property
    def group_point(self) -> GroupPoint:
        return GroupPoint(self.x, self.y, self.z)


class CenterLabeling(enum.Enum):
    """Causal type of the center, fixing how coframe slots map to (w^1, w^2, w^3).

    ``permutation[i]`` is the index of the concrete coframe element that fills
    abstract slot i.
    """

    TimelikeOrRiemannian = (0, 1, 2)
    Spacelike = (1, 2, 0)
    Lightlike = (0, 1, 2)

    def __new__(cls, *perm):
        obj = object.__new__(cls)
        # enum values must be unique; the name disambiguates the two equal tuples
        obj._value_ = (len(cls.__members__),) + tuple(perm)
        return obj

    @property
    def permutation(self) -> tuple[int, int, int]:
        return tuple(self.value[1:])

    @property
    def slot_names(self) -> tuple[str, str, str]:
        return ("u", "v", "3") if self is CenterLabeling.Lightlike else ("1", "2", "3")


@dataclass(frozen=True)
class StructureData:
    """Structure constants c^i_{jk} with [e_j, e_k] = c^i_{jk} e_i."""

    k: float
    c: np.ndarray

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("ijk,j,k->i", self.c, np.asarray(u, float), np.asarray(v, float))


def check_k(k: float) -> float:
    k = float(k)
    if not np.isfinite(k) or k <= 0.0:
        raise ValueError(f"structure constant k must be positive, got {k}")
    return k


def _xyz(p):
    if isinstance(p, GroupPoint):
        return p.as_array()
    return np.asarray(p, dtype=float)


def group_multiply(p, q, k: float = 1.0) -> GroupPoint:
    """Heisenberg product ``p . q``; ``k`` scales the cocycle term."""
    x, y, z = _xyz(p)
    a, b, c = _xyz(q)
    return GroupPoint(a + x, b + y, c + z + k * (y * a - x * b))


def group_inverse(p) -> GroupPoint:
    x, y, z = _xyz(p)
    return GroupPoint(-x, -y, -z)


def left_invariant_frame(k: float, p) -> np.ndarray:
    """Rows are (w1, w2, w3) in (d/dx, d/dy, d/dz) components at ``p``."""
    k = check_k(k)
    x, y, _ = _xyz(p)
    return np.array([[0.0, 0.0, 1.0], [1.0, 0.0, k * y], [0.0, 1.0, -k * x]])


def left_invariant_coframe(k: float, p) -> np.ndarray:
    """Rows are (w^1, w^2, w^3) in (dx, dy, dz) components at ``p``."""
    k = check_k(k)
    x, y, _ = _xyz(p)
    return np.array([[-k * y, k * x, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def coframe_jets(k: float, x, y, labeling: CenterLabeling = CenterLabeling.TimelikeOrRiemannian):
    """Coframe slots as rows of a 3x4 array over (dt, dx, dy, dz).

    ``x`` and ``y`` may be floats, arrays, or jets; the result is a list of
    three rows, each a list of four entries.
    """
    zero = 0.0 * x
    one = zero + 1.0
    w = [
        [zero, -k * y, k * x, one],
        [zero, one, zero, zero],
        [zero, zero, one, zero],
    ]
    return [w[i] for i in labeling.permutation]


def structure_constants(labeling: CenterLabeling, k: float) -> StructureData:
    """Structure constants of the labeled frame (e_1, e_2, e_3) (or (e_u, e_v, e_3))."""
    k = check_k(k)
    c = np.zeros((3, 3, 3))
    # concrete bracket [w2, w3] = -2k w1, transported through the labeling
    perm = labeling.permutation
    slot_of = {concrete: slot for slot, concrete in enumerate(perm)}
    i, j, l = slot_of[0], slot_of[1], slot_of[2]
    c[i, j, l] = -2.0 * k
    c[i, l, j] = 2.0 * k
    return StructureData(k=k, c=c)

