"""Axis-aligned interval boxes and array-based interval arithmetic.

The scalar building block is :class:`IntervalVector`, an axis-aligned box
in R^n.  The module also exposes interval arithmetic on parallel numpy
arrays of lower/upper bounds, which is what the batched evaluation paths
use to process many boxes at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntervalVector", "iadd", "isub", "imul", "ineg", "ipow"]


@dataclass(frozen=True)
class IntervalVector:
    """A box prod_i [lo[i], hi[i]] in R^n, or the distinguished empty box.

    Invariant: lo[i] <= hi[i] componentwise whenever the box is non-empty;
    emptiness is carried by an explicit marker, never by inverted bounds.
    """

    lo: np.ndarray
    hi: np.ndarray
    is_empty: bool = field(default=False)

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-D arrays of equal length")
        if not self.is_empty and np.any(lo > hi):
            raise ValueError("inverted bounds; use IntervalVector.empty() for the empty box")

    def __eq__(self, other):
        if not isinstance(other, IntervalVector):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty == other.is_empty and self.dim == other.dim
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((self.is_empty, self.lo.tobytes(), self.hi.tobytes()))

    @classmethod
    def empty(cls, dim: int) -> IntervalVector:
        z = np.zeros(dim)
        return cls(z, z, is_empty=True)

    @classmethod
    def point(cls, x) -> IntervalVector:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x, x.copy())

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def intersect(self, other: IntervalVector) -> IntervalVector:
        if self.is_empty or other.is_empty:
            return IntervalVector.empty(self.dim)
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return IntervalVector.empty(self.dim)
        return IntervalVector(lo, hi)

    def intersects(self, other: IntervalVector) -> bool:
        return not self.intersect(other).is_empty

    def contains_box(self, other: IntervalVector, tol: float = 0.0) -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        return bool(np.all(self.lo - tol <= other.lo) and np.all(other.hi <= self.hi + tol))

    def contains_point(self, x, tol: float = 0.0) -> bool:
        if self.is_empty:
            return False
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo - tol <= x) and np.all(x <= self.hi + tol))

    def hull(self, other: IntervalVector) -> IntervalVector:
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return IntervalVector(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def inflate(self, factor: float = 1.0, absolute: float = 0.0) -> IntervalVector:
        """Scale radii about the center by `factor` and add `absolute`."""
        if self.is_empty:
            return self
        c = self.center
        r = 0.5 * self.width * factor + absolute
        return IntervalVector(c - r, c + r)

    def translate(self, v) -> IntervalVector:
        v = np.asarray(v, dtype=float)
        return IntervalVector(self.lo + v, self.hi + v)

    def __repr__(self):
        if self.is_empty:
            return f"IntervalVector.empty({self.dim})"
        parts = ", ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lo, self.hi))
        return f"IntervalVector({parts})"


# ---------------------------------------------------------------------------
# Interval arithmetic on parallel bound arrays.
#
# Each operand is a pair (lo, hi) of equally shaped float arrays; results
# are computed elementwise and are sound outer enclosures of the pointwise
# operation (up to floating-point rounding, which is not directed here).
# ---------------------------------------------------------------------------

def iadd(a, b):
    return a[0] + b[0], a[1] + b[1]


def isub(a, b):
    return a[0] - b[1], a[1] - b[0]


def ineg(a):
    return -a[1], -a[0]


def imul(a, b):
    p1 = a[0] * b[0]
    p2 = a[0] * b[1]
    p3 = a[1] * b[0]
    p4 = a[1] * b[1]
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return lo, hi


def ipow(a, n: int):
    """Interval power with a non-negative integer exponent."""
    if n < 0:
        raise ValueError("negative exponents are not supported")
    lo, hi = a
    if n == 0:
        return np.ones_like(lo), np.ones_like(hi)
    if n % 2 == 1:
        return lo ** n, hi ** n
    mag = np.maximum(np.abs(lo), np.abs(hi)) ** n
    small = np.minimum(np.abs(lo), np.abs(hi)) ** n
    straddles = (lo <= 0) & (hi >= 0)
    out_lo = np.where(straddles, 0.0, small)
    return out_lo, mag
