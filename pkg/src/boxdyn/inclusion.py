"""Piecewise set-valued vector fields and rigorous hull evaluation.

A field is a list of region pieces (closed polyhedral guards with
polynomial right-hand sides) plus optional overrides that pin explicit
interval values on small regions, e.g. a prescribed value on a switching
point.  Pieces carry closed guards, so closures overlap on shared facets
and hulls automatically widen across switching surfaces.

The central operation is :func:`evaluate_hull`: an interval vector
containing the convex hull of every field value attained on a box.  A
batched variant evaluates many boxes at once on numpy arrays; the box-map
construction is built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIntersection, UncoveredRegion, ValidationError
from .expressions import Polynomial
from .intervals import IntervalVector

__all__ = [
    "Guard",
    "RegionPiece",
    "Override",
    "Params",
    "PiecewiseInclusion",
    "evaluate_hull",
    "evaluate_hull_batch",
]


@dataclass(frozen=True)
class Guard:
    """Affine inequality g.x + c <= 0 (closed half-space)."""

    g: np.ndarray
    c: float
    text: str = ""

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))

    def min_over(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Minimum of g.x + c over each box in an (m, n) batch."""
        return np.where(self.g >= 0, lo * self.g, hi * self.g).sum(axis=-1) + self.c

    def max_over(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return np.where(self.g >= 0, hi * self.g, lo * self.g).sum(axis=-1) + self.c

    def holds_at(self, x) -> bool:
        return float(self.g @ np.asarray(x, dtype=float) + self.c) <= 0.0

    @property
    def axis(self) -> int | None:
        """Index of the single active axis for axis-aligned guards, else None."""
        nz = np.nonzero(self.g)[0]
        return int(nz[0]) if len(nz) == 1 else None


@dataclass(frozen=True)
class RegionPiece:
    """One single-valued branch of the field on a closed guard region.

    Each rhs coordinate is either a Polynomial or a constant interval
    given as a (lo, hi) pair.
    """

    guards: tuple[Guard, ...]
    rhs: tuple

    def possible(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Boxes that may intersect the guard region (batch mask)."""
        mask = np.ones(lo.shape[:-1], dtype=bool)
        for guard in self.guards:
            mask &= guard.min_over(lo, hi) <= 0.0
        return mask

    def certain(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Boxes entirely inside the guard region (batch mask)."""
        mask = np.ones(lo.shape[:-1], dtype=bool)
        for guard in self.guards:
            mask &= guard.max_over(lo, hi) <= 0.0
        return mask

    def contains_point(self, x) -> bool:
        return all(g.holds_at(x) for g in self.guards)

    def clip(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Tighten boxes along axis-aligned guards; general guards are skipped."""
        lo = lo.copy()
        hi = hi.copy()
        for guard in self.guards:
            axis = guard.axis
            if axis is None:
                continue
            bound = -guard.c / guard.g[axis]
            if guard.g[axis] > 0:
                hi[..., axis] = np.minimum(hi[..., axis], bound)
            else:
                lo[..., axis] = np.maximum(lo[..., axis], bound)
        # boxes that merely touch the region collapse to its boundary slice
        return np.minimum(lo, hi), np.maximum(hi, lo)


@dataclass(frozen=True)
class Override:
    """A prescribed interval value of the field on an explicit region."""

    region: IntervalVector
    value: IntervalVector

    def possible(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        ok = (lo <= self.region.hi) & (hi >= self.region.lo)
        return ok.all(axis=-1)


@dataclass(frozen=True)
class Params:
    """Parameter value, or a whole parameter interval for interval-certified runs."""

    lam: float
    lam_hi: float | None = None

    @property
    def as_interval(self):
        if self.lam_hi is None:
            return float(self.lam)
        return (float(self.lam), float(self.lam_hi))

    def __post_init__(self):
        if self.lam_hi is not None and self.lam_hi < self.lam:
            raise ValueError("lam_hi must be >= lam")


@dataclass(frozen=True)
class PiecewiseInclusion:
    """A piecewise polynomial set-valued field on a compact box domain."""

    domain: IntervalVector
    pieces: tuple[RegionPiece, ...]
    overrides: tuple[Override, ...] = ()
    lambda_range: tuple[float, float] = (-1.0, 1.0)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def check_params(self, params: Params):
        lo, hi = self.lambda_range
        iv = params.as_interval
        a, b = (iv, iv) if np.isscalar(iv) else iv
        if a < lo - 1e-12 or b > hi + 1e-12:
            raise ValidationError(f"lambda {iv} outside declared family range [{lo}, {hi}]")

    def coverage_witness(self, max_depth: int = 14) -> IntervalVector | None:
        """Search for a sub-box of the domain meeting no piece and no override.

        Returns a witness box, or None when the domain is certainly covered
        up to boundary slivers thinner than the subdivision depth resolves.
        """
        stack = [(self.domain, 0)]
        while stack:
            box, depth = stack.pop()
            lo = box.lo[np.newaxis, :]
            hi = box.hi[np.newaxis, :]
            if any(piece.certain(lo, hi)[0] for piece in self.pieces):
                continue
            possible = any(piece.possible(lo, hi)[0] for piece in self.pieces)
            possible = possible or any(ov.possible(lo, hi)[0] for ov in self.overrides)
            if not possible:
                return box
            if depth >= max_depth:
                continue
            axis = int(np.argmax(box.width))
            mid = 0.5 * (box.lo[axis] + box.hi[axis])
            lo1, hi1 = box.lo.copy(), box.hi.copy()
            lo2, hi2 = box.lo.copy(), box.hi.copy()
            hi1[axis] = mid
            lo2[axis] = mid
            stack.append((IntervalVector(lo1, hi1), depth + 1))
            stack.append((IntervalVector(lo2, hi2), depth + 1))
        return None


def evaluate_hull_batch(inclusion: PiecewiseInclusion, lo: np.ndarray, hi: np.ndarray,
                        params: Params):
    """Hull of the field over each box in an (m, n) batch.

    Boxes are assumed to already lie within (or be clipped to) the domain.
    Returns (hull_lo, hull_hi, covered) where `covered` marks boxes met by
    at least one piece or override.
    """
    lam = params.as_interval
    m = lo.shape[:-1]
    n = lo.shape[-1]
    hull_lo = np.full(m + (n,), np.inf)
    hull_hi = np.full(m + (n,), -np.inf)
    covered = np.zeros(m, dtype=bool)

    for piece in inclusion.pieces:
        mask = piece.possible(lo, hi)
        if not mask.any():
            continue
        covered |= mask
        clo, chi = piece.clip(lo, hi)
        for j, rhs in enumerate(piece.rhs):
            if isinstance(rhs, Polynomial):
                vlo, vhi = rhs.eval_interval(clo, chi, lam)
            else:
                vlo = np.full(m, float(rhs[0]))
                vhi = np.full(m, float(rhs[1]))
            hull_lo[..., j] = np.where(mask, np.minimum(hull_lo[..., j], vlo), hull_lo[..., j])
            hull_hi[..., j] = np.where(mask, np.maximum(hull_hi[..., j], vhi), hull_hi[..., j])

    for ov in inclusion.overrides:
        mask = ov.possible(lo, hi)
        if not mask.any():
            continue
        covered |= mask
        for j in range(n):
            hull_lo[..., j] = np.where(mask, np.minimum(hull_lo[..., j], ov.value.lo[j]), hull_lo[..., j])
            hull_hi[..., j] = np.where(mask, np.maximum(hull_hi[..., j], ov.value.hi[j]), hull_hi[..., j])

    return hull_lo, hull_hi, covered


def evaluate_hull(inclusion: PiecewiseInclusion, box: IntervalVector, params: Params) -> IntervalVector:
    """Interval vector containing hull(F(x, lam)) for all x in box & domain.

    Raises EmptyIntersection when the box misses the domain, and
    UncoveredRegion when no piece or override meets it.
    """
    inclusion.check_params(params)
    clipped = box.intersect(inclusion.domain)
    if clipped.is_empty:
        raise EmptyIntersection(f"box {box} does not intersect domain {inclusion.domain}")
    lo = clipped.lo[np.newaxis, :]
    hi = clipped.hi[np.newaxis, :]
    hull_lo, hull_hi, covered = evaluate_hull_batch(inclusion, lo, hi, params)
    if not covered[0]:
        raise UncoveredRegion(f"no piece of the field covers {clipped}")
    return IntervalVector(hull_lo[0], hull_hi[0])
