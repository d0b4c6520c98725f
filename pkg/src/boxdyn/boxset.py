"""Cell-id sets over a fixed grid, with exact set algebra and morphology."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxmap import Grid
from .intervals import IntervalVector

__all__ = ["BoxSet"]


def _neighbor_offsets(dim: int) -> np.ndarray:
    """All 3^dim - 1 Chebyshev-adjacent offsets."""
    grids = np.meshgrid(*([np.array([-1, 0, 1])] * dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)
    return offs[np.any(offs != 0, axis=-1)]


@dataclass(frozen=True)
class BoxSet:
    """A sorted, duplicate-free set of cell ids on a grid."""

    grid: Grid
    ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        ids = np.unique(np.asarray(self.ids, dtype=np.int64))
        if ids.size and (ids[0] < 0 or ids[-1] >= self.grid.ncells):
            raise ValueError("cell id out of range for grid")
        object.__setattr__(self, "ids", ids)

    # ---- constructors --------------------------------------------------

    @classmethod
    def empty(cls, grid: Grid) -> BoxSet:
        return cls(grid, np.zeros(0, dtype=np.int64))

    @classmethod
    def full(cls, grid: Grid) -> BoxSet:
        return cls(grid, np.arange(grid.ncells, dtype=np.int64))

    @classmethod
    def from_mask(cls, grid: Grid, mask: np.ndarray) -> BoxSet:
        return cls(grid, np.nonzero(mask)[0].astype(np.int64))

    @classmethod
    def covering(cls, grid: Grid, box: IntervalVector) -> BoxSet:
        """All cells intersecting the given box."""
        if box.is_empty:
            return cls.empty(grid)
        first, last = grid.index_ranges(box.lo[np.newaxis, :], box.hi[np.newaxis, :])
        axes = [np.arange(first[0, k], last[0, k] + 1, dtype=np.int64) for k in range(grid.dim)]
        if any(a.size == 0 for a in axes):
            return cls.empty(grid)
        mesh = np.meshgrid(*axes, indexing="ij")
        ids = np.ravel_multi_index(tuple(g.ravel() for g in mesh), grid.subdivisions)
        return cls(grid, ids.astype(np.int64))

    @classmethod
    def covering_boxes(cls, grid: Grid, include, exclude=()) -> BoxSet:
        """Union of cells meeting `include` boxes, minus cells inside `exclude` boxes."""
        out = cls.empty(grid)
        for box in include:
            out = out.union(cls.covering(grid, box))
        for box in exclude:
            out = out.difference(cls.covering(grid, box))
        return out

    # ---- basic protocol ------------------------------------------------

    def __len__(self):
        return int(self.ids.size)

    def __bool__(self):
        return self.ids.size > 0

    def __iter__(self):
        return iter(self.ids.tolist())

    def __eq__(self, other):
        return isinstance(other, BoxSet) and self.grid == other.grid and np.array_equal(self.ids, other.ids)

    def __hash__(self):
        return hash((self.grid.subdivisions, self.ids.tobytes()))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.grid.ncells, dtype=bool)
        m[self.ids] = True
        return m

    # ---- set algebra ---------------------------------------------------

    def union(self, other: BoxSet) -> BoxSet:
        return BoxSet(self.grid, np.union1d(self.ids, other.ids))

    def intersection(self, other: BoxSet) -> BoxSet:
        return BoxSet(self.grid, np.intersect1d(self.ids, other.ids, assume_unique=True))

    def difference(self, other: BoxSet) -> BoxSet:
        return BoxSet(self.grid, np.setdiff1d(self.ids, other.ids, assume_unique=True))

    def issubset(self, other: BoxSet) -> bool:
        return np.intersect1d(self.ids, other.ids, assume_unique=True).size == self.ids.size

    def complement(self) -> BoxSet:
        return BoxSet.full(self.grid).difference(self)

    # ---- morphology ----------------------------------------------------

    def _lattice_neighbors(self):
        """Neighbor coordinates of every cell, plus an in-grid validity mask."""
        coords = self.grid.coords_of(self.ids)
        offs = _neighbor_offsets(self.grid.dim)
        nbr = coords[:, np.newaxis, :] + offs[np.newaxis, :, :]
        top = np.asarray(self.grid.subdivisions, dtype=np.int64)
        valid = ((nbr >= 0) & (nbr < top)).all(axis=-1)
        return nbr, valid

    def dilate(self, within: BoxSet | None = None) -> BoxSet:
        """One-cell (Chebyshev) dilation, clipped to `within` when given."""
        if not self:
            return self
        nbr, valid = self._lattice_neighbors()
        ids = self.grid.ids_of(np.clip(nbr, 0, np.asarray(self.grid.subdivisions) - 1))
        out = BoxSet(self.grid, np.concatenate([self.ids, ids[valid]]))
        return out.intersection(within) if within is not None else out

    def erode(self, within: BoxSet | None = None) -> BoxSet:
        """One-cell erosion, relative to `within` when given.

        A cell survives when every neighbor that is inside `within` (or
        inside the grid, when `within` is None) also belongs to the set.
        Without a carrier, cells on the grid boundary never survive.
        """
        if not self:
            return self
        nbr, valid = self._lattice_neighbors()
        ids = self.grid.ids_of(np.clip(nbr, 0, np.asarray(self.grid.subdivisions) - 1))
        member = np.zeros(self.grid.ncells, dtype=bool)
        member[self.ids] = True
        in_self = member[ids]
        if within is None:
            keep = (valid & in_self).all(axis=1) & valid.all(axis=1)
        else:
            carrier = within.mask()
            relevant = valid & carrier[ids]
            keep = (~relevant | in_self).all(axis=1)
        return BoxSet(self.grid, self.ids[keep])

    def boundary_moat_inside(self, region: BoxSet) -> bool:
        """True when every lattice neighbor of the set exists and lies in `region`."""
        if not self:
            return True
        nbr, valid = self._lattice_neighbors()
        if not valid.all():
            return False
        ids = self.grid.ids_of(nbr)
        return bool(region.mask()[ids].all())

    # ---- geometry / export ---------------------------------------------

    def cell_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.grid.cell_bounds(self.ids)

    def centers(self) -> np.ndarray:
        lo, hi = self.cell_bounds()
        return 0.5 * (lo + hi)

    def bounding_box(self) -> IntervalVector:
        if not self:
            return IntervalVector.empty(self.grid.dim)
        lo, hi = self.cell_bounds()
        return IntervalVector(lo.min(axis=0), hi.max(axis=0))

    def write_cells(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# grid " + " ".join(str(s) for s in self.grid.subdivisions) + "\n")
            for i in self.ids:
                fh.write(f"{i}\n")

    def write_table(self, path):
        """Columnar text table: cell id, per-axis lo, per-axis hi."""
        lo, hi = self.cell_bounds()
        with open(path, "w", encoding="utf-8") as fh:
            cols = ["cell"] + [f"lo{k}" for k in range(self.grid.dim)] + [f"hi{k}" for k in range(self.grid.dim)]
            fh.write("\t".join(cols) + "\n")
            for i, row_lo, row_hi in zip(self.ids, lo, hi):
                vals = [str(i)] + [repr(float(v)) for v in row_lo] + [repr(float(v)) for v in row_hi]
                fh.write("\t".join(vals) + "\n")

    @classmethod
    def read_cells(cls, path, grid: Grid) -> BoxSet:
        ids = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                ids.append(int(line))
        return cls(grid, np.asarray(ids, dtype=np.int64))
