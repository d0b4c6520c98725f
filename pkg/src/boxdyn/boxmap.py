"""Outer approximation of the time-tau solution map on a cubical grid.

Every grid cell is flown forward for time tau with a validated interval
scheme: the step is split into Euler substeps, each guarded by a Picard
a-priori enclosure, and the propagated box is clipped to the domain with
an exit flag recording any overflow.  The resulting cell-to-cell edges
form a directed graph whose paths cover every true solution that stays in
the domain, including the empty-image case where all solutions leave.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import NoEnclosure, UncoveredRegion
from .inclusion import Params, PiecewiseInclusion, evaluate_hull, evaluate_hull_batch
from .intervals import IntervalVector

__all__ = [
    "Grid",
    "BoxMapGraph",
    "a_priori_enclosure",
    "image_boxes",
    "build_graph",
    "transpose",
    "default_tau",
]

INFLATE_FACTOR = 1.1
INFLATE_ABS = 1e-12
MAX_PICARD_ITERS = 50


@dataclass(frozen=True)
class Grid:
    """Uniform cubical grid tiling a compact box domain."""

    domain: IntervalVector
    subdivisions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "subdivisions", tuple(int(s) for s in self.subdivisions))
        if len(self.subdivisions) != self.domain.dim:
            raise ValueError("one subdivision count per axis required")
        if any(s < 1 for s in self.subdivisions):
            raise ValueError("subdivisions must be positive")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def ncells(self) -> int:
        return int(np.prod(self.subdivisions))

    @property
    def widths(self) -> np.ndarray:
        return self.domain.width / np.asarray(self.subdivisions, dtype=float)

    def coords_of(self, ids) -> np.ndarray:
        """Integer coordinates, shape (m, dim)."""
        return np.stack(np.unravel_index(np.asarray(ids, dtype=np.int64), self.subdivisions), axis=-1)

    def ids_of(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        return np.ravel_multi_index(tuple(coords[..., k] for k in range(self.dim)), self.subdivisions)

    def cell_bounds(self, ids) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper corners of cells, each shape (m, dim)."""
        coords = self.coords_of(ids)
        w = self.widths
        lo = self.domain.lo + coords * w
        hi = self.domain.lo + (coords + 1) * w
        return lo, hi

    def cell_box(self, cell_id: int) -> IntervalVector:
        lo, hi = self.cell_bounds(np.asarray([cell_id]))
        return IntervalVector(lo[0], hi[0])

    def cell_containing(self, x) -> int:
        """Id of a cell containing the point (ties broken toward lower cells)."""
        x = np.asarray(x, dtype=float)
        idx = np.floor((x - self.domain.lo) / self.widths).astype(np.int64)
        idx = np.clip(idx, 0, np.asarray(self.subdivisions) - 1)
        return int(self.ids_of(idx))

    def index_ranges(self, lo: np.ndarray, hi: np.ndarray,
                     closed: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis index ranges of cells meeting each box in a batch.

        With `closed` a box touching a grid hyperplane meets the closed
        cells on both sides.  Without it, a face exactly on a hyperplane
        is assigned to one side only; every point of the box is still in
        some selected cell, so image emission stays outer-sound while
        exactly aligned boxes stop picking up touching neighbors.
        Ranges are clipped to the grid.
        """
        a = (lo - self.domain.lo) / self.widths
        b = (hi - self.domain.lo) / self.widths
        if closed:
            first = np.ceil(a - 1.0).astype(np.int64)
            last = np.floor(b).astype(np.int64)
        else:
            first = np.floor(a).astype(np.int64)
            last = np.ceil(b).astype(np.int64) - 1
        top = np.asarray(self.subdivisions, dtype=np.int64) - 1
        first = np.clip(first, 0, top)
        last = np.clip(last, 0, top)
        if not closed:
            # a degenerate box sitting on a hyperplane still owns one cell
            last = np.maximum(last, first)
        return first, last


@dataclass(frozen=True)
class BoxMapGraph:
    """Directed graph over grid cells outer-approximating the tau-step map.

    Adjacency is stored CSR-style (`indptr`, `indices`) with target lists
    sorted per cell.  `exit_flags[c]` marks cells whose image enclosure
    left the domain within the step; after `transpose` the same array is
    entry-flag metadata.
    """

    grid: Grid
    tau: float
    params: Params
    indptr: np.ndarray
    indices: np.ndarray
    exit_flags: np.ndarray
    transposed: bool = field(default=False)

    @property
    def ncells(self) -> int:
        return self.grid.ncells

    @property
    def num_edges(self) -> int:
        return int(self.indices.shape[0])

    def out(self, cell_id: int) -> np.ndarray:
        return self.indices[self.indptr[cell_id]:self.indptr[cell_id + 1]]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def to_csr(self) -> sparse.csr_matrix:
        data = np.ones(self.num_edges, dtype=bool)
        n = self.ncells
        return sparse.csr_matrix((data, self.indices.copy(), self.indptr.copy()), shape=(n, n))

    def equal(self, other: BoxMapGraph) -> bool:
        return (self.grid == other.grid
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.exit_flags, other.exit_flags))

    # ---- serialization -------------------------------------------------

    def write_edge_list(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# cells {self.ncells}\n")
            fh.write(f"# tau {self.tau!r}\n")
            exits = np.nonzero(self.exit_flags)[0]
            fh.write("# exit " + " ".join(str(i) for i in exits) + "\n")
            for src in range(self.ncells):
                for dst in self.out(src):
                    fh.write(f"{src} {dst}\n")

    def write_binary(self, path):
        """Adjacency dump: see README for the documented layout."""
        with open(path, "wb") as fh:
            fh.write(b"BOXDYN01")
            fh.write(struct.pack("<Q", self.grid.dim))
            for s in self.grid.subdivisions:
                fh.write(struct.pack("<Q", s))
            for v in self.grid.domain.lo:
                fh.write(struct.pack("<d", v))
            for v in self.grid.domain.hi:
                fh.write(struct.pack("<d", v))
            fh.write(struct.pack("<d", self.tau))
            fh.write(struct.pack("<d", self.params.lam))
            exits = np.nonzero(self.exit_flags)[0].astype("<u8")
            fh.write(struct.pack("<Q", exits.shape[0]))
            fh.write(exits.tobytes())
            fh.write(struct.pack("<Q", self.ncells))
            for src in range(self.ncells):
                out = self.out(src).astype("<u8")
                fh.write(struct.pack("<Q", out.shape[0]))
                fh.write(out.tobytes())

    @classmethod
    def read_binary(cls, path) -> BoxMapGraph:
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != b"BOXDYN01":
                raise ValueError("not a boxdyn adjacency dump")
            (dim,) = struct.unpack("<Q", fh.read(8))
            subs = struct.unpack(f"<{dim}Q", fh.read(8 * dim))
            lo = struct.unpack(f"<{dim}d", fh.read(8 * dim))
            hi = struct.unpack(f"<{dim}d", fh.read(8 * dim))
            (tau,) = struct.unpack("<d", fh.read(8))
            (lam,) = struct.unpack("<d", fh.read(8))
            (n_exit,) = struct.unpack("<Q", fh.read(8))
            exits = np.frombuffer(fh.read(8 * n_exit), dtype="<u8")
            (ncells,) = struct.unpack("<Q", fh.read(8))
            indptr = np.zeros(ncells + 1, dtype=np.int64)
            chunks = []
            for src in range(ncells):
                (cnt,) = struct.unpack("<Q", fh.read(8))
                chunks.append(np.frombuffer(fh.read(8 * cnt), dtype="<u8").astype(np.int64))
                indptr[src + 1] = indptr[src] + cnt
            grid = Grid(IntervalVector(np.array(lo), np.array(hi)), subs)
            exit_flags = np.zeros(ncells, dtype=bool)
            exit_flags[exits.astype(np.int64)] = True
            indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
            return cls(grid, tau, Params(lam), indptr, indices, exit_flags)


def default_tau(grid: Grid, inclusion: PiecewiseInclusion, params: Params) -> float:
    """Heuristic step: half the smallest cell width over the peak speed."""
    hull = evaluate_hull(inclusion, inclusion.domain, params)
    speed = float(np.max(np.maximum(np.abs(hull.lo), np.abs(hull.hi))))
    if speed == 0.0:
        return 1.0
    return float(np.min(grid.widths)) / (2.0 * speed)


def _picard_batch(inclusion, lo, hi, h, params, alive, guess=None):
    """A-priori enclosures for boxes over one substep [0, h] (batched).

    Returns (b_lo, b_hi, g_lo, g_hi) with box + [0,h]*g inside B for every
    alive box, where g = hull(F(B & domain)).  `guess` optionally seeds B
    with a previous substep's field bounds so one evaluation usually
    certifies.  Raises NoEnclosure listing offending rows.
    """
    dom_lo = inclusion.domain.lo
    dom_hi = inclusion.domain.hi
    if guess is None:
        b_lo = lo.copy()
        b_hi = hi.copy()
    else:
        cand_lo = lo + h * np.minimum(guess[0], 0.0)
        cand_hi = hi + h * np.maximum(guess[1], 0.0)
        center = 0.5 * (cand_lo + cand_hi)
        radius = 0.5 * (cand_hi - cand_lo) * INFLATE_FACTOR + INFLATE_ABS
        b_lo = center - radius
        b_hi = center + radius
    g_lo = np.zeros_like(lo)
    g_hi = np.zeros_like(hi)
    pending = alive.copy()
    for _ in range(MAX_PICARD_ITERS):
        c_lo = np.clip(b_lo, dom_lo, dom_hi)
        c_hi = np.clip(b_hi, dom_lo, dom_hi)
        h_lo, h_hi, covered = evaluate_hull_batch(inclusion, c_lo, c_hi, params)
        if not covered[pending].all():
            bad = np.nonzero(pending & ~covered)[0]
            raise UncoveredRegion(f"field undefined on enclosure of rows {bad[:8].tolist()}")
        cand_lo = lo + h * np.minimum(h_lo, 0.0)
        cand_hi = hi + h * np.maximum(h_hi, 0.0)
        ok = (b_lo <= cand_lo).all(axis=-1) & (cand_hi <= b_hi).all(axis=-1)
        settled = (pending & ok)[..., np.newaxis]
        g_lo = np.where(settled, h_lo, g_lo)
        g_hi = np.where(settled, h_hi, g_hi)
        pending = pending & ~ok
        if not pending.any():
            return b_lo, b_hi, g_lo, g_hi
        center = 0.5 * (cand_lo + cand_hi)
        radius = 0.5 * (cand_hi - cand_lo) * INFLATE_FACTOR + INFLATE_ABS
        grow = pending[..., np.newaxis]
        b_lo = np.where(grow, center - radius, b_lo)
        b_hi = np.where(grow, center + radius, b_hi)
    bad = np.nonzero(pending)[0]
    raise NoEnclosure(f"a-priori enclosure did not converge for rows {bad[:8].tolist()}; reduce tau")


def flow_boxes_batch(inclusion, lo, hi, tau, params, substeps=1):
    """Propagate boxes for time tau with `substeps` validated Euler substeps.

    Boxes are clipped to the domain after every substep (truncated-solution
    semantics); `exited` marks rows whose enclosure overflowed the domain
    at any substep, and `alive` marks rows whose clipped box is non-empty.
    Returns (lo, hi, exited, alive).
    """
    dom_lo = inclusion.domain.lo
    dom_hi = inclusion.domain.hi
    x_lo = lo.copy()
    x_hi = hi.copy()
    m = lo.shape[0]
    exited = np.zeros(m, dtype=bool)
    alive = np.ones(m, dtype=bool)
    h = float(tau) / int(substeps)
    guess = None
    for _ in range(int(substeps)):
        if not alive.any():
            break
        _, _, h_lo, h_hi = _picard_batch(inclusion, x_lo, x_hi, h, params, alive, guess)
        guess = (h_lo, h_hi)
        step = alive[..., np.newaxis]
        x_lo = np.where(step, x_lo + h * h_lo, x_lo)
        x_hi = np.where(step, x_hi + h * h_hi, x_hi)
        over = ((x_lo < dom_lo) | (x_hi > dom_hi)).any(axis=-1)
        exited |= over & alive
        dead = ((x_lo > dom_hi) | (x_hi < dom_lo)).any(axis=-1)
        alive &= ~dead
        x_lo = np.clip(x_lo, dom_lo, dom_hi)
        x_hi = np.clip(x_hi, dom_lo, dom_hi)
    return x_lo, x_hi, exited, alive


def a_priori_enclosure(cell: IntervalVector, tau: float, inclusion: PiecewiseInclusion,
                       params: Params) -> IntervalVector:
    """Enclosure B of all solutions from the cell over [0, tau].

    Satisfies cell + [0,tau]*hull(F(B & domain)) inside B; solutions are
    only tracked while they remain in the domain.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    lo = cell.lo[np.newaxis, :]
    hi = cell.hi[np.newaxis, :]
    alive = np.ones(1, dtype=bool)
    b_lo, b_hi, _, _ = _picard_batch(inclusion, lo, hi, float(tau), params, alive)
    return IntervalVector(b_lo[0], b_hi[0])


def _emit_targets(grid, lo, hi, alive):
    """Flat (row, target id) pairs for all covered cells, sorted per row.

    Vectorized mixed-radix enumeration of the index ranges; ids come out
    in ascending order within each row.
    """
    first, last = grid.index_ranges(lo, hi, closed=False)
    dim = grid.dim
    sizes = (last - first + 1).astype(np.int64)
    sizes[~alive] = 0
    np.maximum(sizes, 0, out=sizes)
    counts = sizes.prod(axis=1)
    counts[~alive] = 0
    starts = np.zeros(counts.shape[0], dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    total = int(counts.sum())
    rows = np.repeat(np.arange(counts.shape[0], dtype=np.int64), counts)
    k = np.arange(total, dtype=np.int64) - starts[rows]
    strides = np.ones_like(sizes)
    for a in range(dim - 2, -1, -1):
        strides[:, a] = strides[:, a + 1] * np.maximum(sizes[:, a + 1], 1)
    coords = tuple(first[rows, a] + (k // strides[rows, a]) % np.maximum(sizes[rows, a], 1)
                   for a in range(dim))
    ids = np.ravel_multi_index(coords, grid.subdivisions).astype(np.int64)
    return rows, ids


def _split_boxes(lo, hi, split: int, dim: int):
    """Tile each box into split^dim congruent subboxes (rows grouped by box)."""
    if split <= 1:
        return lo, hi, 1
    frac = np.arange(split, dtype=float) / split
    grids = np.meshgrid(*([frac] * dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)  # (split^dim, dim)
    width = (hi - lo) / split
    sub_lo = lo[:, np.newaxis, :] + offs[np.newaxis, :, :] * (hi - lo)[:, np.newaxis, :]
    sub_hi = sub_lo + width[:, np.newaxis, :]
    per = offs.shape[0]
    return sub_lo.reshape(-1, dim), sub_hi.reshape(-1, dim), per


def _image_of_boxes(grid, inclusion, params, tau, lo, hi, substeps, split):
    """CSR-style (indptr, indices) of per-box target cells, plus exit flags."""
    n = lo.shape[0]
    s_lo, s_hi, per = _split_boxes(lo, hi, split, grid.dim)
    f_lo, f_hi, exited, alive = flow_boxes_batch(inclusion, s_lo, s_hi, tau, params, substeps)
    rows, ids = _emit_targets(grid, f_lo, f_hi, alive)
    if per > 1:
        rows //= per
        exited = exited.reshape(n, per).any(axis=1)
    # dedupe (row, id) pairs; unique keeps the per-row ascending order
    keys = np.unique(rows * np.int64(grid.ncells) + ids)
    rows = keys // grid.ncells
    ids = keys % grid.ncells
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, ids, exited


def image_boxes(cell_id: int, grid: Grid, inclusion: PiecewiseInclusion, params: Params,
                tau: float, substeps: int = 1, split: int = 1):
    """Forward image of one cell: (sorted target cell ids, exited flag)."""
    lo, hi = grid.cell_bounds(np.asarray([cell_id]))
    indptr, ids, exited = _image_of_boxes(grid, inclusion, params, tau, lo, hi,
                                          substeps, split)
    return ids, bool(exited[0])


def build_graph(grid: Grid, inclusion: PiecewiseInclusion, params: Params, tau: float,
                substeps: int = 1, split: int = 1) -> BoxMapGraph:
    """Box-map graph for every grid cell.

    All cells are propagated in one vectorized batch; output is
    deterministic for a given configuration.  `split` tiles every cell
    into split^dim subboxes before flowing, trading time for a tighter
    image (the initial box width drives the interval growth).
    """
    inclusion.check_params(params)
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not grid.domain.contains_box(inclusion.domain) and not inclusion.domain.contains_box(grid.domain):
        raise ValueError("grid does not cover the inclusion domain")
    ids = np.arange(grid.ncells, dtype=np.int64)
    lo, hi = grid.cell_bounds(ids)
    try:
        indptr, indices, exited = _image_of_boxes(grid, inclusion, params, tau, lo, hi,
                                                  substeps, split)
    except (NoEnclosure, UncoveredRegion) as exc:
        raise type(exc)(f"graph build failed: {exc}") from exc
    return BoxMapGraph(grid, float(tau), params, indptr, indices, exited)


def transpose(graph: BoxMapGraph) -> BoxMapGraph:
    """Edge-reversed graph; exit flags are kept as entry-flag metadata."""
    csr = graph.to_csr().T.tocsr()
    csr.sort_indices()
    return BoxMapGraph(graph.grid, graph.tau, graph.params,
                       csr.indptr.astype(np.int64), csr.indices.astype(np.int64),
                       graph.exit_flags.copy(), transposed=not graph.transposed)
