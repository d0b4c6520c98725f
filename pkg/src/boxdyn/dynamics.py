"""Combinatorial invariant sets, limit sets and attractor-repeller pairs.

All constructions run on the box-map graph: the invariant part of a cell
region is the set of cells on bi-infinite edge paths, limit sets are
invariant parts of reach sets, and an attractor certificate is a step
count at which the image of a neighborhood's closure has contracted into
its interior (closure and interior taken one cell at a time on the grid).
Everything is an outer approximation: computed sets cover the true ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .boxmap import BoxMapGraph, transpose as transpose_graph
from .boxset import BoxSet
from .errors import DecompositionInconsistent, EmptyInput, NoAttractor, PreconditionViolated

__all__ = [
    "RestrictedGraph",
    "IsolationCertificate",
    "ARDecomposition",
    "restrict",
    "invariant_part",
    "omega_limit",
    "alpha_limit",
    "is_isolating",
    "attractor_from",
    "dual_repeller",
    "decompose",
    "box_hausdorff",
    "forward_reach",
    "backward_reach",
]

CONNECTION_SLACK_CELLS = 2


@dataclass(frozen=True)
class RestrictedGraph:
    """A box-map graph with edges filtered to a carrier cell set."""

    base: BoxMapGraph
    carrier: BoxSet

    @property
    def grid(self):
        return self.base.grid

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        m = self.carrier.mask()
        csr = self.base.to_csr()
        keep = sparse.diags(m.astype(np.int8))
        return (keep @ csr @ keep).tocsr().astype(bool)

    def transpose(self) -> RestrictedGraph:
        return RestrictedGraph(transpose_graph(self.base), self.carrier)


@dataclass(frozen=True)
class IsolationCertificate:
    """Result of the one-cell-moat isolation check on a neighborhood N."""

    region: BoxSet
    invariant: BoxSet
    moat_verified: bool
    lam: float


@dataclass(frozen=True)
class ARDecomposition:
    """Attractor, dual repeller and connecting region over an invariant carrier."""

    carrier: BoxSet
    attractor: BoxSet
    repeller: BoxSet
    connecting: BoxSet
    neighborhood: BoxSet
    forward_tail: BoxSet
    k_star: int


def _graph_parts(graph) -> tuple[sparse.csr_matrix, np.ndarray]:
    """CSR adjacency plus the carrier mask of a plain or restricted graph."""
    if isinstance(graph, RestrictedGraph):
        return graph.csr, graph.carrier.mask()
    return graph.to_csr(), np.ones(graph.ncells, dtype=bool)


def _successors(csr: sparse.csr_matrix, mask: np.ndarray) -> np.ndarray:
    """Indicator of one-step successors of the masked cells."""
    v = csr.T @ mask.astype(np.int64)
    return np.asarray(v).reshape(-1) > 0


def _reach(csr: sparse.csr_matrix, within: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Cells reachable from the seeds by edge paths staying inside `within`."""
    reach = seeds & within
    frontier = reach.copy()
    while frontier.any():
        nxt = _successors(csr, frontier) & within & ~reach
        reach |= nxt
        frontier = nxt
    return reach


def _recurrent(csr: sparse.csr_matrix, within: np.ndarray) -> np.ndarray:
    """Cells on cycles (self-loops included) inside `within`."""
    idx = np.nonzero(within)[0]
    if idx.size == 0:
        return np.zeros(within.shape[0], dtype=bool)
    sub = csr[np.ix_(idx, idx)].tocsr()
    ncomp, labels = sparse.csgraph.connected_components(sub, directed=True, connection="strong")
    counts = np.bincount(labels, minlength=ncomp)
    rec_local = counts[labels] > 1
    rec_local |= np.asarray(sub.diagonal()).reshape(-1).astype(bool)
    out = np.zeros(within.shape[0], dtype=bool)
    out[idx[rec_local]] = True
    return out


def _invariant_mask(csr: sparse.csr_matrix, within: np.ndarray) -> np.ndarray:
    rec = _recurrent(csr, within)
    if not rec.any():
        return rec
    fwd = _reach(csr, within, rec)
    bwd = _reach(csr.T.tocsr(), within, rec)
    return fwd & bwd


def restrict(graph: BoxMapGraph, carrier: BoxSet) -> RestrictedGraph:
    """Filter the graph to edges with both endpoints in the carrier."""
    return RestrictedGraph(graph, carrier)


def invariant_part(graph, region: BoxSet) -> BoxSet:
    """Cells of `region` lying on some bi-infinite edge path inside it.

    Covers the true maximal invariant subset of the region's realization.
    """
    csr, carrier = _graph_parts(graph)
    within = region.mask() & carrier
    return BoxSet.from_mask(region.grid, _invariant_mask(csr, within))


def forward_reach(graph, seeds: BoxSet) -> BoxSet:
    csr, carrier = _graph_parts(graph)
    return BoxSet.from_mask(seeds.grid, _reach(csr, carrier, seeds.mask()))


def backward_reach(graph, seeds: BoxSet) -> BoxSet:
    csr, carrier = _graph_parts(graph)
    return BoxSet.from_mask(seeds.grid, _reach(csr.T.tocsr(), carrier, seeds.mask()))


def omega_limit(rg: RestrictedGraph, seed: BoxSet) -> BoxSet:
    """Forward limit set of `seed` along orbits confined to the carrier."""
    csr, carrier = _graph_parts(rg)
    reach = _reach(csr, carrier, seed.mask())
    return BoxSet.from_mask(seed.grid, _invariant_mask(csr, reach))


def alpha_limit(rg: RestrictedGraph, seed: BoxSet) -> BoxSet:
    """Backward limit set: the omega limit on the transposed graph."""
    return omega_limit(rg.transpose(), seed)


def is_isolating(graph, region: BoxSet) -> IsolationCertificate:
    """Check that the invariant part of `region` sits behind a one-cell moat.

    The moat requires every lattice neighbor of the invariant part to
    exist on the grid and belong to `region`; cells on the grid boundary
    therefore never certify (the domain edge counts as boundary).
    """
    inv = invariant_part(graph, region)
    moat = inv.boundary_moat_inside(region)
    base = graph.base if isinstance(graph, RestrictedGraph) else graph
    return IsolationCertificate(region, inv, moat, base.params.lam)


def _k_step_contraction(csr, carrier_mask, start: np.ndarray, target: np.ndarray,
                        k_max: int) -> int | None:
    """Smallest k with the k-step image of `start` inside `target`, else None.

    Image sequences in a finite graph eventually cycle; a repeated image
    set ends the scan early.
    """
    current = start & carrier_mask
    seen = {current.tobytes()}
    for k in range(1, max(1, int(k_max)) + 1):
        current = _successors(csr, current) & carrier_mask
        if not np.any(current & ~target):
            return k
        key = current.tobytes()
        if key in seen:
            return None
        seen.add(key)
    return None


def attractor_from(rg: RestrictedGraph, neighborhood: BoxSet, k_max: int):
    """Certify `neighborhood` as attracting and return (attractor, k_star).

    Success means some k_star <= k_max steps map the one-cell dilation of
    the neighborhood (within the carrier) into its one-cell erosion; the
    attractor is then the omega limit of the neighborhood.  Returns None
    when no step count works.
    """
    csr, carrier_mask = _graph_parts(rg)
    u = neighborhood.intersection(rg.carrier)
    closure = u.dilate(within=rg.carrier)
    interior = u.erode(within=rg.carrier)
    k_star = _k_step_contraction(csr, carrier_mask, closure.mask(), interior.mask(), k_max)
    if k_star is None:
        return None
    att = omega_limit(rg, u)
    return att, k_star


def dual_repeller(rg: RestrictedGraph, neighborhood: BoxSet, k_star: int) -> BoxSet:
    """Repeller dual to the attractor certified on `neighborhood`.

    Re-verifies the contraction certificate at `k_star` and raises
    PreconditionViolated when it does not hold.
    """
    csr, carrier_mask = _graph_parts(rg)
    u = neighborhood.intersection(rg.carrier)
    closure = u.dilate(within=rg.carrier)
    interior = u.erode(within=rg.carrier)
    got = _k_step_contraction(csr, carrier_mask, closure.mask(), interior.mask(), k_star)
    if got is None:
        raise PreconditionViolated("no attractor certificate holds at the given step count")
    tail = u.mask()
    for _ in range(int(k_star)):
        tail = _successors(csr, tail) & carrier_mask
    w = _reach(csr, carrier_mask, tail)
    u_star = rg.carrier.difference(BoxSet.from_mask(rg.grid, w))
    return BoxSet.from_mask(rg.grid, _invariant_mask(csr, u_star.mask()))


def _forward_tail(rg: RestrictedGraph, neighborhood: BoxSet, k_star: int) -> BoxSet:
    csr, carrier_mask = _graph_parts(rg)
    tail = neighborhood.intersection(rg.carrier).mask()
    for _ in range(int(k_star)):
        tail = _successors(csr, tail) & carrier_mask
    return BoxSet.from_mask(rg.grid, _reach(csr, carrier_mask, tail))


def decompose(rg: RestrictedGraph, neighborhood: BoxSet, k_max: int) -> ARDecomposition:
    """Full attractor-repeller-connecting decomposition of the carrier.

    The carrier must already be the invariant part of its own graph.
    Raises NoAttractor when the neighborhood never contracts and
    DecompositionInconsistent when the connecting region holds recurrence
    farther than the slack margin from both the attractor and repeller.
    """
    result = attractor_from(rg, neighborhood, k_max)
    if result is None:
        raise NoAttractor(f"neighborhood of {len(neighborhood)} cells never contracts within k_max={k_max}")
    att, k_star = result
    rep = dual_repeller(rg, neighborhood, k_star)
    conn = rg.carrier.difference(att.union(rep))

    csr, carrier_mask = _graph_parts(rg)
    a_slack = att
    r_slack = rep
    for _ in range(CONNECTION_SLACK_CELLS):
        a_slack = a_slack.dilate(within=rg.carrier)
        r_slack = r_slack.dilate(within=rg.carrier)
    if conn:
        fwd = _reach(csr, carrier_mask, conn.mask())
        rec_f = BoxSet.from_mask(rg.grid, _recurrent(csr, fwd))
        stray = rec_f.difference(a_slack).difference(r_slack)
        if stray:
            raise DecompositionInconsistent(
                f"{len(stray)} recurrent cells forward of the connecting region lie outside "
                "the attractor slack; refine the grid")
        bwd = _reach(csr.T.tocsr(), carrier_mask, conn.mask())
        rec_b = BoxSet.from_mask(rg.grid, _recurrent(csr, bwd))
        stray = rec_b.difference(r_slack).difference(a_slack)
        if stray:
            raise DecompositionInconsistent(
                f"{len(stray)} recurrent cells backward of the connecting region lie outside "
                "the repeller slack; refine the grid")

    tail = _forward_tail(rg, neighborhood, k_star)
    decomp = ARDecomposition(rg.carrier, att, rep, conn, neighborhood.intersection(rg.carrier),
                             tail, k_star)
    _assert_partition(decomp)
    return decomp


def _assert_partition(d: ARDecomposition):
    assert not d.attractor.intersection(d.repeller)
    assert not d.attractor.intersection(d.connecting)
    assert not d.repeller.intersection(d.connecting)
    assert d.attractor.union(d.repeller).union(d.connecting) == d.carrier


def box_hausdorff(p: BoxSet, q: BoxSet) -> float:
    """Hausdorff distance between two cell sets on a common grid.

    Measured between cell centers, which matches the distance between the
    closed cell unions for same-size cells up to one cell width.
    """
    if not p or not q:
        raise EmptyInput("box_hausdorff needs non-empty sets")
    if p.grid != q.grid:
        raise ValueError("box_hausdorff requires a common grid")
    cp = p.centers()
    cq = q.centers()
    d_pq = cKDTree(cq).query(cp)[0].max()
    d_qp = cKDTree(cp).query(cq)[0].max()
    return float(max(d_pq, d_qp))
