"""Parameter sweeps: isolation certificates and decomposition continuation.

A sweep rebuilds the box map at each parameter sample, re-runs the
isolation check on fixed neighborhoods, and reports the maximal
contiguous run of passing samples around an anchor.  Decomposition
continuation then re-runs the attractor-repeller pipeline on each sample
of the verified run with the attracting neighborhood held fixed;
breakdown at large parameter offsets is reported as data, not raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .boxmap import BoxMapGraph, Grid, build_graph
from .boxset import BoxSet
from .dynamics import (
    ARDecomposition,
    DecompositionInconsistent,
    IsolationCertificate,
    NoAttractor,
    decompose,
    invariant_part,
    is_isolating,
    restrict,
)
from .errors import AnchorFailure, BoxdynError
from .inclusion import Params, PiecewiseInclusion

__all__ = ["SweepPlan", "SampleRecord", "SweepReport", "sweep_isolating",
           "continue_decomposition", "semicontinuity_check"]


@dataclass(frozen=True)
class SweepPlan:
    """Which parameters to sample and which neighborhoods to certify."""

    grid: Grid
    inclusion: PiecewiseInclusion
    tau: float
    lambdas: tuple[float, ...]
    region: BoxSet
    attractor_region: BoxSet | None = None
    repeller_region: BoxSet | None = None
    anchor: float = 0.0
    substeps: int = 1
    split: int = 1
    # per-plan graph cache so isolation and continuation share builds
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if list(self.lambdas) != sorted(self.lambdas):
            raise ValueError("lambda samples must be increasing")
        lo, hi = self.inclusion.lambda_range
        if self.lambdas and (self.lambdas[0] < lo - 1e-12 or self.lambdas[-1] > hi + 1e-12):
            raise ValueError("lambda samples outside the declared family interval")
        for name, sub in (("attractor_region", self.attractor_region),
                          ("repeller_region", self.repeller_region)):
            if sub is not None and not sub.issubset(self.region):
                raise ValueError(f"{name} must lie inside the main neighborhood")

    def anchor_index(self) -> int:
        diffs = [abs(v - self.anchor) for v in self.lambdas]
        return diffs.index(min(diffs))


@dataclass(frozen=True)
class SampleRecord:
    """Everything computed at one parameter sample."""

    lam: float
    cert_region: IsolationCertificate
    cert_attractor: IsolationCertificate | None
    cert_repeller: IsolationCertificate | None
    invariant: BoxSet
    decomposition: ARDecomposition | None = None
    decomposition_status: str = "not-run"

    @property
    def isolation_passed(self) -> bool:
        ok = self.cert_region.moat_verified
        for cert in (self.cert_attractor, self.cert_repeller):
            if cert is not None:
                ok = ok and cert.moat_verified
        return ok


@dataclass(frozen=True)
class SweepReport:
    """Per-sample records plus the verified contiguous run around the anchor."""

    plan: SweepPlan
    records: tuple[SampleRecord, ...]
    verified_run: tuple[int, int] = field(default=(0, -1))  # inclusive index range

    def record_for(self, lam: float) -> SampleRecord:
        for rec in self.records:
            if math.isclose(rec.lam, lam, rel_tol=0.0, abs_tol=1e-12):
                return rec
        raise KeyError(f"no record at lambda={lam}")

    @property
    def verified_lambdas(self) -> tuple[float, ...]:
        a, b = self.verified_run
        return tuple(r.lam for r in self.records[a:b + 1])

    def all_passed(self) -> bool:
        return all(r.isolation_passed for r in self.records)


def _build(plan: SweepPlan, lam: float) -> BoxMapGraph:
    if lam in plan._cache:
        return plan._cache[lam]
    try:
        graph = build_graph(plan.grid, plan.inclusion, Params(lam), plan.tau,
                            plan.substeps, plan.split)
    except BoxdynError as exc:
        raise type(exc)(f"lambda={lam}: {exc}") from exc
    plan._cache[lam] = graph
    return graph


def _verified_run(records, anchor_idx: int) -> tuple[int, int]:
    if not records[anchor_idx].isolation_passed:
        return (anchor_idx, anchor_idx - 1)  # empty run
    a = anchor_idx
    while a > 0 and records[a - 1].isolation_passed:
        a -= 1
    b = anchor_idx
    while b + 1 < len(records) and records[b + 1].isolation_passed:
        b += 1
    return (a, b)


def sweep_isolating(plan: SweepPlan) -> SweepReport:
    """Isolation certificates for every parameter sample.

    The invariant part of the main neighborhood is recorded per sample;
    the verified run is the maximal contiguous block of samples around
    the anchor where every supplied neighborhood certifies.
    """
    records = []
    for lam in plan.lambdas:
        graph = _build(plan, lam)
        cert_n = is_isolating(graph, plan.region)
        cert_a = is_isolating(graph, plan.attractor_region) if plan.attractor_region is not None else None
        cert_r = is_isolating(graph, plan.repeller_region) if plan.repeller_region is not None else None
        records.append(SampleRecord(lam, cert_n, cert_a, cert_r, cert_n.invariant))
    run = _verified_run(records, plan.anchor_index())
    return SweepReport(plan, tuple(records), run)


def continue_decomposition(plan: SweepPlan, neighborhood: BoxSet, k_max: int) -> SweepReport:
    """Re-run the decomposition across the verified isolating run.

    The attracting neighborhood is held fixed; at each sample it is
    intersected with that sample's invariant set.  An empty invariant set
    yields the empty decomposition with status "continued-to-empty", and
    a failed attractor certificate is recorded as "breakdown:..." rather
    than raised.  Only the anchor sample failing raises AnchorFailure.
    """
    base = sweep_isolating(plan)
    anchor_idx = plan.anchor_index()
    a, b = base.verified_run
    records = []
    for i, rec in enumerate(base.records):
        if not (a <= i <= b):
            records.append(rec)
            continue
        graph = _build(plan, rec.lam)
        carrier = invariant_part(graph, plan.region)
        if not carrier:
            status = "continued-to-empty"
            decomp = ARDecomposition(carrier, carrier, carrier, carrier, carrier, carrier, 0)
        else:
            rg = restrict(graph, carrier)
            seed = neighborhood.intersection(carrier)
            try:
                decomp = decompose(rg, seed, k_max)
                status = "ok"
            except NoAttractor as exc:
                decomp = None
                status = f"breakdown: attractor certificate failed ({exc})"
            except DecompositionInconsistent as exc:
                decomp = None
                status = f"breakdown: connection check failed ({exc})"
        if i == anchor_idx and status not in ("ok", "continued-to-empty"):
            raise AnchorFailure(f"decomposition failed at anchor lambda={rec.lam}: {status}")
        records.append(SampleRecord(rec.lam, rec.cert_region, rec.cert_attractor,
                                    rec.cert_repeller, carrier, decomp, status))
    return SweepReport(plan, tuple(records), base.verified_run)


def semicontinuity_check(report: SweepReport, anchor: float,
                         slope_cells_per_lambda: float = 20.0) -> bool:
    """Combinatorial upper-semicontinuity of the invariant sets.

    Each verified sample's invariant set must lie inside the anchor set
    dilated by one cell plus a slack budget growing linearly with the
    parameter offset.
    """
    anchor_rec = report.record_for(anchor)
    s0 = anchor_rec.invariant
    for lam in report.verified_lambdas:
        s_lam = report.record_for(lam).invariant
        if not s_lam:
            continue
        if not s0:
            return False
        budget = 1 + math.ceil(slope_cells_per_lambda * abs(lam - anchor))
        allowed = s0
        for _ in range(budget):
            allowed = allowed.dilate()
        if not s_lam.issubset(allowed):
            return False
    return True
