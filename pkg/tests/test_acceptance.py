"""End-to-end acceptance checks at the advertised tolerances and budgets.

Each test prints one pass/fail line; runtime limits are asserted from
wall-clock measurements of the complete pipeline under test.
"""

import time

import numpy as np
import pytest

import test_properties as props
from boxdyn import (
    BoxSet,
    Grid,
    IntervalVector,
    Params,
    SweepPlan,
    box_hausdorff,
    build_graph,
    continue_decomposition,
    decompose,
    invariant_part,
    omega_limit,
    restrict,
    semicontinuity_check,
    sweep_isolating,
)

from conftest import load_config


def _line(num, label, ok, elapsed, limit):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num} ({label}): {status} in {elapsed:.2f}s (limit {limit:.0f}s)")


def test_criterion_1_example_decomposition():
    limit = 5.0
    t0 = time.perf_counter()
    cfg = load_config("switching_1d.toml")
    grid = cfg.grid()
    w = grid.widths[0]
    graph = build_graph(grid, cfg.inclusion(), Params(0.0), 0.25,
                        cfg.substeps, cfg.split)
    carrier = invariant_part(graph, BoxSet.full(grid))
    rg = restrict(graph, carrier)
    u = BoxSet.covering(grid, IntervalVector([0.7], [1.0])).intersection(carrier)
    d = decompose(rg, u, cfg.pipeline.k_max)
    elapsed = time.perf_counter() - t0

    # tolerance: two cells of the coarse reference arithmetic, 0.0625
    tol = 0.0625
    a_err = box_hausdorff(d.attractor, BoxSet.covering(grid, IntervalVector([1.0], [1.0])))
    r_err = box_hausdorff(d.repeller, BoxSet.covering(grid, IntervalVector([-1.0], [0.0])))
    interior = BoxSet.covering(grid, IntervalVector([tol], [1.0 - tol]))
    c_ok = interior.difference(d.attractor).difference(d.repeller).issubset(d.connecting)
    partition = (d.attractor.union(d.repeller).union(d.connecting) == carrier
                 and not d.attractor.intersection(d.repeller)
                 and not d.attractor.intersection(d.connecting)
                 and not d.repeller.intersection(d.connecting))
    ok = a_err <= tol and r_err <= tol and c_ok and partition and elapsed < limit
    _line(1, "attractor-repeller decomposition of the switching example", ok, elapsed, limit)
    assert a_err <= tol, f"attractor Hausdorff {a_err} > {tol}"
    assert r_err <= tol, f"repeller Hausdorff {r_err} > {tol}"
    assert c_ok and partition
    assert elapsed < limit


def test_criterion_2_omega_limit_of_origin():
    limit = 5.0
    t0 = time.perf_counter()
    cfg = load_config("switching_1d.toml")
    grid = cfg.grid()
    graph = build_graph(grid, cfg.inclusion(), Params(0.0), 0.25,
                        cfg.substeps, cfg.split)
    carrier = invariant_part(graph, BoxSet.full(grid))
    rg = restrict(graph, carrier)
    origin = grid.cell_containing(np.array([0.0]))
    om = omega_limit(rg, BoxSet(grid, np.array([origin])))
    elapsed = time.perf_counter() - t0

    covers = BoxSet(grid, np.arange(origin, grid.ncells, dtype=np.int64)).issubset(om)
    tight = om.issubset(BoxSet.covering(grid, IntervalVector([0.0], [1.0])).dilate())
    ok = covers and tight and elapsed < limit
    _line(2, "omega limit of the origin covers [0, 1]", ok, elapsed, limit)
    assert covers and tight
    assert elapsed < limit


def test_criterion_3_empty_image_semantics():
    limit = 1.0
    t0 = time.perf_counter()
    cfg = load_config("constant_drift_1d.toml")
    grid = cfg.grid()
    assert grid.ncells >= 10
    graph = build_graph(grid, cfg.inclusion(), Params(0.0), cfg.resolved_tau(),
                        cfg.substeps, cfg.split)
    inv = invariant_part(graph, BoxSet.full(grid))
    # every cell must reach a cell with no out-edges
    sinks = BoxSet.from_mask(grid, graph.out_degree() == 0)
    from boxdyn import backward_reach
    reaches = backward_reach(graph, sinks)
    elapsed = time.perf_counter() - t0

    ok = len(inv) == 0 and sinks and reaches == BoxSet.full(grid) and elapsed < limit
    _line(3, "empty invariant part under constant drift", ok, elapsed, limit)
    assert len(inv) == 0
    assert sinks and reaches == BoxSet.full(grid)
    assert elapsed < limit


def test_criterion_4_quadratic_sweep():
    limit = 10.0
    t0 = time.perf_counter()
    cfg = load_config("quadratic_sweep.toml")
    grid = cfg.grid()
    plan = SweepPlan(grid, cfg.inclusion(), cfg.resolved_tau(),
                     (0.0, 0.25, 0.5, 0.75, 1.0), BoxSet.full(grid),
                     anchor=0.0, substeps=cfg.substeps, split=cfg.split)
    report = sweep_isolating(plan)
    elapsed = time.perf_counter() - t0

    all_pass = report.all_passed()
    s0 = report.record_for(0.0).invariant
    s1 = report.record_for(1.0).invariant
    cluster = bool(s0) and grid.cell_containing(np.array([0.0])) in set(s0.ids.tolist())
    ok = all_pass and cluster and len(s1) == 0 and elapsed < limit
    _line(4, "isolation sweep of the quadratic family", ok, elapsed, limit)
    assert all_pass
    assert cluster
    assert len(s1) == 0
    assert elapsed < limit


def test_criterion_5_planar_continuation():
    limit = 120.0
    t0 = time.perf_counter()
    cfg = load_config("circle_2d.toml")
    grid = cfg.grid()
    w = grid.widths[0]
    plan = SweepPlan(grid, cfg.inclusion(), cfg.resolved_tau(),
                     cfg.pipeline.lambda_samples, cfg.boxset("N"),
                     attractor_region=cfg.boxset("N_A"),
                     repeller_region=cfg.boxset("N_R"),
                     anchor=cfg.pipeline.anchor,
                     substeps=cfg.substeps, split=cfg.split)
    report = continue_decomposition(plan, cfg.boxset("U"), cfg.pipeline.k_max)
    semi = semicontinuity_check(report, cfg.pipeline.anchor,
                                cfg.pipeline.semicontinuity_slope)
    elapsed = time.perf_counter() - t0

    origin = grid.cell_containing(np.array([0.0, 0.0]))
    all_isolating = report.all_passed()
    max_err = 0.0
    repellers_ok = True
    for lam in plan.lambdas:
        rec = report.record_for(lam)
        assert rec.decomposition_status == "ok", rec.decomposition_status
        r = np.sqrt(1.0 + lam)
        th = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        circle = BoxSet(grid, np.unique([grid.cell_containing(p) for p in pts]))
        max_err = max(max_err, box_hausdorff(rec.decomposition.attractor, circle))
        repellers_ok &= origin in set(rec.decomposition.repeller.ids.tolist())
    ok = (all_isolating and semi and repellers_ok and max_err <= 3 * w
          and elapsed < limit)
    _line(5, "planar circle family continuation", ok, elapsed, limit)
    assert all_isolating
    assert semi
    assert repellers_ok
    assert max_err <= 3 * w, f"attractor Hausdorff {max_err / w:.2f} cells > 3"
    assert elapsed < limit


def test_criterion_6_property_suites():
    limit = 60.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)

    # >= 200 randomized graphs of up to 500 nodes
    for case in range(200):
        n = int(rng.integers(1, props.MAX_NODES + 1))
        props.check_graph_properties(n, int(rng.integers(0, 2**31)))

    # outer soundness: >= 1000 oracle trajectories per system, zero violations
    switching_cfg = load_config("switching_1d.toml")
    g_sw = build_graph(switching_cfg.grid(), switching_cfg.inclusion(), Params(0.0),
                       0.25, switching_cfg.substeps, switching_cfg.split)
    x0, xt = props.switching_samples(rng)
    assert len(x0) >= 1000 and props.soundness_violations(g_sw, x0, xt) == 0

    drift_cfg = load_config("constant_drift_1d.toml")
    g_dr = build_graph(drift_cfg.grid(), drift_cfg.inclusion(), Params(0.0),
                       drift_cfg.resolved_tau(), drift_cfg.substeps)
    x0, xt = props.drift_samples(rng, g_dr.tau)
    assert len(x0) >= 1000 and props.soundness_violations(g_dr, x0, xt) == 0

    quad_cfg = load_config("quadratic_sweep.toml")
    g_q = build_graph(quad_cfg.grid(), quad_cfg.inclusion(), Params(0.0),
                      quad_cfg.resolved_tau(), quad_cfg.substeps, quad_cfg.split)
    x0, xt = props.quadratic_samples(rng, g_q.tau, 0.0)
    assert len(x0) >= 1000 and props.soundness_violations(g_q, x0, xt) == 0

    circle_cfg = load_config("circle_2d.toml")
    g_c = build_graph(Grid(circle_cfg.grid().domain, (64, 64)), circle_cfg.inclusion(),
                      Params(0.0), 0.25, 20, 2)
    xy0, xyt = props.circle_samples(rng, 0.25, 0.0)
    assert len(xy0) >= 1000 and props.soundness_violations(g_c, xy0, xyt) == 0

    # refinement monotonicity, one axis-doubling per example
    for cfg, subs, tau, substeps in (
        (switching_cfg, (64,), 0.25, 10),
        (drift_cfg, (16,), drift_cfg.resolved_tau(), 1),
        (quad_cfg, (64,), 0.5, 4),
        (circle_cfg, (32, 32), 0.25, 10),
    ):
        coarse, fine = props._doubled(cfg, subs, 0.0, tau, substeps)
        assert props.refinement_violations(coarse, fine) == 0
        assert props.invariant_refines(coarse, fine)

    # dual-dual containment within a one-cell dilation
    grid = g_sw.grid
    carrier = invariant_part(g_sw, BoxSet.full(grid))
    rg = restrict(g_sw, carrier)
    a, a_star = props.dual_dual_brackets(
        rg,
        BoxSet.covering(grid, IntervalVector([0.7], [1.0])).intersection(carrier),
        BoxSet.covering(grid, IntervalVector([-1.0], [0.1])).intersection(carrier),
        200)
    assert a.issubset(a_star) and a_star.issubset(a.dilate())

    elapsed = time.perf_counter() - t0
    ok = elapsed < limit
    _line(6, "randomized and oracle property suites", ok, elapsed, limit)
    assert elapsed < limit
