import numpy as np
import pytest

from boxdyn import (
    AnchorFailure,
    BoxSet,
    Grid,
    IntervalVector,
    Params,
    SweepPlan,
    build_graph,
    continue_decomposition,
    decompose,
    invariant_part,
    is_isolating,
    restrict,
    semicontinuity_check,
    sweep_isolating,
)


def _quad_plan(quadratic_cfg, lambdas=(0.0, 0.25, 0.5, 0.75, 1.0)):
    cfg = quadratic_cfg
    return SweepPlan(cfg.grid(), cfg.inclusion(), cfg.resolved_tau(), lambdas,
                     BoxSet.full(cfg.grid()), anchor=0.0,
                     substeps=cfg.substeps, split=cfg.split)


@pytest.fixture(scope="module")
def quad_report(quadratic_cfg):
    return sweep_isolating(_quad_plan(quadratic_cfg))


def test_quadratic_sweep_all_isolating(quad_report):
    assert quad_report.all_passed()
    assert quad_report.verified_lambdas == (0.0, 0.25, 0.5, 0.75, 1.0)


def test_quadratic_invariant_shrinks_to_empty(quad_report, quadratic_cfg):
    grid = quadratic_cfg.grid()
    s0 = quad_report.record_for(0.0).invariant
    assert s0
    assert grid.cell_containing(np.array([0.0])) in set(s0.ids.tolist())
    assert len(quad_report.record_for(1.0).invariant) == 0


def test_singleton_sweep_matches_standalone(quadratic_cfg):
    cfg = quadratic_cfg
    plan = _quad_plan(cfg, lambdas=(0.0,))
    report = sweep_isolating(plan)
    graph = build_graph(cfg.grid(), cfg.inclusion(), Params(0.0),
                        cfg.resolved_tau(), cfg.substeps, cfg.split)
    standalone = is_isolating(graph, BoxSet.full(cfg.grid()))
    rec = report.record_for(0.0)
    assert rec.cert_region.moat_verified == standalone.moat_verified
    assert rec.invariant == standalone.invariant


CUBIC = """
[system]
name = "cubic-bistable"
variables = ["x"]
domain = [[-1.0, 1.0]]
lambda_range = [0.0, 1.0]

[grid]
subdivisions = [64]
tau = 1.0
substeps = 40

[[piece]]
guard = []
rhs = ["0.25*x - x^3"]
"""


@pytest.fixture(scope="module")
def cubic_cfg():
    from boxdyn import parse_config
    return parse_config(CUBIC)


def _cubic_plan(cfg, lambdas):
    return SweepPlan(cfg.grid(), cfg.inclusion(), cfg.resolved_tau(), lambdas,
                     BoxSet.full(cfg.grid()), anchor=0.0,
                     substeps=cfg.substeps, split=cfg.split)


def test_constant_family_decomposition_is_constant(cubic_cfg):
    grid = cubic_cfg.grid()
    plan = _cubic_plan(cubic_cfg, (0.0, 0.5, 1.0))
    u = BoxSet.covering(grid, IntervalVector([0.25], [0.75]))
    report = continue_decomposition(plan, u, k_max=400)
    anchor = report.record_for(0.0).decomposition
    assert anchor is not None and report.record_for(0.0).decomposition_status == "ok"
    for lam in (0.5, 1.0):
        d = report.record_for(lam).decomposition
        assert d.attractor == anchor.attractor
        assert d.repeller == anchor.repeller
        assert d.connecting == anchor.connecting


def test_quadratic_continues_to_empty(quadratic_cfg):
    plan = _quad_plan(quadratic_cfg)
    report = continue_decomposition(plan, BoxSet.full(quadratic_cfg.grid()),
                                    k_max=quadratic_cfg.pipeline.k_max)
    rec0 = report.record_for(0.0)
    assert rec0.decomposition_status == "ok"
    # whole invariant set as attractor, empty dual repeller
    assert rec0.decomposition.attractor == rec0.invariant
    assert len(rec0.decomposition.repeller) == 0
    for lam in (0.25, 0.5, 0.75, 1.0):
        rec = report.record_for(lam)
        assert rec.decomposition_status == "continued-to-empty"
        assert len(rec.decomposition.attractor) == 0


def test_anchor_consistency(cubic_cfg):
    cfg = cubic_cfg
    grid = cfg.grid()
    plan = _cubic_plan(cfg, (0.0,))
    u = BoxSet.covering(grid, IntervalVector([0.25], [0.75]))
    report = continue_decomposition(plan, u, k_max=400)
    graph = build_graph(grid, cfg.inclusion(), Params(0.0), cfg.resolved_tau(),
                        cfg.substeps, cfg.split)
    carrier = invariant_part(graph, BoxSet.full(grid))
    standalone = decompose(restrict(graph, carrier), u.intersection(carrier), 400)
    rec = report.record_for(0.0)
    assert rec.decomposition.attractor == standalone.attractor
    assert rec.decomposition.repeller == standalone.repeller
    assert rec.decomposition.k_star == standalone.k_star


def test_anchor_failure_raises(cubic_cfg):
    grid = cubic_cfg.grid()
    plan = _cubic_plan(cubic_cfg, (0.0,))
    # a band straddling the repelling fixed point never contracts
    bad_u = BoxSet.covering(grid, IntervalVector([-0.1], [0.1]))
    with pytest.raises(AnchorFailure):
        continue_decomposition(plan, bad_u, k_max=100)


def test_non_isolating_anchor_skips_decomposition(switching_cfg):
    # the switching field's invariant set touches the domain boundary, so
    # the full-domain region never certifies and the verified run is empty
    cfg = switching_cfg
    grid = cfg.grid()
    plan = SweepPlan(grid, cfg.inclusion(), cfg.resolved_tau(), (0.0,),
                     BoxSet.full(grid), substeps=cfg.substeps, split=cfg.split)
    u = BoxSet.covering(grid, IntervalVector([0.7], [1.0]))
    report = continue_decomposition(plan, u, k_max=200)
    assert report.verified_lambdas == ()
    assert report.record_for(0.0).decomposition is None


def test_semicontinuity_empty_samples_pass(quadratic_cfg):
    plan = _quad_plan(quadratic_cfg)
    report = sweep_isolating(plan)
    assert semicontinuity_check(report, 0.0, quadratic_cfg.pipeline.semicontinuity_slope)


def test_semicontinuity_constant_family(switching_cfg):
    cfg = switching_cfg
    grid = cfg.grid()
    plan = SweepPlan(grid, cfg.inclusion(), cfg.resolved_tau(), (0.0, 1.0),
                     BoxSet.full(grid), substeps=cfg.substeps, split=cfg.split)
    report = sweep_isolating(plan)
    # isolation fails (boundary fixed points) but the records still exist;
    # identical invariant sets satisfy semicontinuity trivially
    assert semicontinuity_check(report, 0.0, 0.0) or not report.verified_lambdas


def test_semicontinuity_detects_blowup(quadratic_cfg):
    cfg = quadratic_cfg
    grid = cfg.grid()
    plan = _quad_plan(cfg, lambdas=(0.0, 0.25))
    report = sweep_isolating(plan)
    records = list(report.records)
    # forge a sample whose invariant set jumped far from the anchor cluster
    far = BoxSet.covering(grid, IntervalVector([0.9], [1.0]))
    records[1] = type(records[1])(records[1].lam, records[1].cert_region, None, None, far)
    forged = type(report)(plan, tuple(records), report.verified_run)
    assert not semicontinuity_check(forged, 0.0, 0.0)


def test_plan_validation(quadratic_cfg):
    cfg = quadratic_cfg
    grid = cfg.grid()
    with pytest.raises(ValueError):
        SweepPlan(grid, cfg.inclusion(), 0.1, (0.5, 0.0), BoxSet.full(grid))
    with pytest.raises(ValueError):
        SweepPlan(grid, cfg.inclusion(), 0.1, (0.0, 2.0), BoxSet.full(grid))
    with pytest.raises(ValueError):
        SweepPlan(grid, cfg.inclusion(), 0.1, (0.0,),
                  BoxSet.covering(grid, IntervalVector([-0.5], [0.5])),
                  attractor_region=BoxSet.full(grid))


def test_lambda_refinement_keeps_run(quadratic_cfg):
    coarse = sweep_isolating(_quad_plan(quadratic_cfg, lambdas=(0.0, 0.5, 1.0)))
    fine = sweep_isolating(_quad_plan(quadratic_cfg))
    assert coarse.verified_lambdas[0] == fine.verified_lambdas[0] == 0.0
    assert coarse.verified_lambdas[-1] == fine.verified_lambdas[-1] == 1.0
