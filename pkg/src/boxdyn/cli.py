"""Command line driver for the certification pipelines.

Usage: boxdyn <command> --config <path> --out <dir> [--lambda v] [--tau v]
[--grid n,...] [--threads k].  Each command runs one pipeline, writes the
delimited exports, figures, and report.json into the output directory,
and exits 0 when every certificate passed, 2 when the pipeline completed
but some certificate failed, and 1 on errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import reports
from .boxmap import build_graph
from .boxset import BoxSet
from .continuation import (
    SweepPlan,
    continue_decomposition,
    semicontinuity_check,
    sweep_isolating,
)
from .dynamics import (
    DecompositionInconsistent,
    NoAttractor,
    decompose,
    invariant_part,
    is_isolating,
    restrict,
)
from .errors import AnchorFailure, BoxdynError
from .inclusion import Params
from .config import parse_config

__all__ = ["main", "run"]

COMMANDS = ("build-map", "invariant", "isolate", "decompose", "sweep", "continue")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="boxdyn",
        description="Certified attractor-repeller decompositions of differential "
                    "inclusions on cubical grids.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="TOML system configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="override the parameter value (and sample list) from the config")
    p.add_argument("--tau", type=float, default=None, help="override the time step")
    p.add_argument("--grid", default=None,
                   help="override grid subdivisions, comma separated (e.g. 128 or 64,64)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count hint; builds are vectorized and deterministic, "
                        "so this is accepted for interface compatibility and ignored")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return p


def _named_set(cfg, name: str, required: bool) -> BoxSet | None:
    if name in cfg.set_names():
        return cfg.boxset(name)
    if required:
        raise BoxdynError(f"this command needs a [sets.{name}] region in the config")
    return None


def _base_payload(cfg, args, command: str) -> dict:
    return {
        "command": command,
        "system": cfg.name,
        "variables": list(cfg.variables),
        "domain": [list(p) for p in cfg.domain],
        "grid": list(cfg.subdivisions),
        "tau": cfg.resolved_tau(),
        "substeps": cfg.substeps,
        "lambda": cfg.pipeline.anchor,
    }


def _graph_at(cfg, lam: float):
    return build_graph(cfg.grid(), cfg.inclusion(), Params(lam), cfg.resolved_tau(),
                       cfg.substeps, cfg.split)


def _cmd_build_map(cfg, args, out: Path, payload: dict) -> int:
    graph = _graph_at(cfg, cfg.pipeline.anchor)
    edge_path = out / "graph.edges"
    bin_path = out / "graph.bin"
    graph.write_edge_list(edge_path)
    graph.write_binary(bin_path)
    nedges = int(graph.indptr[-1])
    payload["results"] = {
        "cells": graph.grid.ncells,
        "edges": nedges,
        "exit_cells": int(graph.exit_flags.sum()),
    }
    payload["artifacts"] = {"edges": edge_path.name, "binary": bin_path.name}
    if not args.no_figures:
        deg = BoxSet.from_mask(graph.grid, graph.out_degree() > 0)
        exits = BoxSet.from_mask(graph.grid, graph.exit_flags)
        fig = reports.plot_boxsets(out, "map", graph.grid,
                                   {"N": deg, "R": exits}, "cells with edges / exit cells")
        if fig:
            payload["artifacts"]["figure"] = fig
    return 0


def _cmd_invariant(cfg, args, out: Path, payload: dict) -> int:
    graph = _graph_at(cfg, cfg.pipeline.anchor)
    region = _named_set(cfg, "N", required=False) or BoxSet.full(graph.grid)
    inv = invariant_part(graph, region)
    payload["results"] = {"region_cells": len(region), "invariant_cells": len(inv)}
    payload["artifacts"] = reports.export_boxset(out, "invariant", inv)
    if not args.no_figures:
        fig = reports.plot_boxsets(out, "invariant", graph.grid,
                                   {"N": region, "Inv": inv}, "invariant part")
        if fig:
            payload["artifacts"]["figure"] = fig
    return 0


def _cmd_isolate(cfg, args, out: Path, payload: dict) -> int:
    graph = _graph_at(cfg, cfg.pipeline.anchor)
    region = _named_set(cfg, "N", required=True)
    cert = is_isolating(graph, region)
    payload["results"] = {
        "region_cells": len(region),
        "invariant_cells": len(cert.invariant),
        "isolating": cert.moat_verified,
    }
    payload["certificates"] = {"isolating_N": "pass" if cert.moat_verified else "fail"}
    payload["artifacts"] = reports.export_boxset(out, "invariant", cert.invariant)
    if not args.no_figures:
        fig = reports.plot_boxsets(out, "isolate", graph.grid,
                                   {"N": region, "Inv": cert.invariant},
                                   f"isolation {'pass' if cert.moat_verified else 'fail'}")
        if fig:
            payload["artifacts"]["figure"] = fig
    return 0 if cert.moat_verified else 2


def _cmd_decompose(cfg, args, out: Path, payload: dict) -> int:
    graph = _graph_at(cfg, cfg.pipeline.anchor)
    explicit_n = _named_set(cfg, "N", required=False)
    region = explicit_n or BoxSet.full(graph.grid)
    seed = _named_set(cfg, "U", required=True)
    carrier = invariant_part(graph, region)
    certs = {}
    payload["certificates"] = certs
    payload["results"] = {"carrier_cells": len(carrier)}
    if explicit_n is not None:
        # informational only; isolation gating belongs to the isolate command
        cert = is_isolating(graph, explicit_n)
        payload["results"]["isolating_N"] = cert.moat_verified
    payload["artifacts"] = reports.export_boxset(out, "S", carrier)
    if not carrier:
        certs["decomposition"] = "fail"
        payload["results"]["error"] = "invariant part is empty; nothing to decompose"
        return 2
    rg = restrict(graph, carrier)
    try:
        d = decompose(rg, seed.intersection(carrier), cfg.pipeline.k_max)
    except (NoAttractor, DecompositionInconsistent) as exc:
        certs["decomposition"] = "fail"
        payload["results"]["error"] = str(exc)
        return 2
    certs["decomposition"] = "pass"
    payload["results"].update({
        "attractor_cells": len(d.attractor),
        "repeller_cells": len(d.repeller),
        "connecting_cells": len(d.connecting),
        "k_star": d.k_star,
    })
    for name, bs in (("A", d.attractor), ("R", d.repeller), ("C", d.connecting)):
        payload["artifacts"].update(reports.export_boxset(out, name, bs))
    if not args.no_figures:
        fig = reports.plot_boxsets(out, "decomposition", graph.grid,
                                   {"A": d.attractor, "C": d.connecting, "R": d.repeller},
                                   "attractor / connecting / repeller")
        if fig:
            payload["artifacts"]["figure"] = fig
    return 0


def _make_plan(cfg) -> SweepPlan:
    region = _named_set(cfg, "N", required=True)
    return SweepPlan(
        grid=cfg.grid(), inclusion=cfg.inclusion(), tau=cfg.resolved_tau(),
        lambdas=tuple(sorted(cfg.pipeline.lambda_samples)),
        region=region,
        attractor_region=_named_set(cfg, "N_A", required=False),
        repeller_region=_named_set(cfg, "N_R", required=False),
        anchor=cfg.pipeline.anchor, substeps=cfg.substeps, split=cfg.split)


def _sweep_exports(cfg, args, out: Path, payload: dict, report):
    payload["artifacts"] = {
        "table": reports.write_sweep_table(out, report),
        "blocks": reports.write_sweep_blocks(out, report),
    }
    for rec in report.records:
        tag = f"S_lam_{rec.lam:g}".replace("-", "m").replace(".", "p")
        payload["artifacts"].update(reports.export_boxset(out, tag, rec.invariant))
    if not args.no_figures:
        payload["artifacts"]["figure"] = reports.plot_sweep(out, report)


def _cmd_sweep(cfg, args, out: Path, payload: dict) -> int:
    report = sweep_isolating(_make_plan(cfg))
    payload["results"] = {
        "samples": list(report.plan.lambdas),
        "verified_run": list(report.verified_lambdas),
        "invariant_cells": {repr(r.lam): len(r.invariant) for r in report.records},
    }
    payload["certificates"] = {
        repr(r.lam): "pass" if r.isolation_passed else "fail" for r in report.records}
    _sweep_exports(cfg, args, out, payload, report)
    return 0 if report.all_passed() else 2


def _cmd_continue(cfg, args, out: Path, payload: dict) -> int:
    plan = _make_plan(cfg)
    seed = _named_set(cfg, "U", required=True)
    report = continue_decomposition(plan, seed, cfg.pipeline.k_max)
    semi = semicontinuity_check(report, plan.anchor, cfg.pipeline.semicontinuity_slope)
    a, b = report.verified_run
    run_records = report.records[a:b + 1]
    statuses = {repr(r.lam): r.decomposition_status for r in run_records}
    ok = (semi and report.all_passed()
          and all(s in ("ok", "continued-to-empty") for s in statuses.values()))
    payload["results"] = {
        "samples": list(report.plan.lambdas),
        "verified_run": list(report.verified_lambdas),
        "statuses": statuses,
        "semicontinuity": semi,
    }
    payload["certificates"] = {
        "isolation_all_samples": "pass" if report.all_passed() else "fail",
        "continuation": "pass" if all(
            s in ("ok", "continued-to-empty") for s in statuses.values()) else "fail",
        "semicontinuity": "pass" if semi else "fail",
    }
    _sweep_exports(cfg, args, out, payload, report)
    for rec in run_records:
        if rec.decomposition is None or not rec.decomposition.attractor:
            continue
        tag = f"A_lam_{rec.lam:g}".replace("-", "m").replace(".", "p")
        payload["artifacts"].update(reports.export_boxset(out, tag, rec.decomposition.attractor))
    return 0 if ok else 2


_DISPATCH = {
    "build-map": _cmd_build_map,
    "invariant": _cmd_invariant,
    "isolate": _cmd_isolate,
    "decompose": _cmd_decompose,
    "sweep": _cmd_sweep,
    "continue": _cmd_continue,
}


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        grid_override = None
        if args.grid is not None:
            grid_override = [int(v) for v in args.grid.split(",")]
        cfg = cfg.with_cli_overrides(lam=args.lam, tau=args.tau, grid=grid_override)
        payload = _base_payload(cfg, args, args.command)
        code = _DISPATCH[args.command](cfg, args, out, payload)
    except (BoxdynError, AnchorFailure, OSError, ValueError) as exc:
        print(f"boxdyn: error: {exc}", file=sys.stderr)
        return 1
    payload["elapsed_seconds"] = round(time.perf_counter() - started, 3)
    payload["exit_code"] = code
    reports.write_report(out, payload)
    status = {0: "ok", 2: "completed, certificates failed"}[code]
    print(f"{args.command}: {status} (report: {out / 'report.json'})")
    return code


def main():
    sys.exit(run())
