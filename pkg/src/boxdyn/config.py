"""Declarative system configuration: parsing, validation, printing.

Configurations are TOML documents describing the domain, grid, field
pieces, overrides, named cell regions, and pipeline parameters.  The
grammar is documented in the README; expressions are polynomials in the
declared state variables and ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .boxmap import Grid, default_tau
from .boxset import BoxSet
from .errors import ParseError, ValidationError
from .expressions import PARAM_NAME, parse_expression
from .inclusion import Guard, Override, Params, PiecewiseInclusion, RegionPiece
from .intervals import IntervalVector

__all__ = ["SystemConfig", "PipelineConfig", "parse_config", "print_config"]

Box = tuple  # tuple of (lo, hi) float pairs, one per axis


def _box_from_raw(raw, dim, what) -> Box:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError(f"{what} must be a list of {dim} [lo, hi] pairs")
    out = []
    for pair in raw:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(f"{what} entries must be [lo, hi] pairs")
        lo, hi = float(pair[0]), float(pair[1])
        if lo > hi:
            raise ParseError(f"{what} has inverted bounds [{lo}, {hi}]")
        out.append((lo, hi))
    return tuple(out)


def _box_to_iv(box: Box) -> IntervalVector:
    return IntervalVector([p[0] for p in box], [p[1] for p in box])


@dataclass(frozen=True)
class PipelineConfig:
    k_max: int = 1000
    lambda_samples: tuple[float, ...] = (0.0,)
    anchor: float = 0.0
    semicontinuity_slope: float = 20.0


@dataclass(frozen=True)
class SystemConfig:
    """A fully parsed and validated system description."""

    name: str
    variables: tuple[str, ...]
    domain: Box
    lambda_range: tuple[float, float]
    subdivisions: tuple[int, ...]
    tau: float | None
    substeps: int
    split: int
    pieces: tuple  # ((guard texts), (rhs entries: str or (lo, hi)))
    overrides: tuple  # (region Box, value Box)
    sets: tuple  # (name, include Boxes, exclude Boxes)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    # ---- compiled views ------------------------------------------------

    def grid(self) -> Grid:
        return Grid(_box_to_iv(self.domain), self.subdivisions)

    def inclusion(self) -> PiecewiseInclusion:
        pieces = []
        for guard_texts, rhs_entries in self.pieces:
            guards = tuple(_parse_guard(t, self.variables) for t in guard_texts)
            rhs = tuple(
                entry if isinstance(entry, tuple) else parse_expression(entry, self.variables)
                for entry in rhs_entries)
            pieces.append(RegionPiece(guards, rhs))
        overrides = tuple(Override(_box_to_iv(r), _box_to_iv(v)) for r, v in self.overrides)
        return PiecewiseInclusion(_box_to_iv(self.domain), tuple(pieces), overrides,
                                  self.lambda_range)

    def resolved_tau(self, params: Params | None = None) -> float:
        if self.tau is not None:
            return self.tau
        return default_tau(self.grid(), self.inclusion(), params or Params(self.pipeline.anchor))

    def set_names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.sets)

    def boxset(self, name: str) -> BoxSet:
        grid = self.grid()
        for set_name, include, exclude in self.sets:
            if set_name == name:
                return BoxSet.covering_boxes(grid, [_box_to_iv(b) for b in include],
                                             [_box_to_iv(b) for b in exclude])
        raise KeyError(f"no named set {name!r} in configuration")

    def with_cli_overrides(self, lam=None, tau=None, grid=None) -> SystemConfig:
        cfg = self
        if tau is not None:
            cfg = replace(cfg, tau=float(tau))
        if grid is not None:
            cfg = replace(cfg, subdivisions=tuple(int(g) for g in grid))
        if lam is not None:
            pipe = replace(cfg.pipeline, anchor=float(lam), lambda_samples=(float(lam),))
            cfg = replace(cfg, pipeline=pipe)
        return cfg


def _parse_guard(text: str, variables) -> Guard:
    for op, flip in (("<=", False), (">=", True)):
        if op in text:
            lhs, rhs = text.split(op, 1)
            expr = f"({rhs}) - ({lhs})" if flip else f"({lhs}) - ({rhs})"
            g, c = parse_expression(expr, variables).affine_form()
            if not np.any(g):
                raise ParseError(f"guard {text!r} does not constrain any variable")
            return Guard(g, c, text=text)
    raise ParseError(f"guard {text!r} must contain '<=' or '>='")


def parse_config(text: str) -> SystemConfig:
    """Parse and validate a TOML configuration document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML: {exc}") from None

    system = doc.get("system", {})
    name = str(system.get("name", "unnamed"))
    variables = tuple(system.get("variables", ["x"]))
    for v in variables:
        if not v.isidentifier() or v == PARAM_NAME:
            raise ParseError(f"bad variable name {v!r}")
    dim = len(variables)
    if "domain" not in system:
        raise ParseError("system.domain is required")
    domain = _box_from_raw(system["domain"], dim, "system.domain")
    lam_range = system.get("lambda_range", [-1.0, 1.0])
    lambda_range = (float(lam_range[0]), float(lam_range[1]))

    grid_tbl = doc.get("grid", {})
    subs = grid_tbl.get("subdivisions")
    if not subs or len(subs) != dim:
        raise ParseError(f"grid.subdivisions must list {dim} positive counts")
    subdivisions = tuple(int(s) for s in subs)
    tau = grid_tbl.get("tau")
    tau = float(tau) if tau is not None else None
    substeps = int(grid_tbl.get("substeps", 1))
    if substeps < 1:
        raise ParseError("grid.substeps must be >= 1")
    split = int(grid_tbl.get("split", 1))
    if split < 1:
        raise ParseError("grid.split must be >= 1")

    pieces = []
    for i, tbl in enumerate(doc.get("piece", [])):
        guard_texts = tuple(str(t) for t in tbl.get("guard", []))
        raw_rhs = tbl.get("rhs")
        if not isinstance(raw_rhs, list) or len(raw_rhs) != dim:
            raise ParseError(f"piece #{i + 1} needs {dim} rhs entries")
        rhs = []
        for entry in raw_rhs:
            if isinstance(entry, list):
                if len(entry) != 2 or float(entry[0]) > float(entry[1]):
                    raise ParseError(f"piece #{i + 1}: interval rhs must be [lo, hi]")
                rhs.append((float(entry[0]), float(entry[1])))
            else:
                rhs.append(str(entry))
        pieces.append((guard_texts, tuple(rhs)))

    overrides = []
    for i, tbl in enumerate(doc.get("override", [])):
        region = _box_from_raw(tbl.get("region"), dim, f"override #{i + 1} region")
        value = _box_from_raw(tbl.get("value"), dim, f"override #{i + 1} value")
        overrides.append((region, value))

    sets = []
    for set_name, raw in doc.get("sets", {}).items():
        if isinstance(raw, dict):
            include = tuple(_box_from_raw(b, dim, f"sets.{set_name}") for b in raw.get("include", []))
            exclude = tuple(_box_from_raw(b, dim, f"sets.{set_name}") for b in raw.get("exclude", []))
        else:
            include = tuple(_box_from_raw(b, dim, f"sets.{set_name}") for b in raw)
            exclude = ()
        sets.append((set_name, include, exclude))

    pipe_tbl = doc.get("pipeline", {})
    pipeline = PipelineConfig(
        k_max=int(pipe_tbl.get("k_max", 1000)),
        lambda_samples=tuple(float(v) for v in pipe_tbl.get("lambda_samples", [0.0])),
        anchor=float(pipe_tbl.get("anchor", 0.0)),
        semicontinuity_slope=float(pipe_tbl.get("semicontinuity_slope", 20.0)),
    )

    cfg = SystemConfig(name=name, variables=variables, domain=domain,
                       lambda_range=lambda_range, subdivisions=subdivisions, tau=tau,
                       substeps=substeps, split=split, pieces=tuple(pieces), overrides=tuple(overrides),
                       sets=tuple(sets), pipeline=pipeline)
    _validate(cfg)
    return cfg


def _validate(cfg: SystemConfig):
    if cfg.tau is not None and cfg.tau <= 0:
        raise ValidationError("tau must be positive")
    if not cfg.pieces and not cfg.overrides:
        raise ValidationError("at least one piece or override is required")
    inclusion = cfg.inclusion()  # re-raises expression ParseErrors
    witness = inclusion.coverage_witness()
    if witness is not None:
        raise ValidationError(f"uncovered region: no piece covers {witness}")
    domain = _box_to_iv(cfg.domain)
    for set_name, include, exclude in cfg.sets:
        for box in include + exclude:
            if not domain.contains_box(_box_to_iv(box), tol=1e-12):
                raise ValidationError(f"named set {set_name!r} has a box outside the domain")
    for region, _ in cfg.overrides:
        if not domain.contains_box(_box_to_iv(region), tol=1e-12):
            raise ValidationError("override region lies outside the domain")
    lo, hi = cfg.lambda_range
    for lam in cfg.pipeline.lambda_samples + (cfg.pipeline.anchor,):
        if lam < lo - 1e-12 or lam > hi + 1e-12:
            raise ValidationError(f"lambda sample {lam} outside declared range [{lo}, {hi}]")


def _fmt_box(box: Box) -> str:
    return "[" + ", ".join(f"[{lo!r}, {hi!r}]" for lo, hi in box) + "]"


def print_config(cfg: SystemConfig) -> str:
    """Render a configuration back to TOML; parse(print(cfg)) == cfg."""
    lines = ["[system]"]
    lines.append(f'name = "{cfg.name}"')
    lines.append("variables = [" + ", ".join(f'"{v}"' for v in cfg.variables) + "]")
    lines.append(f"domain = {_fmt_box(cfg.domain)}")
    lines.append(f"lambda_range = [{cfg.lambda_range[0]!r}, {cfg.lambda_range[1]!r}]")
    lines.append("")
    lines.append("[grid]")
    lines.append("subdivisions = [" + ", ".join(str(s) for s in cfg.subdivisions) + "]")
    if cfg.tau is not None:
        lines.append(f"tau = {cfg.tau!r}")
    lines.append(f"substeps = {cfg.substeps}")
    lines.append(f"split = {cfg.split}")
    for guard_texts, rhs in cfg.pieces:
        lines.append("")
        lines.append("[[piece]]")
        lines.append("guard = [" + ", ".join(f'"{t}"' for t in guard_texts) + "]")
        entries = []
        for entry in rhs:
            if isinstance(entry, tuple):
                entries.append(f"[{entry[0]!r}, {entry[1]!r}]")
            else:
                entries.append(f'"{entry}"')
        lines.append("rhs = [" + ", ".join(entries) + "]")
    for region, value in cfg.overrides:
        lines.append("")
        lines.append("[[override]]")
        lines.append(f"region = {_fmt_box(region)}")
        lines.append(f"value = {_fmt_box(value)}")
    if cfg.sets:
        lines.append("")
        for set_name, include, exclude in cfg.sets:
            lines.append(f"[sets.{set_name}]")
            lines.append("include = [" + ", ".join(_fmt_box(b) for b in include) + "]")
            if exclude:
                lines.append("exclude = [" + ", ".join(_fmt_box(b) for b in exclude) + "]")
    lines.append("")
    lines.append("[pipeline]")
    lines.append(f"k_max = {cfg.pipeline.k_max}")
    lines.append("lambda_samples = [" + ", ".join(f"{v!r}" for v in cfg.pipeline.lambda_samples) + "]")
    lines.append(f"anchor = {cfg.pipeline.anchor!r}")
    lines.append(f"semicontinuity_slope = {cfg.pipeline.semicontinuity_slope!r}")
    return "\n".join(lines) + "\n"
