#!/usr/bin/env python3
"""
geopersist — 1-dimensional intrinsic persistence of sampled geodesic spaces.

Builds open Vietoris–Rips filtrations of finite samples of model spaces
(circle, wedge of circles, flat torus, metric graph), computes their H1
persistence and checks it against the persistence of the space itself.

Subcommands:
  sample             — s-dense sample of a model (+ density certificate)
  persist            — decorated H1 diagram of a sample (JSON + SVG)
  verify-stability   — the matching a dense sample must admit
  verify-order       — kernel-inclusion order of two samples' persistences
  verify-minimality  — the enriched sample is the minimum over dense samples
  nullhomotopy       — explicit disk contracting a short circle in Rips(S, r)
  presentation       — simplified edge-path presentation of π1 at r

Exit codes: 0 pass, 1 input error, 2 precondition error, 3 verification failure.

Usage:
  python geopersist.py sample --model models/circle.json --s 0.05 --enrich --out runs/circle
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from analysis import (
    build_icp,
    compare_order,
    default_rmax,
    minimality_check,
    sample_reduction,
    stability_figure,
    verify_stability,
)
from errors import (
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_VERIFICATION,
    ArgumentError,
    GeoPersistError,
    ValidationError,
)
from homology import DecoratedDiagram, FieldP, H1Reduction, load_diagram, save_diagram
from loops import build_nullhomotopy, verify_nullhomotopy
from pi1 import abelianization_rank, edge_path_presentation, save_presentation, tietze_simplify
from plotting import diagram_svg
from rips import build_filtration, complex_at, save_skeleton
from sampling import (
    SampleSet,
    enrich_with_critical_points,
    load_sample,
    restrict_metric,
    sample_uniform,
    save_sample,
    verify_density,
)
from spaces import GeodesicSpaceModel, known_diagram, load_model

logger = logging.getLogger("geopersist")

# ── Configuration ─────────────────────────────────────────────────────────────

DEFAULT_S = 0.05
DEFAULT_SEED = 0
DEFAULT_FIELD = 2
DEFAULT_OUT = "runs"
DEFAULT_MODE = "dense"
DEFAULT_CANDIDATES = 5

COMMANDS = (
    "sample",
    "persist",
    "verify-stability",
    "verify-order",
    "verify-minimality",
    "nullhomotopy",
    "presentation",
)


@dataclass
class RunConfig:
    """Everything one run depends on; built from the command line."""

    command: str
    model: Optional[Path] = None
    sample: Optional[Path] = None
    s: float = DEFAULT_S
    seed: int = DEFAULT_SEED
    field: int = DEFAULT_FIELD
    rmax: Optional[float] = None
    resolution: Optional[float] = None
    out: Path = Path(DEFAULT_OUT)
    enrich: bool = False
    verbose: bool = False
    mode: str = DEFAULT_MODE
    delta: Optional[float] = None
    r: Optional[float] = None
    circle: Optional[str] = None
    candidates: List[Path] = dataclass_field(default_factory=list)
    diagram: Optional[Path] = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ArgumentError(f"unknown command {self.command!r}")
        if self.model is None and self.sample is None and not self.candidates:
            raise ArgumentError("--model, --sample or --candidates is required")
        for name in ("s", "rmax", "resolution", "delta", "r"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValidationError(f"--{name} must be positive, got {value}")
        if self.seed < 0:
            raise ValidationError(f"--seed must be non-negative, got {self.seed}")
        FieldP(self.field)
        if self.mode not in ("dense", "equidistant"):
            raise ArgumentError(f"--mode must be dense or equidistant, got {self.mode!r}")
        return self

    @property
    def probe_resolution(self) -> float:
        return self.resolution if self.resolution is not None else self.s / 20

    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "model": str(self.model) if self.model else None,
            "sample": str(self.sample) if self.sample else None,
            "s": self.s,
            "seed": self.seed,
            "field": self.field,
            "rmax": self.rmax,
            "resolution": self.probe_resolution,
            "enrich": self.enrich,
            "mode": self.mode,
            "delta": self.delta,
            "r": self.r,
            "circle": self.circle,
            "candidates": [str(p) for p in self.candidates],
            "diagram": str(self.diagram) if self.diagram else None,
        }


# ── Output helpers ────────────────────────────────────────────────────────────

def banner(title: str):
    print("=" * 70)
    print(f"  {title}")
    print("=" * 70)


def write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_summary(config: RunConfig, verdict: str, results: Dict) -> Path:
    path = write_json(config.out / "summary.json", {"config": config.to_dict(), "verdict": verdict, "results": results})
    print(f"\n  Summary: {path}")
    return path


def load_inputs(config: RunConfig) -> Tuple[GeodesicSpaceModel, SampleSet]:
    """The run's model and sample: a sample file, or a fresh sample of --model."""
    if config.sample is not None:
        model, sample = load_sample(config.sample)
        logger.info("loaded %d sample points from %s", len(sample), config.sample)
    elif config.model is not None:
        model = load_model(config.model)
        sample = sample_uniform(model, config.s, config.seed)
    else:
        raise ArgumentError(f"{config.command} needs --model or --sample")
    if config.enrich:
        sample = enrich_with_critical_points(model, sample, model.critical_circles())
    return model, sample


def rmax_for(config: RunConfig, model: GeodesicSpaceModel, s: float) -> float:
    return config.rmax if config.rmax is not None else default_rmax(model, s)


def catalogue_diagram(model: GeodesicSpaceModel, fp: FieldP) -> Optional[DecoratedDiagram]:
    try:
        return known_diagram(model, fp)
    except GeoPersistError:
        return None


# ══════════════════════════════════════════════════════════════════════════════
#  Subcommands
# ══════════════════════════════════════════════════════════════════════════════

def cmd_sample(config: RunConfig) -> int:
    banner("Sample")
    model, sample = load_inputs(config)
    resolution = config.resolution if config.resolution is not None else sample.claimed_density / 20
    certificate = verify_density(model, sample, sample.claimed_density, resolution)
    sample_path = save_sample(model, sample, config.out / "sample.json")
    write_json(config.out / "certificate.json", certificate.to_dict())

    print(f"  Model:      {model.model_id}")
    print(f"  Points:     {len(sample)}")
    print(f"  Enriched:   {', '.join(sample.enriched_circles) or 'no'}")
    print(f"  Max gap:    {certificate.max_gap_found:.6g} (s = {sample.claimed_density})")
    print(f"  Density:    {certificate.verdict}")
    print(f"  Written:    {sample_path}")
    write_summary(config, certificate.verdict, {"points": len(sample), "certificate": certificate.to_dict()})
    return EXIT_OK if certificate.passed else EXIT_PRECONDITION


def cmd_persist(config: RunConfig) -> int:
    banner("Persistence (H1, open Rips)")
    model, sample = load_inputs(config)
    fp = FieldP(config.field)
    rmax = rmax_for(config, model, sample.claimed_density)
    if len(sample) == 0:
        diagram = DecoratedDiagram(intervals=(), rmax=rmax, field=fp)
    else:
        filtration = build_filtration(restrict_metric(model, sample), rmax)
        save_skeleton(filtration, config.out / "skeleton.json")
        diagram = H1Reduction(filtration, fp).diagram
    save_diagram(diagram, config.out / "diagram.json")
    diagram_svg(diagram, config.out / "diagram.svg", s=sample.claimed_density,
                known=catalogue_diagram(model, fp))

    print(f"  Points:     {len(sample)}")
    print(f"  rmax:       {rmax:.6g}")
    print(f"  Intervals:  {len(diagram)} ({len(diagram.censored())} censored)")
    for bar in sorted(diagram.intervals, key=lambda bar: -bar.lifespan)[:10]:
        flag = "  [censored]" if bar.censored else ""
        print(f"    ({bar.birth:.6f}, {bar.death:.6f}]{flag}")
    write_summary(config, "pass", {"intervals": len(diagram), "censored": len(diagram.censored()), "rmax": rmax})
    return EXIT_OK


def cmd_verify_stability(config: RunConfig) -> int:
    banner("Stability check")
    fp = FieldP(config.field)
    if config.diagram is not None:
        model = load_model(config.model) if config.model else load_sample(config.sample)[0]
        diag_s = load_diagram(config.diagram)
        s = config.s
        enriched = None
    else:
        model, sample = load_inputs(config)
        s = sample.claimed_density
        rmax = rmax_for(config, model, s)
        diag_s = sample_reduction(model, sample, fp, rmax).diagram
        enriched_sample = enrich_with_critical_points(model, sample, model.critical_circles())
        enriched = sample_reduction(model, enriched_sample, fp, rmax).diagram
    report = verify_stability(known_diagram(model, fp), diag_s, s)
    write_json(config.out / "stability.json", report.to_dict())
    if enriched is not None:
        stability_figure(model, diag_s, enriched, s, config.out / "stability.svg")

    print(f"  s:          {s}")
    print(f"  Method:     {report.method}")
    print(f"  Matched:    {len(report.matching)}   diagonal: {len(report.diagonal)}")
    print(f"  Bottleneck: {report.measured.get('bottleneck')}")
    for v in report.violations:
        print(f"  ✗ condition {v['condition']}: {v['detail']}")
    print(f"  Verdict:    {report.verdict}")
    write_summary(config, report.verdict, report.to_dict())
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_verify_order(config: RunConfig) -> int:
    banner("Order comparison")
    if len(config.candidates) != 2:
        raise ArgumentError("verify-order needs exactly two --candidates sample files")
    fp = FieldP(config.field)
    (model, first), (other, second) = (load_sample(p) for p in config.candidates)
    if model.model_id != other.model_id:
        raise ArgumentError("candidate samples belong to different models")
    s = max(first.claimed_density, second.claimed_density)
    rmax = rmax_for(config, model, s)
    icp_a = build_icp(model, first, fp, r0=2 * s, rmax=rmax)
    icp_b = build_icp(model, second, fp, r0=2 * s, rmax=rmax)
    result = compare_order(icp_a, icp_b)
    write_json(config.out / "order.json", result.to_dict())

    print(f"  A:          {config.candidates[0]} (deaths {', '.join(f'{d:.6f}' for d in icp_a.deaths())})")
    print(f"  B:          {config.candidates[1]} (deaths {', '.join(f'{d:.6f}' for d in icp_b.deaths())})")
    print(f"  p:          {result.p:.6g}   grid points: {len(result.kernel_inclusions)}")
    print(f"  Verdict:    {result.verdict}")
    if not result.self_check:
        print("  ✗ kernel inclusion without sorted dominance")
    write_summary(config, result.verdict, result.to_dict())
    return EXIT_OK if result.self_check else EXIT_VERIFICATION


def cmd_verify_minimality(config: RunConfig) -> int:
    banner("Minimality check")
    fp = FieldP(config.field)
    if config.candidates:
        loaded = [load_sample(p) for p in config.candidates]
        model = loaded[0][0]
        if any(m.model_id != model.model_id for m, _ in loaded):
            raise ArgumentError("candidate samples belong to different models")
        candidates = [sample for _, sample in loaded]
    else:
        model = load_model(config.model) if config.model else load_sample(config.sample)[0]
        candidates = [sample_uniform(model, config.s, config.seed + k + 1) for k in range(DEFAULT_CANDIDATES)]
    base = sample_uniform(model, config.s, config.seed)
    enriched = enrich_with_critical_points(model, base, model.critical_circles())
    report = minimality_check(model, fp, config.s, candidates, enriched,
                              resolution=config.probe_resolution, rmax=rmax_for(config, model, config.s))
    write_json(config.out / "minimality.json", report.to_dict())

    print(f"  Known deaths:    {', '.join(f'{d:.6f}' for d in report.known_deaths)}")
    print(f"  Enriched deaths: {', '.join(f'{d:.6f}' for d in report.enriched_deaths)}")
    for c in report.candidates:
        if c["status"] == "excluded":
            print(f"    candidate {c['index']}: excluded (not {config.s}-dense)")
        else:
            print(f"    candidate {c['index']}: {c['verdict']}")
    verdict = "pass" if report.passed else "fail"
    print(f"  Verdict:    {verdict}")
    write_summary(config, verdict, report.to_dict())
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_nullhomotopy(config: RunConfig) -> int:
    banner(f"Nullhomotopy ({config.mode})")
    model, sample = load_inputs(config)
    circles = model.critical_circles()
    if config.circle is None:
        circle = circles[0]
    else:
        matches = [c for c in circles if c.label == config.circle]
        if not matches:
            raise ArgumentError(f"no circle {config.circle!r}; choose from {', '.join(c.label for c in circles)}")
        circle = matches[0]
    s = sample.claimed_density
    r = config.r if config.r is not None else circle.length / 3 + 3 * s
    dmatrix = restrict_metric(model, sample)
    nh = build_nullhomotopy(model, circle, sample, r, s, mode=config.mode, delta=config.delta, dmatrix=dmatrix)
    check = verify_nullhomotopy(nh, dmatrix, r)
    write_json(config.out / "nullhomotopy.json", {**nh.to_dict(), "check": check.to_dict()})

    print(f"  Circle:     {circle.label} (length {circle.length:.6g})")
    print(f"  r:          {r:.6g}   s: {s}")
    print(f"  Loop:       {len(nh.boundary)} vertices, {len(nh.triangles)} triangles")
    print(f"  Max diam:   {check.max_diameter:.6g}")
    if check.violation:
        print(f"  ✗ {check.violation}")
    print(f"  Verdict:    {'pass' if check.passed else 'fail'}")
    write_summary(config, "pass" if check.passed else "fail", check.to_dict())
    return EXIT_OK if check.passed else EXIT_VERIFICATION


def cmd_presentation(config: RunConfig) -> int:
    banner("Edge-path presentation")
    if config.r is None:
        raise ArgumentError("presentation needs --r")
    model, sample = load_inputs(config)
    fp = FieldP(config.field)
    filtration = build_filtration(restrict_metric(model, sample), config.r)
    complex2 = complex_at(filtration, config.r)
    raw = edge_path_presentation(complex2)
    pres = tietze_simplify(raw)
    text_path, _ = save_presentation(pres, config.out / "presentation")
    rank = abelianization_rank(pres, fp)

    print(f"  Complex:    {len(complex2.vertices)} vertices, {len(complex2.edges)} edges, {len(complex2.triangles)} triangles")
    print(f"  Raw:        {len(raw.generators)} generators, {len(raw.relators)} relators")
    print(f"  Simplified: {len(pres.generators)} generators, {len(pres.relators)} relators")
    print(f"  H1 rank:    {rank} over F_{fp.p}")
    print(f"  Written:    {text_path}")
    write_summary(config, "pass", {"generators": len(pres.generators), "relators": len(pres.relators),
                                   "abelianization_rank": rank})
    return EXIT_OK


HANDLERS = {
    "sample": cmd_sample,
    "persist": cmd_persist,
    "verify-stability": cmd_verify_stability,
    "verify-order": cmd_verify_order,
    "verify-minimality": cmd_verify_minimality,
    "nullhomotopy": cmd_nullhomotopy,
    "presentation": cmd_presentation,
}


# ── Command line ──────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geopersist", description="Intrinsic H1 persistence of sampled geodesic spaces.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--model", type=Path, help="model description JSON")
    parser.add_argument("--sample", type=Path, help="sample JSON (instead of sampling --model)")
    parser.add_argument("--s", type=float, default=DEFAULT_S, help=f"sample density (default {DEFAULT_S})")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--field", type=int, default=DEFAULT_FIELD, help="prime p of the coefficient field")
    parser.add_argument("--rmax", type=float, help="filtration horizon (default derived from the model)")
    parser.add_argument("--enrich", action="store_true", help="add three equidistant points on every critical circle")
    parser.add_argument("--out", type=Path, default=Path(DEFAULT_OUT))
    parser.add_argument("--resolution", type=float, help="density probe spacing (default s/20)")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--mode", default=DEFAULT_MODE, help="nullhomotopy mode: dense or equidistant")
    parser.add_argument("--delta", type=float, help="spacing of the circle sample (nullhomotopy)")
    parser.add_argument("--r", type=float, help="Rips parameter (nullhomotopy, presentation)")
    parser.add_argument("--circle", help="critical circle label, e.g. petal-1")
    parser.add_argument("--candidates", type=Path, nargs="+", default=[], help="sample files to compare")
    parser.add_argument("--diagram", type=Path, help="precomputed diagram JSON to verify")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        model=args.model,
        sample=args.sample,
        s=args.s,
        seed=args.seed,
        field=args.field,
        rmax=args.rmax,
        resolution=args.resolution,
        out=args.out,
        enrich=args.enrich,
        verbose=args.verbose,
        mode=args.mode,
        delta=args.delta,
        r=args.r,
        circle=args.circle,
        candidates=list(args.candidates),
        diagram=args.diagram,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args).validate()
        return HANDLERS[config.command](config)
    except GeoPersistError as err:
        print(f"\n  ✗ {type(err).__name__}: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
