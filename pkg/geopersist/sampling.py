#!/usr/bin/env python3
"""
Finite s-dense samples of a model.

A sample always starts with the basepoint. Points are laid out along each
chart of the model at a spacing strictly below s(1 - margin) whenever that
is compatible with at least one point per s of length, optionally jittered,
then deduplicated. Density is certified by probing a fine grid over every
chart; the certificate is exact up to one probe step.
"""

# ── Imports ───────────────────────────────────────────────────────────────────

import itertools
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ArgumentError, DomainError, ModelFileError, ValidationError
from spaces import CriticalCircleFeature, GeodesicSpaceModel, SpacePoint, model_from_dict

logger = logging.getLogger(__name__)

# ── Configuration ─────────────────────────────────────────────────────────────

DENSITY_MARGIN = 0.05
DEDUP_TOLERANCE = 1e-12
PROBE_BLOCK = 2048
THREADS_ENV = "GEOPERSIST_THREADS"


def thread_count() -> int:
    """Worker cap from GEOPERSIST_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SampleSet:
    """A finite subset of a model; points[0] is the basepoint."""

    model_id: str
    points: Tuple[SpacePoint, ...]
    claimed_density: float
    seed: int = 0
    enriched_circles: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self, model: GeodesicSpaceModel) -> Dict:
        return {
            "model": model.to_dict(),
            "model_id": self.model_id,
            "points": [p.to_list() for p in self.points],
            "s": self.claimed_density,
            "seed": self.seed,
            "enriched_circles": list(self.enriched_circles),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> Tuple[GeodesicSpaceModel, "SampleSet"]:
        try:
            model = model_from_dict(data["model"])
            points = tuple(model.point_from_list(coords) for coords in data["points"])
            sample = cls(
                model_id=model.model_id,
                points=points,
                claimed_density=float(data["s"]),
                seed=int(data.get("seed", 0)),
                enriched_circles=tuple(data.get("enriched_circles", ())),
            )
        except (KeyError, TypeError) as err:
            raise ModelFileError(f"malformed sample description: {err}")
        if data.get("model_id", model.model_id) != model.model_id:
            raise ModelFileError("sample model_id does not match its embedded model")
        return model, sample


@dataclass(frozen=True)
class DensityCertificate:
    """Result of probing the cover condition; pass iff max_gap_found < s."""

    s: float
    probe_resolution: float
    max_gap_found: float
    worst_probe: Tuple[float, ...] = ()

    @property
    def passed(self) -> bool:
        return self.max_gap_found < self.s

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> Dict:
        return {
            "s": self.s,
            "probe_resolution": self.probe_resolution,
            "max_gap_found": self.max_gap_found,
            "worst_probe": list(self.worst_probe),
            "verdict": self.verdict,
        }


@dataclass
class DistanceMatrix:
    """The restriction of the model metric to a sample."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError(f"distance matrix must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("distance matrix has non-finite entries")
        if np.any(entries < 0):
            raise ValidationError("distance matrix has negative entries")
        if not np.array_equal(entries, entries.T):
            raise ValidationError("distance matrix is not symmetric")
        if np.any(np.diag(entries) != 0):
            raise ValidationError("distance matrix has a nonzero diagonal")
        self.entries = entries

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, index):
        return self.entries[index]


# ── Helpers ───────────────────────────────────────────────────────────────────

def grid_count(length: float, s: float) -> int:
    """
    Number of grid steps along a parameter of the given length.

    Spacing stays strictly below s and, when possible, at most s(1 - margin).
    """
    n = max(int(math.floor(length / (s * (1 - DENSITY_MARGIN)))), int(math.floor(length / s)) + 1)
    # floor() can land one short when length/s is an integer up to rounding.
    while length / n >= s:
        n += 1
    return n


def _chart_axes(lengths, periodic, count_for) -> List[np.ndarray]:
    axes = []
    for length, wraps in zip(lengths, periodic):
        n = count_for(length)
        steps = np.arange(n) if wraps else np.arange(n + 1)
        axes.append(steps * (length / n))
    return axes


def _append_distinct(model: GeodesicSpaceModel, existing: List[SpacePoint], candidates: List[SpacePoint]) -> List[SpacePoint]:
    """Candidates farther than the dedup tolerance from existing points and from each other."""
    if not candidates:
        return []
    if existing:
        gap = model.pairwise_distances(candidates, existing).min(axis=1)
        candidates = [c for c, g in zip(candidates, gap) if g >= DEDUP_TOLERANCE]
    if not candidates:
        return []
    among = model.pairwise_distances(candidates, candidates)
    kept: List[int] = []
    for i in range(len(candidates)):
        if not kept or among[i, kept].min() >= DEDUP_TOLERANCE:
            kept.append(i)
    return [candidates[i] for i in kept]


def _min_distances(model: GeodesicSpaceModel, probes: List[SpacePoint], points: Sequence[SpacePoint]) -> np.ndarray:
    """Distance from each probe to its nearest point, in row blocks."""
    blocks = [probes[i:i + PROBE_BLOCK] for i in range(0, len(probes), PROBE_BLOCK)]

    def nearest(block):
        return model.pairwise_distances(block, list(points)).min(axis=1)

    workers = thread_count()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(nearest, blocks))
    else:
        parts = [nearest(block) for block in blocks]
    return np.concatenate(parts) if parts else np.zeros(0)


# ── Operations ────────────────────────────────────────────────────────────────

def sample_uniform(model: GeodesicSpaceModel, s: float, seed: int = 0, jitter: bool = True) -> SampleSet:
    """
    Lay points along every chart at spacing below s, perturbed by at most
    s * margin / 2 when `jitter` is set. The basepoint is always points[0].

    Args:
        model: The space to sample.
        s: Claimed density (strict cover radius).
        seed: Seed for the jitter generator.
        jitter: Perturb grid positions uniformly along their chart.

    Returns:
        SampleSet with claimed_density s.
    """
    if not s > 0 or not math.isfinite(s):
        raise ArgumentError(f"density s must be positive, got {s}")
    rng = np.random.default_rng(seed)
    amplitude = s * DENSITY_MARGIN / 2
    points = [model.basepoint]

    for chart in model.charts():
        axes = _chart_axes(chart.lengths, chart.periodic, lambda length: grid_count(length, s))
        grid = np.array(list(itertools.product(*axes)), dtype=float)
        if jitter:
            grid = grid + rng.uniform(-amplitude, amplitude, size=grid.shape)
        for d, (length, wraps) in enumerate(zip(chart.lengths, chart.periodic)):
            if not wraps:
                grid[:, d] = np.clip(grid[:, d], 0.0, length)
        candidates = [chart.to_point(tuple(row)) for row in grid]
        points.extend(_append_distinct(model, points, candidates))
        logger.debug("chart %s: %d grid positions, %d points so far", chart.label, len(grid), len(points))

    return SampleSet(model_id=model.model_id, points=tuple(points), claimed_density=float(s), seed=int(seed))


def verify_density(model: GeodesicSpaceModel, sample: SampleSet, s: float, resolution: float) -> DensityCertificate:
    """
    Probe the cover condition on a grid of spacing at most `resolution`.

    The measured gap underestimates the true covering radius by at most one
    probe step.
    """
    if sample.model_id != model.model_id:
        raise DomainError("sample belongs to a different model")
    if not 0 < resolution <= s / 10 + 1e-15:
        raise ArgumentError(f"probe resolution must lie in (0, s/10], got {resolution} for s={s}")

    probes: List[SpacePoint] = []
    for chart in model.charts():
        axes = _chart_axes(chart.lengths, chart.periodic, lambda length: int(math.ceil(length / resolution)))
        probes.extend(chart.to_point(tuple(row)) for row in itertools.product(*axes))
    if not probes:
        probes = [model.basepoint]

    gaps = _min_distances(model, probes, sample.points)
    worst = int(np.argmax(gaps))
    certificate = DensityCertificate(
        s=float(s),
        probe_resolution=float(resolution),
        max_gap_found=float(gaps[worst]),
        worst_probe=tuple(probes[worst].coords),
    )
    logger.debug("density probe: %d probes, max gap %.6g (%s)", len(probes), certificate.max_gap_found, certificate.verdict)
    return certificate


def effective_density(certificate: DensityCertificate) -> float:
    """The measured covering radius g; bonding maps are onto for p above 2g."""
    return certificate.max_gap_found


def enrich_with_critical_points(model: GeodesicSpaceModel, sample: SampleSet,
                                circles: Sequence[CriticalCircleFeature]) -> SampleSet:
    """Add three equidistant points on each circle, skipping duplicates."""
    if sample.model_id != model.model_id:
        raise DomainError("sample belongs to a different model")
    points = list(sample.points)
    labels = list(sample.enriched_circles)
    for circle in circles:
        if circle.model_id != sample.model_id:
            raise DomainError(f"circle {circle.label} belongs to model {circle.model_id}")
        triple = [circle.parametrize(k * circle.length / 3) for k in range(3)]
        added = _append_distinct(model, points, triple)
        points.extend(added)
        if circle.label not in labels:
            labels.append(circle.label)
        logger.debug("enriched circle %s (length %g): %d new points", circle.label, circle.length, len(added))
    return SampleSet(
        model_id=sample.model_id,
        points=tuple(points),
        claimed_density=sample.claimed_density,
        seed=sample.seed,
        enriched_circles=tuple(labels),
    )


def union(model: GeodesicSpaceModel, first: SampleSet, second: SampleSet) -> SampleSet:
    """The union of two samples; keeps the order of `first` then new points of `second`."""
    if first.model_id != model.model_id or second.model_id != model.model_id:
        raise DomainError("samples belong to a different model")
    points = list(first.points)
    points.extend(_append_distinct(model, points, list(second.points)))
    labels = tuple(dict.fromkeys(first.enriched_circles + second.enriched_circles))
    return SampleSet(
        model_id=model.model_id,
        points=tuple(points),
        claimed_density=min(first.claimed_density, second.claimed_density),
        seed=first.seed,
        enriched_circles=labels,
    )


def restrict_metric(model: GeodesicSpaceModel, sample: SampleSet) -> DistanceMatrix:
    """Model distances between sample points, mirrored from the upper triangle."""
    if sample.model_id != model.model_id:
        raise DomainError("sample belongs to a different model")
    if not sample.points:
        raise ArgumentError("cannot restrict the metric to an empty sample")
    table = model.pairwise_distances(list(sample.points), list(sample.points))
    upper = np.triu(table, k=1)
    return DistanceMatrix(upper + upper.T)


def required_density(model: GeodesicSpaceModel, r: float) -> float:
    """
    Density (r - c)/2 under which H1 of the sample's Rips complex at r matches
    the space's, with c the largest critical value below r (r/2 if none).
    """
    from spaces import known_diagram

    deaths = [bar.death for bar in known_diagram(model).intervals if bar.death < r]
    c = max(deaths) if deaths else r / 2
    return (r - c) / 2


# ── Files ─────────────────────────────────────────────────────────────────────

def save_sample(model: GeodesicSpaceModel, sample: SampleSet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(sample.to_dict(model), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_sample(path) -> Tuple[GeodesicSpaceModel, SampleSet]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ModelFileError(f"cannot read sample file {path}: {err}")
    return SampleSet.from_dict(data)


def export_matrix_csv(dmatrix: DistanceMatrix, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, dmatrix.entries, delimiter=",", fmt="%.17g")
    return path
