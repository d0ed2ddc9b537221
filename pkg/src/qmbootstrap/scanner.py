"""Feasibility scans over grids of initial data.

A scan fixes a potential and a matrix kind, walks a rectangular grid of
initial-data values (energy first, then any free moments, in schema order),
and records the positivity verdict at every point. Feasible points cluster in
islands around the true bound-state data; islands shrink onto the spectrum as
the matrix depth grows. Extraction labels islands by ascending energy, and
optional bisection sharpens island faces well below the grid step.

Parallelism is opt-in through the BOOTSTRAP_WORKERS environment variable.
Results are merged back in grid order, so the output is identical for any
worker count.
"""

from __future__ import annotations

import itertools
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import (
    BadParameter,
    MissingInitial,
    NumericalFailure,
    Overflow,
    UnknownInitialData,
    UnsupportedFamily,
)
from .feasibility import is_feasible
from .matrices import ONE_OP_KINDS, MatrixKind, build_matrix
from .potentials import ValidatedPotential
from .recursion import MAX_DEPTH, gen_one_var, gen_two_var, initial_from_values

WORKERS_ENV = "BOOTSTRAP_WORKERS"

# Refined bound marker for an island face that touches the scan window.
GRID_EDGE = "unbounded at grid edge"


@dataclass(frozen=True)
class ScanAxis:
    """One grid dimension: values lo, lo + step, ... up to hi inclusive."""

    name: str
    lo: float
    hi: float
    step: float

    def values(self) -> list[float]:
        for label, v in (("lo", self.lo), ("hi", self.hi), ("step", self.step)):
            if not math.isfinite(v):
                raise BadParameter(f"axis {self.name}: {label} must be finite")
        if self.step <= 0:
            raise BadParameter(f"axis {self.name}: step must be positive")
        if self.hi < self.lo:
            raise BadParameter(f"axis {self.name}: hi must not be below lo")
        # Tolerate float fuzz in (hi - lo) / step so designed endpoints are kept.
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-6)) + 1
        return [self.lo + i * self.step for i in range(count)]


@dataclass(frozen=True)
class ScanConfig:
    potential: ValidatedPotential
    matrix_kind: MatrixKind
    depth: int
    axes: tuple[ScanAxis, ...]
    tol: float = 1e-9          # relative PSD tolerance
    refine: bool = False       # bisect island faces after the grid pass
    max_refine_iters: int = 25


@dataclass
class ScanPoint:
    coords: tuple[float, ...]
    min_eigenvalue: float | None
    feasible: bool
    error: str = ""  # exception class name when the point could not be evaluated


@dataclass
class Island:
    label: int                                 # 0-based ordinal, ascending energy
    point_indices: tuple[int, ...]             # flat grid indices, sorted
    bounds: dict[str, tuple[float, float]]     # grid-resolution bounding box
    multi_level: bool = False                  # anomalously wide along energy
    refined: dict[str, tuple] | None = None    # set by refine_boundary


@dataclass
class FeasibleRegion:
    axes: tuple[ScanAxis, ...]
    shape: tuple[int, ...]
    points: list[ScanPoint]
    islands: list[Island]


def _validate_config(cfg: ScanConfig) -> None:
    pot = cfg.potential
    if not pot.scan_enabled:
        raise UnsupportedFamily(
            f"{pot.family.value} cannot be scanned: its recursion does not determine the "
            "moments from finitely many unknowns, so only residual verification is offered"
        )
    if cfg.matrix_kind not in pot.matrix_kinds:
        allowed = ", ".join(k.value for k in pot.matrix_kinds)
        raise BadParameter(
            f"{cfg.matrix_kind.value} is not available for {pot.family.value} (allowed: {allowed})"
        )
    if not 0 <= cfg.depth <= MAX_DEPTH:
        raise BadParameter(f"depth must lie in 0..{MAX_DEPTH}, got {cfg.depth}")
    if cfg.tol < 0:
        raise BadParameter("tol must be nonnegative")
    if not cfg.axes:
        raise BadParameter("at least one scan axis is required")
    names = tuple(ax.name for ax in cfg.axes)
    for name in names:
        if name not in pot.free_names:
            raise UnknownInitialData(
                f"axis {name!r} is not free initial data for {pot.family.value} "
                f"(expected {list(pot.free_names)})"
            )
    for name in pot.free_names:
        if name not in names:
            raise MissingInitial(f"no axis for required initial data {name!r}")
    if names != pot.free_names:
        raise BadParameter(
            f"axes must follow the schema order {list(pot.free_names)}, got {list(names)}"
        )


def evaluate_point(cfg: ScanConfig, coords: tuple[float, ...]) -> ScanPoint:
    """Generate the table, build the matrix, and test positivity at one point.

    Overflow and NumericalFailure are per-point conditions (they depend on the
    trial values) and come back as error records; anything else indicates a
    misconfigured scan and propagates.
    """
    values = {ax.name: c for ax, c in zip(cfg.axes, coords)}
    try:
        init = initial_from_values(cfg.potential, values)
        if cfg.matrix_kind in ONE_OP_KINDS:
            table = gen_one_var(cfg.potential, init, max_index=2 * cfg.depth)
        else:
            table = gen_two_var(cfg.potential, init, cfg.depth)
        matrix = build_matrix(table, cfg.matrix_kind, cfg.depth)
        verdict = is_feasible(matrix, cfg.tol)
    except (Overflow, NumericalFailure) as exc:
        return ScanPoint(coords=coords, min_eigenvalue=None, feasible=False,
                         error=type(exc).__name__)
    return ScanPoint(coords=coords, min_eigenvalue=verdict.min_eigenvalue,
                     feasible=verdict.feasible)


def _point_task(args) -> ScanPoint:
    cfg, coords = args
    return evaluate_point(cfg, coords)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise BadParameter(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, workers)


def run_scan(cfg: ScanConfig) -> FeasibleRegion:
    """Evaluate the full grid and extract labeled feasible islands.

    Grid order is row-major with the first axis slowest. With refine=True the
    island faces are bisected afterwards (serially; bisection is inherently
    sequential) and the results attached to each island.
    """
    _validate_config(cfg)
    axis_values = [ax.values() for ax in cfg.axes]
    shape = tuple(len(v) for v in axis_values)
    coords_list = [tuple(c) for c in itertools.product(*axis_values)]

    workers = _worker_count()
    if workers > 1 and len(coords_list) > 1:
        chunk = max(1, len(coords_list) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_point_task, [(cfg, c) for c in coords_list],
                                   chunksize=chunk))
    else:
        points = [evaluate_point(cfg, c) for c in coords_list]

    islands = extract_islands(points, shape, cfg.axes)
    region = FeasibleRegion(axes=cfg.axes, shape=shape, points=points, islands=islands)
    if cfg.refine:
        for island in islands:
            island.refined = refine_boundary(cfg, region, island)
    return region


def _strides(shape: tuple[int, ...]) -> tuple[int, ...]:
    strides = [1] * len(shape)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    return tuple(strides)


def extract_islands(points: list[ScanPoint], shape: tuple[int, ...],
                    axes: tuple[ScanAxis, ...]) -> list[Island]:
    """Connected components of the feasible set, axis-aligned adjacency.

    Components are labeled 0, 1, ... by ascending minimum along the first
    (energy) axis. The labels are component ordinals, not level assignments:
    components much wider in energy than is typical for the region are
    flagged multi_level, since at coarse grid steps the islands of several
    closely spaced levels can fuse into one.
    """
    n = len(points)
    if n != math.prod(shape):
        raise BadParameter("points length does not match grid shape")
    strides = _strides(shape)
    feasible = [p.feasible for p in points]
    visited = [False] * n
    components: list[list[int]] = []
    for start in range(n):
        if not feasible[start] or visited[start]:
            continue
        visited[start] = True
        stack = [start]
        members = []
        while stack:
            idx = stack.pop()
            members.append(idx)
            for axis, stride in enumerate(strides):
                pos = (idx // stride) % shape[axis]
                for delta in (-1, 1):
                    if 0 <= pos + delta < shape[axis]:
                        nidx = idx + delta * stride
                        if feasible[nidx] and not visited[nidx]:
                            visited[nidx] = True
                            stack.append(nidx)
        members.sort()
        components.append(members)

    components.sort(key=lambda m: (min(points[i].coords[0] for i in m), m[0]))
    islands = []
    for label, members in enumerate(components):
        bounds = {}
        for a, ax in enumerate(axes):
            vals = [points[i].coords[a] for i in members]
            bounds[ax.name] = (min(vals), max(vals))
        islands.append(Island(label=label, point_indices=tuple(members), bounds=bounds))

    if islands:
        e_name = axes[0].name
        widths = [isl.bounds[e_name][1] - isl.bounds[e_name][0] for isl in islands]
        median = statistics.median(widths)
        if median > 0:
            for isl, width in zip(islands, widths):
                isl.multi_level = width > 10 * median
    return islands


def _extreme_member(points: list[ScanPoint], members: tuple[int, ...],
                    stride: int, extent: int, side: int) -> int:
    """Member with the extreme grid position along one axis; ties break on the
    smallest flat index for determinism."""
    positions = {i: (i // stride) % extent for i in members}
    target = max(positions.values()) if side > 0 else min(positions.values())
    return min(i for i in members if positions[i] == target)


def refine_boundary(cfg: ScanConfig, region: FeasibleRegion,
                    island: Island) -> dict[str, tuple]:
    """Bisect each island face toward the true feasibility boundary.

    For every axis and side, the bracket runs from the island's extreme
    feasible point to its infeasible outward grid neighbor; up to
    max_refine_iters bisections narrow it with the other coordinates held
    fixed. A face on the scan window itself gets the marker string
    "unbounded at grid edge". If a probe fails numerically the bracket stops
    where it is, which can only leave the bound conservative.
    """
    axis_values = [ax.values() for ax in region.axes]
    strides = _strides(region.shape)
    out: dict[str, tuple] = {}
    for a, ax in enumerate(region.axes):
        side_bounds = []
        for side in (-1, 1):
            best = _extreme_member(region.points, island.point_indices,
                                   strides[a], region.shape[a], side)
            pos = (best // strides[a]) % region.shape[a]
            outward = pos + side
            if outward < 0 or outward >= region.shape[a]:
                side_bounds.append(GRID_EDGE)
                continue
            coords = list(region.points[best].coords)
            inside = coords[a]
            outside = axis_values[a][outward]
            for _ in range(cfg.max_refine_iters):
                mid = 0.5 * (inside + outside)
                coords[a] = mid
                probe = evaluate_point(cfg, tuple(coords))
                if probe.error:
                    break
                if probe.feasible:
                    inside = mid
                else:
                    outside = mid
            side_bounds.append(0.5 * (inside + outside))
        out[ax.name] = tuple(side_bounds)
    return out
