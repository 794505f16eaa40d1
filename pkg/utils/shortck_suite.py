# utils/shortck_suite.py
"""
Scenario layer: the shift-like basin scenario with positive-coefficient P,
the Rosay-Rudin basin demo, and the coupling of a shift-like sequence to a
one-variable polynomial so that the forward Julia set inside the tube
N_C = {|z_2| < C} is controlled by the Julia set of p.

A Scenario is reproducible from its manifest sections alone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from core.config import get_config
from core.errors import PreconditionError, SequenceValidationError
from core.maps import (
    ExplicitList,
    Generator,
    MapSequence,
    PolySpec,
    RosayRudin,
    constant,
    theorem_family,
    validate_sequence,
)
from utils.artifacts import manifest_hash
from utils.basin import (
    BasinParams,
    Fate,
    FateGrid,
    SliceWindow,
    boundary_pixels,
    boundary_witness,
    classify_points,
    make_params,
    render_slice,
)
from utils.dimension import DimEstimate, boxdim_estimate, eps_schedule, hausdorff_distance
from utils.julia1d import GridSet, NestedSequence, Poly1, nested_sequence

log = logging.getLogger(__name__)

_DISCREPANCY_LOGGED = False


@dataclass(frozen=True)
class TubeSpec:
    C_tube: float
    delta: float
    R: float

    def __post_init__(self):
        if self.C_tube <= 0:
            raise PreconditionError(f"tube half-width must be positive, got {self.C_tube}")
        if self.delta <= 0 or self.R <= 0:
            raise PreconditionError("tube delta and R must be positive")
        if self.C_tube > self.R:
            raise PreconditionError(f"tube half-width {self.C_tube} exceeds R={self.R}")


@dataclass
class Scenario:
    name: str
    seq: MapSequence
    params: BasinParams
    windows: List[SliceWindow]
    plan: Dict[str, Any] = field(default_factory=dict)
    poly: Optional[Poly1] = None
    tube: Optional[TubeSpec] = None
    nested: Optional[NestedSequence] = None

    def manifest_sections(self) -> Dict[str, Dict[str, Any]]:
        sections: Dict[str, Dict[str, Any]] = {
            "scenario": {"name": self.name},
            "sequence": {"description": self.seq.describe()},
            "params": asdict(self.params),
            "windows": {f"window{i}": w.describe() for i, w in enumerate(self.windows)},
            "plan": dict(self.plan),
        }
        if self.poly is not None:
            sections["scenario"]["poly"] = self.poly.describe()
        if self.tube is not None:
            sections["tube"] = asdict(self.tube)
        if self.nested is not None:
            sections["nested"] = {"delta0": self.nested.delta0, "cprime": self.nested.cprimes()}
        return sections

    def content_hash(self) -> str:
        return manifest_hash(self.manifest_sections())


def _plan(resolution: int, extent: float) -> Dict[str, Any]:
    cfg = get_config()
    pixel = extent / resolution
    return {
        "resolution": resolution,
        "extent": extent,
        "eps": eps_schedule(pixel, cfg["eps_decades"], cfg["eps_count"]),
        "witness_budget": cfg["witness_budget"],
        "witness_eps_px": cfg["witness_eps_px"],
    }


# ---------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------

def build_theorem11_scenario(
    P: PolySpec,
    K: float,
    g: float,
    c: Optional[float] = None,
    n_max: Optional[int] = None,
    resolution: Optional[int] = None,
) -> Scenario:
    """Shift-like sequence with a_n = exp(-K g^n) and default slices through 0."""
    cfg = get_config()
    P.validate_positive()
    coeffs = Generator(K, g)
    n_max = int(n_max if n_max is not None else cfg["n_max"])
    report = validate_sequence(coeffs, n_max)
    if not report.ok:
        raise SequenceValidationError("; ".join(report.violations[:3]))
    seq = theorem_family(P, coeffs)
    params = make_params(seq, c=c, n_max=n_max)
    res = int(resolution if resolution is not None else cfg["resolution"])
    extent = float(cfg["slice_extent"])
    windows = [SliceWindow.real_plane(2, extent, res), SliceWindow.coordinate_plane(2, extent, res)]
    log.info("[suite] shift-like scenario K=%g g=%g c=%.4g n0=%d", K, g, params.c, params.n0)
    return Scenario("shiftlike", seq, params, windows, _plan(res, extent))


def build_rosay_rudin_scenario(m: int = 0, c: float = 0.1, n_max: Optional[int] = None,
                               resolution: Optional[int] = None) -> Scenario:
    """Autonomous basin of the Rosay-Rudin map at its fixed point (2 m pi i, 0), shifted to 0."""
    cfg = get_config()
    seq = constant(RosayRudin(m))
    params = make_params(seq, c=c, n_max=n_max)
    res = int(resolution if resolution is not None else cfg["resolution"])
    extent = 2.0 * float(cfg["slice_extent"])
    windows = [SliceWindow.real_plane(2, extent, res), SliceWindow.coordinate_plane(2, extent, res)]
    return Scenario(f"rosay_rudin_m{m}", seq, params, windows, _plan(res, extent))


# ---------------------------------------------------------------------
# Coupling to one-variable dynamics
# ---------------------------------------------------------------------

def quotient_poly(p: Poly1) -> PolySpec:
    """q with p(z) = z^2 q(z); q must have real non-negative coefficients and q(0) > 0."""
    if abs(p.coeffs[0]) > 0 or abs(p.coeffs[1]) > 0:
        raise PreconditionError("coupling needs p(0) = p'(0) = 0")
    if any(abs(c.imag) > 0 for c in p.coeffs):
        raise PreconditionError("coupling needs real coefficients")
    q = PolySpec(tuple(c.real for c in p.coeffs[2:]))
    q.validate_positive()
    return q


def julia_frame(resolution: Optional[int] = None) -> Tuple[Tuple[complex, float, float], int]:
    cfg = get_config()
    extent = float(cfg["slice_extent"])
    return (0j, extent, extent), int(resolution if resolution is not None else cfg["resolution"])


def couple_sequence_to_julia(
    p: Poly1,
    tube: TubeSpec,
    n_max: int,
    nested: Optional[NestedSequence] = None,
    K: Optional[float] = None,
    g: Optional[float] = None,
    resolution: Optional[int] = None,
) -> ExplicitList:
    """
    log a_n = min(-K g^n, 2 log a_(n-1) - ln 2, log(safety * c'_(n+1) / R)),
    continued by the generator tail once the margins run out.
    """
    global _DISCREPANCY_LOGGED
    cfg = get_config()
    K = float(K if K is not None else cfg["generator_K"])
    g = float(g if g is not None else cfg["generator_g"])
    safety = float(cfg["coupling_safety"])
    if nested is None:
        rect, res = julia_frame(resolution)
        nested = nested_sequence(p, tube.delta, n_max, rect, res)
    margins = nested.cprimes()
    if not margins:
        raise PreconditionError("nested sequence produced no margins; cannot couple")
    if not _DISCREPANCY_LOGGED:
        log.info("[suite] coupling uses a_n < min(a_(n-1)^2, c_n); the cube/max variant is not used")
        _DISCREPANCY_LOGGED = True
    logs: List[float] = []
    for n in range(min(n_max + 1, len(margins))):
        v = -K * g ** n
        if logs:
            v = min(v, 2.0 * logs[-1] - math.log(2.0))
        v = min(v, math.log(safety * margins[n] / tube.R))
        logs.append(v)
    if len(margins) < n_max + 1:
        log.warning("[suite] margins end at n=%d; generator tail takes over", len(margins))
    return ExplicitList(tuple(logs), tail=Generator(K, g))


def build_coupled_scenario(
    p: Poly1,
    tube: TubeSpec,
    n_max: Optional[int] = None,
    resolution: Optional[int] = None,
) -> Scenario:
    """Shift-like S_n with P = q (p = z^2 q) and coefficients coupled to the Julia margins of p."""
    cfg = get_config()
    n_max = int(n_max if n_max is not None else cfg["n_max"])
    q = quotient_poly(p)
    rect, res = julia_frame(resolution)
    nested = nested_sequence(p, tube.delta, n_max, rect, res)
    coeffs = couple_sequence_to_julia(p, tube, n_max, nested=nested)
    report = validate_sequence(coeffs, n_max)
    if not report.ok:
        raise SequenceValidationError("; ".join(report.violations[:3]))
    seq = theorem_family(q, coeffs)
    params = make_params(seq, n_max=n_max)
    extent = rect[1]
    window = SliceWindow.coordinate_plane(2, extent, res)
    return Scenario("coupled", seq, params, [window], _plan(res, extent), poly=p, tube=tube, nested=nested)


def sample_tube(scenario: Scenario, count: int, rng: np.random.Generator, side: str = "compact") -> np.ndarray:
    """Points (z_1, z_2) with z_1 on the compact or unbounded side of p^-1(J(delta)) and |z_2| < C."""
    if scenario.nested is None or scenario.tube is None:
        raise PreconditionError("tube sampling needs a coupled scenario")
    if side not in ("compact", "unbounded"):
        raise PreconditionError(f"unknown tube side '{side}'")
    region = scenario.nested.C0 if side == "compact" else scenario.nested.E0
    pts = region.points()
    if pts.size == 0:
        raise PreconditionError(f"{side} component is empty")
    z1 = pts[rng.integers(0, pts.size, count)]
    rad = scenario.tube.C_tube * (1.0 - 1e-9) * np.sqrt(rng.random(count))
    z2 = rad * np.exp(2j * np.pi * rng.random(count))
    return np.vstack([z1, z2])


@dataclass
class TubeReport:
    ok: bool
    compact_attracted: int
    compact_total: int
    unbounded_escaped: int
    unbounded_total: int


def tube_test(scenario: Scenario, count: int, rng: np.random.Generator) -> TubeReport:
    compact = sample_tube(scenario, count, rng, "compact")
    unbounded = sample_tube(scenario, count, rng, "unbounded")
    c_codes, _ = classify_points(scenario.seq, compact, scenario.params)
    u_codes, _ = classify_points(scenario.seq, unbounded, scenario.params)
    att = int((c_codes == int(Fate.ATTRACTED)).sum())
    esc = int((u_codes == int(Fate.ESCAPED)).sum())
    report = TubeReport(att == count and esc == count, att, count, esc, count)
    log.info("[suite] tube test: %d/%d attracted, %d/%d escaped", att, count, esc, count)
    return report


# ---------------------------------------------------------------------
# J+ measurement
# ---------------------------------------------------------------------

@dataclass
class JPlusReport:
    ok: bool
    boundary_count: int
    dimension: Optional[DimEstimate]
    d_one_sided: float
    d_hausdorff: float
    tube_bound: float
    witness_rate: float
    witnesses_tried: int
    flags: List[str] = field(default_factory=list)
    grid: Optional[FateGrid] = None
    boundary: Optional[GridSet] = None

    def summary(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "boundary_count": self.boundary_count,
            "boxdim": self.dimension.slope if self.dimension else "none",
            "boxdim_r2": self.dimension.r2 if self.dimension else "none",
            "d_one_sided": self.d_one_sided,
            "d_hausdorff": self.d_hausdorff,
            "tube_bound": self.tube_bound,
            "witness_rate": self.witness_rate,
            "witnesses_tried": self.witnesses_tried,
            "flags": list(self.flags),
        }


def u_tube(scenario: Scenario) -> GridSet:
    """Slice of U: z_1 outside both the compact and the unbounded component."""
    nested = scenario.nested
    return (nested.C0 | nested.E0).complement()


def measure_jplus(
    scenario: Scenario,
    tube: TubeSpec,
    eps_list: Optional[Sequence[float]] = None,
    witness_count: int = 100,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> JPlusReport:
    """Boundary raster of the z_2 = 0 slice: tube containment, box dimension and witnesses."""
    if scenario.nested is None:
        raise PreconditionError("J+ measurement needs a coupled scenario")
    cfg = get_config()
    rng = rng if rng is not None else np.random.default_rng(cfg["seed"])
    U = u_tube(scenario)
    nx, ny = U.resolution
    window = SliceWindow.coordinate_plane(2, U.width, nx)
    grid = render_slice(scenario.seq, window, scenario.params, threads)
    boundary = boundary_pixels(grid)
    flags: List[str] = []
    px = max(U.pixel)

    if boundary.is_empty():
        flags.append("no boundary pixels")
        return JPlusReport(False, 0, None, math.inf, math.inf, tube.delta + 2 * px, 0.0, 0, flags, grid, boundary)

    dy, dx = U.pixel[1], U.pixel[0]
    to_u = ndimage.distance_transform_edt(~U.bits, sampling=(dy, dx))
    d_one = float(to_u[boundary.bits].max())
    d_h = hausdorff_distance(boundary, U) if not U.is_empty() else math.inf
    bound = tube.delta + 2.0 * px

    dim = None
    if boundary.count() < 16:
        flags.append("too few boundary pixels for regression")
    else:
        eps_list = list(eps_list) if eps_list is not None else scenario.plan["eps"]
        try:
            dim = boxdim_estimate(boundary, eps_list, threads)
            if dim.flagged:
                flags.extend(dim.notes)
        except PreconditionError as exc:
            flags.append(str(exc))

    pts = boundary.points()
    take = min(witness_count, pts.size)
    chosen = pts[rng.choice(pts.size, size=take, replace=False)]
    eps = float(cfg["witness_eps_px"]) * px
    budget = int(cfg["witness_budget"])
    wins = sum(
        boundary_witness(scenario.seq, (z1, 0j), eps, budget, scenario.params, rng).ok for z1 in chosen
    )
    rate = wins / take if take else 0.0
    ok = d_one <= bound and rate >= 0.95
    report = JPlusReport(ok, boundary.count(), dim, d_one, d_h, bound, rate, take, flags, grid, boundary)
    log.info("[suite] J+ slice: %d boundary px, d=%.4g (bound %.4g), witness rate %.3f",
             report.boundary_count, d_one, bound, rate)
    return report
