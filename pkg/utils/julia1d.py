# utils/julia1d.py
"""
One-variable polynomial dynamics on rasters: Julia set approximations,
delta-neighbourhoods, critical-orbit probes and the nested compact sets
C_n = dilate(p(C_(n-1)), delta_n) whose margins bound admissible
perturbations.

Rasters are GridSet values: bits[row, col] with row 0 at the lowest
imaginary part. Image writers flip rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from core.config import get_config
from core.errors import PreconditionError

log = logging.getLogger(__name__)

Resolution = Union[int, Tuple[int, int]]

_NEIGHBOURS = np.ones((3, 3), dtype=bool)


# ---------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class Poly1:
    """p(z) = sum coeffs[i] z^i, complex coefficients, degree >= 2."""

    coeffs: Tuple[complex, ...]

    def __post_init__(self):
        coeffs = [complex(c) for c in self.coeffs]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 3:
            raise PreconditionError(f"polynomial degree must be >= 2, got coefficients {self.coeffs}")
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def quartic_family(cls, a: float, b: float) -> "Poly1":
        """a z^4 + b z^3 + z^2."""
        return cls((0.0, 0.0, 1.0, b, a))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.full_like(z, self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        d = [i * c for i, c in enumerate(self.coeffs)][1:]
        acc = np.full_like(z, d[-1])
        for c in reversed(d[:-1]):
            acc = acc * z + c
        return acc

    def critical_points(self) -> np.ndarray:
        d = [i * c for i, c in enumerate(self.coeffs)][1:]
        return np.roots(d[::-1]).astype(complex)

    def fixed_points(self) -> np.ndarray:
        shifted = list(self.coeffs)
        shifted[1] -= 1.0
        return np.roots(shifted[::-1]).astype(complex)

    def escape_radius(self, floor: float = 2.0) -> float:
        """Power of two R >= floor with |p(z)| >= 2|z| whenever |z| >= R."""
        lead = abs(self.coeffs[-1])
        R = 1.0
        while R < floor:
            R *= 2.0
        while lead * R ** self.degree - sum(abs(c) * R ** i for i, c in enumerate(self.coeffs[:-1])) < 2.0 * R:
            R *= 2.0
        return R

    def describe(self) -> Dict[str, Any]:
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}


def attracting_fixed_point(p: Poly1) -> Optional[complex]:
    """The attracting fixed point of p nearest the origin, if any."""
    fps = [t for t in p.fixed_points() if abs(complex(p.derivative(t))) < 1.0]
    if not fps:
        return None
    return complex(min(fps, key=abs))


def attraction_radius(p: Poly1, t: complex, samples: int = 64) -> Optional[float]:
    """Largest r in 0.5 * 2^-j whose sampled circle images land inside D(t; r)."""
    theta = 2.0 * np.pi * np.arange(samples) / samples
    r = 0.5
    for _ in range(40):
        ring = t + r * np.exp(1j * theta)
        inner = t + 0.5 * r * np.exp(1j * theta)
        if np.all(np.abs(p(ring) - t) < r) and np.all(np.abs(p(inner) - t) < r):
            return r
        r *= 0.5
    return None


# ---------------------------------------------------------------------
# Grid sets
# ---------------------------------------------------------------------

@dataclass
class GridSet:
    """Boolean raster over the rectangle center +- (width/2, height/2)."""

    center: complex
    width: float
    height: float
    bits: np.ndarray
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.center = complex(self.center)
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2:
            raise PreconditionError("GridSet bits must be a 2-D array")

    @classmethod
    def empty(cls, center: complex, width: float, height: float, res: Resolution) -> "GridSet":
        nx, ny = _resolution(res)
        return cls(center, width, height, np.zeros((ny, nx), dtype=bool))

    @property
    def resolution(self) -> Tuple[int, int]:
        ny, nx = self.bits.shape
        return nx, ny

    @property
    def pixel(self) -> Tuple[float, float]:
        nx, ny = self.resolution
        return self.width / nx, self.height / ny

    @property
    def pixel_diagonal(self) -> float:
        return math.hypot(*self.pixel)

    def centers(self) -> np.ndarray:
        nx, ny = self.resolution
        dx, dy = self.pixel
        xs = self.center.real - self.width / 2 + (np.arange(nx) + 0.5) * dx
        ys = self.center.imag - self.height / 2 + (np.arange(ny) + 0.5) * dy
        return xs[None, :] + 1j * ys[:, None]

    def points(self) -> np.ndarray:
        return self.centers()[self.bits]

    def index_of(self, z) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row, col, inside) of the pixels containing z."""
        z = np.asarray(z, dtype=complex)
        nx, ny = self.resolution
        dx, dy = self.pixel
        with np.errstate(invalid="ignore"):
            col = np.floor((z.real - (self.center.real - self.width / 2)) / dx)
            row = np.floor((z.imag - (self.center.imag - self.height / 2)) / dy)
        inside = np.isfinite(col) & np.isfinite(row) & (col >= 0) & (col < nx) & (row >= 0) & (row < ny)
        row = np.where(inside, row, 0).astype(np.intp)
        col = np.where(inside, col, 0).astype(np.intp)
        return row, col, inside

    def same_frame(self, other: "GridSet") -> bool:
        return (
            self.center == other.center
            and self.width == other.width
            and self.height == other.height
            and self.bits.shape == other.bits.shape
        )

    def _check(self, other: "GridSet") -> None:
        if not self.same_frame(other):
            raise PreconditionError("grid set operations need identical rectangles and resolutions")

    def with_bits(self, bits: np.ndarray, notes: Sequence[str] = ()) -> "GridSet":
        return GridSet(self.center, self.width, self.height, bits, list(self.notes) + list(notes))

    def __or__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return self.with_bits(self.bits | other.bits)

    def __and__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return self.with_bits(self.bits & other.bits)

    def __sub__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return self.with_bits(self.bits & ~other.bits)

    def complement(self) -> "GridSet":
        return self.with_bits(~self.bits)

    def issubset(self, other: "GridSet") -> bool:
        self._check(other)
        return not np.any(self.bits & ~other.bits)

    def count(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def diameter(self, directions: int = 360) -> float:
        """Max projection extent over sampled directions (pixel centres)."""
        pts = self.points()
        if pts.size < 2:
            return 0.0
        theta = np.pi * np.arange(directions) / directions
        proj = pts.real[:, None] * np.cos(theta)[None, :] + pts.imag[:, None] * np.sin(theta)[None, :]
        return float((proj.max(axis=0) - proj.min(axis=0)).max())

    def image_bits(self) -> np.ndarray:
        """Top row first, as written to PBM."""
        return np.flipud(self.bits)

    def describe(self) -> Dict[str, Any]:
        return {
            "center": [self.center.real, self.center.imag],
            "width": self.width,
            "height": self.height,
            "resolution": list(self.resolution),
            "count": self.count(),
        }


def _resolution(res: Resolution) -> Tuple[int, int]:
    if isinstance(res, int):
        return res, res
    return int(res[0]), int(res[1])


# ---------------------------------------------------------------------
# Fates
# ---------------------------------------------------------------------

class Fate1D(IntEnum):
    UNDECIDED = 0
    ATTRACTED0 = 1
    ESCAPED = 2


def _check_attraction(p: Poly1, target: complex, r_att: float) -> None:
    theta = 2.0 * np.pi * np.arange(64) / 64
    for frac in (1.0, 0.5):
        ring = target + frac * r_att * np.exp(1j * theta)
        if not np.all(np.abs(p(ring) - target) <= r_att):
            raise PreconditionError(f"p does not map D({target}; {r_att}) into itself")


def fate_codes(p: Poly1, Z: np.ndarray, N: int, R_esc: float, r_att: Optional[float], target: complex = 0j) -> np.ndarray:
    """Vectorised fate1d; r_att None counts every bounded orbit as attracted."""
    Z = np.array(Z, dtype=complex, copy=True)
    codes = np.zeros(Z.shape, dtype=np.int8)
    flat = Z.ravel()
    out = codes.ravel()
    active = np.arange(flat.size)
    cur = flat
    with np.errstate(all="ignore"):
        for _ in range(N + 1):
            if active.size == 0:
                break
            mag = np.abs(cur)
            esc = ~np.isfinite(mag) | (mag > R_esc)
            att = ~esc & (np.abs(cur - target) < r_att) if r_att is not None else np.zeros_like(esc)
            out[active[esc]] = int(Fate1D.ESCAPED)
            out[active[att]] = int(Fate1D.ATTRACTED0)
            keep = ~(esc | att)
            active = active[keep]
            cur = p(cur[keep])
    if r_att is None:
        out[active] = int(Fate1D.ATTRACTED0)
    return out.reshape(Z.shape)


def fate1d(p: Poly1, z: complex, N: int, R_esc: float, r_att: float, target: complex = 0j) -> Fate1D:
    _check_attraction(p, target, r_att)
    return Fate1D(int(fate_codes(p, np.array([z]), N, R_esc, r_att, target)[0]))


def julia_grid(
    p: Poly1,
    rect: Tuple[complex, float, float],
    res: Resolution,
    N: Optional[int] = None,
    R_esc: Optional[float] = None,
) -> GridSet:
    """Undecided pixels plus pixels whose 3x3 neighbourhood mixes attracted and escaped."""
    cfg = get_config()
    N = int(N if N is not None else cfg["julia_iters"])
    R_esc = max(float(R_esc if R_esc is not None else cfg["julia_escape"]), p.escape_radius())
    grid = GridSet.empty(*rect, res)
    notes: List[str] = []
    target = attracting_fixed_point(p)
    r_att = attraction_radius(p, target) if target is not None else None
    if r_att is None:
        notes.append("no attracting fixed point resolved; bounded orbits count as attracted")
        target = 0j
    codes = fate_codes(p, grid.centers(), N, R_esc, r_att, target)
    att = codes == int(Fate1D.ATTRACTED0)
    esc = codes == int(Fate1D.ESCAPED)
    mixed = ndimage.binary_dilation(att, structure=_NEIGHBOURS) & ndimage.binary_dilation(esc, structure=_NEIGHBOURS)
    bits = (codes == int(Fate1D.UNDECIDED)) | mixed
    log.info("[julia1d] julia raster %dx%d: %d pixels", *grid.resolution, int(bits.sum()))
    return grid.with_bits(bits, notes)


def dilate(g: GridSet, delta: float) -> GridSet:
    """Dilation by the closed disc of radius delta (distance-transform threshold)."""
    if delta < 0:
        raise PreconditionError(f"delta must be >= 0, got {delta}")
    if delta == 0 or g.is_empty():
        return g.with_bits(g.bits.copy())
    dx, dy = g.pixel
    if delta < 0.5 * min(dx, dy):
        log.warning("[julia1d] dilation %.3g below half a pixel; grid unchanged", delta)
        return g.with_bits(g.bits.copy(), [f"dilation {delta:.3g} below half a pixel"])
    dist = ndimage.distance_transform_edt(~g.bits, sampling=(dy, dx))
    return g.with_bits(dist <= delta)


def image_of(p: Poly1, C: GridSet) -> GridSet:
    """Forward image of the pixel centres, rasterised with a one-pixel dilation."""
    w = p(C.points())
    row, col, inside = C.index_of(w)
    bits = np.zeros_like(C.bits)
    bits[row[inside], col[inside]] = True
    bits = ndimage.binary_dilation(bits, structure=_NEIGHBOURS) if bits.any() else bits
    notes = [] if inside.all() else [f"{int((~inside).sum())} image points left the frame"]
    return C.with_bits(bits, notes)


def preimage_of(p: Poly1, target: GridSet) -> GridSet:
    """Pixels whose centre maps into target, widened by one pixel."""
    row, col, inside = target.index_of(p(target.centers()))
    hit = np.zeros_like(target.bits)
    hit[inside] = target.bits[row[inside], col[inside]]
    return target.with_bits(ndimage.binary_dilation(hit, structure=_NEIGHBOURS) if hit.any() else hit)


# ---------------------------------------------------------------------
# Hyperbolicity probe
# ---------------------------------------------------------------------

@dataclass
class HyperbolicityReport:
    status: str  # PASS, PASS_WITH_NOTE, INCONCLUSIVE, FAIL
    critical: List[Dict[str, Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status in ("PASS", "PASS_WITH_NOTE")


def _returns_to_origin(p: Poly1, z: complex, N: int, R_esc: float) -> Optional[int]:
    cur = complex(z)
    for j in range(1, N + 1):
        cur = complex(p(cur))
        if not math.isfinite(abs(cur)) or abs(cur) > R_esc:
            return None
        if abs(cur) < 1e-9:
            return j
    return None


def _settled_period(p: Poly1, z: complex, N: int, R_esc: float, max_period: int = 64) -> Optional[int]:
    """Period of the cycle the orbit of z has settled on after N steps; 0 on escape, None if unsettled."""
    cur = complex(z)
    tail: List[complex] = []
    for _ in range(N):
        cur = complex(p(cur))
        if not math.isfinite(abs(cur)) or abs(cur) > R_esc:
            return 0
        tail.append(cur)
        if len(tail) > max_period + 1:
            tail.pop(0)
    for q in range(1, min(max_period, len(tail) - 1) + 1):
        if abs(tail[-1] - tail[-1 - q]) < 1e-9:
            return q
    return None


def hyperbolicity_probe(p: Poly1, N: Optional[int] = None, R_esc: Optional[float] = None) -> HyperbolicityReport:
    """
    Necessary-condition check: every critical orbit either reaches the
    attracting fixed point 0 or escapes. Never certifies hyperbolicity.

    When 0 lies on a superattracting cycle instead, every other critical
    orbit must escape or join that cycle; one settling on another cycle
    is a FAIL.
    """
    cfg = get_config()
    N = int(N if N is not None else cfg["julia_iters"])
    R_esc = max(float(R_esc if R_esc is not None else cfg["julia_escape"]), p.escape_radius())
    crit = p.critical_points()
    report = HyperbolicityReport(status="PASS")
    origin_fixed = abs(complex(p(0j))) < 1e-12 and abs(complex(p.derivative(0j))) < 1.0
    if not origin_fixed:
        cycles = [(complex(c), _returns_to_origin(p, c, N, R_esc)) for c in crit]
        through_zero = [(c, per) for c, per in cycles if per is not None and abs(c) < 1e-9]
        if not through_zero:
            for c, per in cycles:
                report.critical.append({"point": c, "fate": "cycle" if per else "other", "period": per})
            report.status = "FAIL"
            report.notes.append("0 is not an attracting fixed point")
            log.info("[julia1d] hyperbolicity probe: %s", report.status)
            return report

        report.status = "PASS_WITH_NOTE"
        report.notes.append(f"attracted to cycle through 0 of period {through_zero[0][1]}, not a fixed point")
        for c, per in cycles:
            if per is not None:
                report.critical.append({"point": c, "fate": "cycle", "period": per})
                continue
            settled = _settled_period(p, c, N, R_esc)
            if settled == 0:
                report.critical.append({"point": c, "fate": "escaped", "period": None})
            elif settled is not None:
                report.critical.append({"point": c, "fate": "other_cycle", "period": settled})
                report.status = "FAIL"
                report.notes.append(f"critical orbit of {c:.6g} settles on a cycle of period {settled} avoiding 0")
            else:
                report.critical.append({"point": c, "fate": "undecided", "period": None})
                if report.status != "FAIL":
                    report.status = "INCONCLUSIVE"
                report.notes.append(f"critical orbit of {c:.6g} undecided after {N} steps")
        log.info("[julia1d] hyperbolicity probe: %s", report.status)
        return report

    r_att = attraction_radius(p, 0j) or 1e-12
    codes = fate_codes(p, crit, N, R_esc, r_att)
    for c, code in zip(crit, codes):
        fate = Fate1D(int(code))
        report.critical.append({"point": complex(c), "fate": fate.name})
        if fate is Fate1D.UNDECIDED and report.status == "PASS":
            report.status = "INCONCLUSIVE"
            report.notes.append(f"critical orbit of {complex(c):.6g} undecided after {N} steps")
    log.info("[julia1d] hyperbolicity probe: %s", report.status)
    return report


# ---------------------------------------------------------------------
# Nested compact sets
# ---------------------------------------------------------------------

@dataclass
class NestedStep:
    n: int
    C: GridSet
    delta: float
    eta: float

    @property
    def cprime(self) -> float:
        return min(self.delta, self.eta)

    @property
    def diameter(self) -> float:
        return self.C.diameter()


@dataclass
class NestedSequence:
    C0: GridSet
    E0: GridSet
    delta0: float
    steps: List[NestedStep] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def truncated(self) -> bool:
        return any("truncated" in note for note in self.notes)

    def cprimes(self) -> List[float]:
        """[c'_1, c'_2, ...]; perturbation step n is bounded by c'_(n+1)."""
        return [s.cprime for s in self.steps]

    def bound_for_step(self, n: int) -> float:
        """Admissible |w_n| for z_(n+1) = p(z_n) + w_n; zero past the list."""
        return self.steps[n].cprime if n < len(self.steps) else 0.0

    def csv_rows(self) -> List[List[float]]:
        return [[s.n, s.delta, s.eta, s.cprime, s.diameter] for s in self.steps]


def _margin(img: GridSet, region: GridSet) -> float:
    """Least distance from img pixels to pixels outside region (0 if img leaks out)."""
    if img.is_empty():
        return math.inf
    if not img.issubset(region):
        return 0.0
    dx, dy = region.pixel
    dist = ndimage.distance_transform_edt(region.bits, sampling=(dy, dx))
    return float(dist[img.bits].min())


def _frame_components(free: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    labels, _ = ndimage.label(free)
    border = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    border = border[border != 0]
    return labels, np.isin(labels, border)


def compact_components(p: Poly1, delta0: float, rect: Tuple[complex, float, float], res: Resolution,
                       N: Optional[int] = None) -> Tuple[GridSet, GridSet, GridSet]:
    """(C0, E0, J): the components of the complement of p^-1(J(delta0)) around 0 and at infinity."""
    J = julia_grid(p, rect, res, N)
    near = dilate(J, delta0)
    pre = preimage_of(p, near)
    labels, unbounded = _frame_components(~pre.bits)
    row, col, inside = pre.index_of(np.array([0j]))
    if not inside[0] or pre.bits[row[0], col[0]]:
        raise PreconditionError("origin pixel is not in the complement of p^-1(J(delta0))")
    lab = labels[row[0], col[0]]
    if unbounded[row[0], col[0]]:
        raise PreconditionError("component containing 0 touches the frame; not resolvable as compact")
    C0 = pre.with_bits(labels == lab)
    E0 = pre.with_bits(unbounded)
    return C0, E0, J


def nested_sequence(
    p: Poly1,
    delta0: Optional[float],
    n_max: int,
    rect: Tuple[complex, float, float],
    res: Resolution,
    N: Optional[int] = None,
) -> NestedSequence:
    """
    C_n = dilate(image(p, C_(n-1)), delta_n) with delta_n half the grid margin
    of the image inside C_(n-1). On the unbounded side E_n = E_0 for every n:
    E_0 is forward invariant with margin 2 eta, so the constant eta_n = eta
    already satisfies dilate(image(p, E_n), eta_n) inside E_n.
    The list stops early once delta_n drops below half a pixel.
    """
    if delta0 is None:
        J = julia_grid(p, rect, res, N)
        delta0 = get_config()["julia_delta_frac"] * J.diameter()
    C0, E0, _ = compact_components(p, delta0, rect, res, N)
    seq = NestedSequence(C0=C0, E0=E0, delta0=delta0)
    half_px = 0.5 * min(C0.pixel)
    eta = 0.5 * (1.0 - 1e-9) * _margin(image_of(p, E0), E0)
    if eta < half_px:
        seq.notes.append(f"unbounded-side margin {eta:.3g} below half a pixel")
    prev = C0
    for n in range(1, n_max + 1):
        img = image_of(p, prev)
        delta = 0.5 * (1.0 - 1e-9) * _margin(img, prev)
        if delta < half_px or min(delta, eta) <= 0:
            seq.notes.append(f"truncated at n={n}: margin {delta:.3g} below half a pixel")
            log.warning("[julia1d] nested sequence truncated at n=%d (delta=%.3g)", n, delta)
            break
        Cn = dilate(img, delta)
        seq.steps.append(NestedStep(n=n, C=Cn, delta=delta, eta=eta))
        prev = Cn
    log.info("[julia1d] nested sequence: %d steps, delta0=%.4g", len(seq.steps), delta0)
    return seq


@dataclass
class PerturbationReport:
    ok: bool
    compact_to_zero: int
    unbounded_escaped: int
    mismatched: int
    streams: int


def perturbed_orbits(
    p: Poly1,
    nested: NestedSequence,
    starts: np.ndarray,
    expect_zero: np.ndarray,
    rng: np.random.Generator,
    N: int = 200,
    R_esc: Optional[float] = None,
) -> PerturbationReport:
    """z_(n+1) = p(z_n) + w_n with |w_n| < c'_(n+1); one random stream per start."""
    R_esc = R_esc if R_esc is not None else p.escape_radius(4.0)
    z = np.array(starts, dtype=complex, copy=True)
    done_zero = np.zeros(z.size, dtype=bool)
    done_esc = np.zeros(z.size, dtype=bool)
    with np.errstate(all="ignore"):
        for n in range(N):
            bound = 0.999 * nested.bound_for_step(n)
            w = bound * np.sqrt(rng.random(z.size)) * np.exp(2j * np.pi * rng.random(z.size))
            z = np.where(done_zero | done_esc, z, p(z) + w)
            done_esc |= ~np.isfinite(z) | (np.abs(z) > R_esc)
            if n >= len(nested.steps):
                done_zero |= ~done_esc & (np.abs(z) < 1e-6)
    expect_zero = np.asarray(expect_zero, dtype=bool)
    to_zero = int((done_zero & expect_zero).sum())
    escaped = int((done_esc & ~expect_zero).sum())
    report = PerturbationReport(
        ok=to_zero + escaped == z.size,
        compact_to_zero=to_zero,
        unbounded_escaped=escaped,
        mismatched=int(z.size - to_zero - escaped),
        streams=int(z.size),
    )
    log.info("[julia1d] perturbed orbits: %s", report)
    return report
