# utils/basin.py
"""
Escape-time classification of points and raster slices for non-autonomous
sequences, plus the V_R region trichotomy and boundary witnesses.

A point is Attracted{n} once F(n)(z) lies in the closed polydisc of radius c
at some n >= n0 (an entry before n0 must persist through n0), Escaped{n}
once it leaves through the escape test, Undecided after n_max steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage, optimize

from core.config import get_config
from core.errors import PreconditionError
from core.maps import (
    CoeffSequence,
    HenonSequence,
    MapSequence,
    PerturbedSequence,
    PolySpec,
    ShiftLikeSequence,
    cpoint_native,
)
from utils.julia1d import GridSet
from utils.pool import map_chunks, split_range

log = logging.getLogger(__name__)

# native magnitudes past this count as overflow
OVERFLOW_CEILING = 1e150


class Fate(IntEnum):
    UNDECIDED = 0
    ATTRACTED = 1
    ESCAPED = 2


@dataclass(frozen=True)
class OrbitFate:
    tag: Fate
    n: int

    @classmethod
    def attracted(cls, n: int) -> "OrbitFate":
        return cls(Fate.ATTRACTED, n)

    @classmethod
    def escaped(cls, n: int) -> "OrbitFate":
        return cls(Fate.ESCAPED, n)

    @classmethod
    def undecided(cls, n: int) -> "OrbitFate":
        return cls(Fate.UNDECIDED, n)


# ---------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class BasinParams:
    c: float
    R_escape: float
    n_max: int
    k: int = 2
    n0: int = 0
    nest_ratio: float = 0.5
    M: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.c < 1.0:
            raise PreconditionError(f"polydisc radius c must lie in (0, 1), got {self.c}")
        if self.R_escape <= 0:
            raise PreconditionError(f"escape radius must be positive, got {self.R_escape}")

    def radius(self, l: int) -> float:
        """c_l = c * ratio**l, the nested polydisc radii."""
        return self.c * self.nest_ratio ** l


def quadratic_bound(P: PolySpec, c: float) -> float:
    """M with |z^2 P(z)| <= M |z|^2 on D(0; c); positive coefficients give P(c)."""
    return max(P.at(c), 1.0)


def default_c(P: PolySpec, c_max: float = 0.5) -> float:
    """Largest c <= c_max with c * M(c) <= 1/2, so 1 - M c > 0 with margin."""
    f = lambda x: x * quadratic_bound(P, x) - 0.5  # noqa: E731
    if f(c_max) <= 0:
        return c_max
    return optimize.brentq(f, 1e-12, c_max, xtol=1e-14)


def default_escape_radius(P: PolySpec, floor: float = 10.0) -> float:
    """Smallest power of two R >= floor with R * (c_d R^d - sum_{i<d} c_i R^i) >= 4."""
    R = 1.0
    while R < floor:
        R *= 2.0
    coeffs = P.coeffs
    d = len(coeffs) - 1
    start = R
    for _ in range(200):
        lower = coeffs[d] * R ** d - sum(coeffs[i] * R ** i for i in range(d))
        if lower > 0 and R * lower >= 4.0:
            return R
        R *= 2.0
    log.warning("[basin] no escape radius certified for P=%s; falling back to %g", coeffs, start)
    return start


def _coeffs_of(seq: MapSequence) -> Optional[CoeffSequence]:
    if isinstance(seq, (ShiftLikeSequence, HenonSequence)):
        return seq.coeffs
    if isinstance(seq, PerturbedSequence):
        return _coeffs_of(seq.base)
    return None


def find_n0(coeffs: CoeffSequence, c: float, M: float, ratio: float, depth: int, n_max: int) -> int:
    """First n with a_(n+l) c_l + M c_l^2 < c_(l+1) for l = 0..depth."""
    for n in range(n_max + 1):
        ok = True
        for l in range(depth + 1):
            cl = c * ratio ** l
            if coeffs.a(n + l) * cl + M * cl * cl >= c * ratio ** (l + 1):
                ok = False
                break
        if ok:
            return n
    log.warning("[basin] nesting inequality never held up to n=%d; using n0=n_max", n_max)
    return n_max


def make_params(
    seq: MapSequence,
    c: Optional[float] = None,
    R_escape: Optional[float] = None,
    n_max: Optional[int] = None,
    nest_ratio: Optional[float] = None,
    probe_depth: Optional[int] = None,
) -> BasinParams:
    """BasinParams with defaults taken from the configuration table."""
    cfg = get_config()
    n_max = int(n_max if n_max is not None else cfg["n_max"])
    P = getattr(seq, "P", None) or getattr(getattr(seq, "base", None), "P", None)
    if P is None and isinstance(seq, HenonSequence):
        # p(z) = z^2 q(z) plays the role of z^2 P(z)
        P = PolySpec(seq.p.coeffs[2:] or (0.0,))
    if c is None:
        c = default_c(P, cfg["c_max"]) if P is not None else cfg["c_max"]
    M = quadratic_bound(P, c) if P is not None else 1.0
    if R_escape is None:
        R_escape = default_escape_radius(P, cfg["escape_floor"]) if P is not None else cfg["escape_floor"]
    ratio = nest_ratio if nest_ratio is not None else cfg.get("nest_ratio")
    if ratio is None:
        ratio = 0.5 * (1.0 + M * c)
    depth = int(probe_depth if probe_depth is not None else cfg["probe_depth"])
    coeffs = _coeffs_of(seq)
    n0 = find_n0(coeffs, c, M, ratio, depth, n_max) if coeffs is not None else 0
    return BasinParams(c=c, R_escape=R_escape, n_max=n_max, k=seq.k, n0=n0, nest_ratio=ratio, M=M)


# ---------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------

def _escape_mask(rule: str, mag: np.ndarray, R: float) -> np.ndarray:
    top = mag.max(axis=0)
    over = ~np.isfinite(top) | (top > OVERFLOW_CEILING)
    if rule == "vr_plus":
        return over | ((mag[0] > R) & (mag[0] >= top))
    return over | (top > R)


def classify_points(seq: MapSequence, Z: np.ndarray, p: BasinParams) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised classification of columns of Z (shape (k, N)); returns (codes, first_n)."""
    Z = np.array(Z, dtype=complex, copy=True)
    if Z.ndim == 1:
        Z = Z[:, None]
    N = Z.shape[1]
    codes = np.full(N, int(Fate.UNDECIDED), dtype=np.int8)
    first = np.full(N, p.n_max, dtype=np.int32)
    entry = np.full(N, -1, dtype=np.int32)
    active = np.arange(N)
    cur = Z
    with np.errstate(all="ignore"):
        for n in range(p.n_max):
            if active.size == 0:
                break
            cur = seq.step_at(n).apply_array(cur)
            mag = np.abs(cur)
            finite = np.all(np.isfinite(cur), axis=0)
            inside = finite & (mag.max(axis=0) <= p.c)
            ent = entry[active]
            ent = np.where(inside & (ent < 0), n, ent)
            ent = np.where(inside, ent, -1)
            entry[active] = ent

            att = inside & (n >= p.n0)
            esc = ~inside & _escape_mask(seq.escape_rule, np.where(np.isfinite(mag), mag, np.inf), p.R_escape)
            codes[active[att]] = int(Fate.ATTRACTED)
            first[active[att]] = ent[att]
            codes[active[esc]] = int(Fate.ESCAPED)
            first[active[esc]] = n

            keep = ~(att | esc)
            active = active[keep]
            cur = cur[:, keep]
    return codes, first


def classify_point(seq: MapSequence, z: Sequence[Any], p: BasinParams) -> OrbitFate:
    codes, first = classify_points(seq, cpoint_native(z)[:, None], p)
    return OrbitFate(Fate(int(codes[0])), int(first[0]))


@dataclass(frozen=True)
class RegionLabel:
    """kind is 'V_R', 'V_R+' or 'V_R-'; indices are 1-based coordinates i with z in V_R^i."""

    kind: str
    indices: Tuple[int, ...] = ()


def region_of(z: Sequence[Any], R: float) -> RegionLabel:
    if R <= 0:
        raise PreconditionError(f"R must be positive, got {R}")
    mags = np.abs(cpoint_native(z))
    if np.all(mags <= R):
        return RegionLabel("V_R")
    top = mags.max()
    idx = tuple(int(i) + 1 for i in np.flatnonzero((mags > R) & (mags >= top)))
    if 1 in idx:
        return RegionLabel("V_R+", idx)
    return RegionLabel("V_R-", idx)


def exhaustion_index(seq: MapSequence, z: Sequence[Any], p: BasinParams) -> Optional[int]:
    """Smallest j with F(n0 + j)(z) in the ball B(0; c), i.e. z in Omega_j."""
    cur = cpoint_native(z)[:, None]
    with np.errstate(all="ignore"):
        for n in range(p.n_max):
            cur = seq.step_at(n).apply_array(cur)
            if n >= p.n0 and np.linalg.norm(cur[:, 0]) < p.c:
                return n - p.n0
            if not np.all(np.isfinite(cur)):
                return None
    return None


# ---------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------

@dataclass
class NestingReport:
    n_points: int
    attracted: int
    reexits: int
    details: Dict[str, Any] = field(default_factory=dict)


def nesting_audit(seq: MapSequence, Z: np.ndarray, p: BasinParams, depth: int = 20) -> NestingReport:
    """Follow attracted orbits `depth` steps past acceptance and count polydisc re-exits."""
    codes, first = classify_points(seq, Z, p)
    att = codes == int(Fate.ATTRACTED)
    Za = np.asarray(Z, dtype=complex)[:, att]
    entry = first[att]
    horizon = p.n_max + depth
    reexit = np.zeros(Za.shape[1], dtype=bool)
    cur = Za
    with np.errstate(all="ignore"):
        for n in range(horizon):
            cur = seq.step_at(n).apply_array(cur)
            outside = ~(np.abs(cur).max(axis=0) <= p.c)
            reexit |= outside & (n >= np.maximum(entry, p.n0))
    report = NestingReport(
        n_points=int(codes.size),
        attracted=int(att.sum()),
        reexits=int(reexit.sum()),
        details={"n0": p.n0, "depth": depth, "c": p.c},
    )
    log.info("[basin] nesting audit: %d attracted, %d re-exits", report.attracted, report.reexits)
    return report


@dataclass
class RegionAudit:
    n_points: int
    trichotomy_violations: int
    escape_lemma_violations: int
    details: Dict[str, Any] = field(default_factory=dict)


def region_audit(seq: MapSequence, Z: np.ndarray, p: BasinParams, R: float) -> RegionAudit:
    """
    Count orbit positions outside V_R u V_R+ and points that visited V_R+
    without ending Escaped. R is a parameter; violations are reported.
    """
    codes, _ = classify_points(seq, Z, p)
    cur = np.asarray(Z, dtype=complex)
    outside_count = 0
    visited_plus = np.zeros(cur.shape[1], dtype=bool)
    with np.errstate(all="ignore"):
        for n in range(p.n_max):
            cur = seq.step_at(n).apply_array(cur)
            mag = np.abs(cur)
            finite = np.all(np.isfinite(mag), axis=0)
            in_vr = np.all(mag <= R, axis=0)
            in_plus = (mag[0] > R) & (mag[0] >= mag.max(axis=0))
            outside_count += int((finite & ~in_vr & ~in_plus).sum())
            visited_plus |= finite & in_plus
    lemma = int((visited_plus & (codes != int(Fate.ESCAPED))).sum())
    return RegionAudit(
        n_points=int(cur.shape[1]),
        trichotomy_violations=outside_count,
        escape_lemma_violations=lemma,
        details={"R": R},
    )


# ---------------------------------------------------------------------
# Slices
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SliceWindow:
    """Affine 2-D real slice base + s u + t v, |s| <= w/2, |t| <= h/2."""

    base: Tuple[complex, ...]
    u: Tuple[complex, ...]
    v: Tuple[complex, ...]
    extents: Tuple[float, float]
    resolution: Tuple[int, int]

    def __post_init__(self):
        for name in ("base", "u", "v"):
            object.__setattr__(self, name, tuple(complex(x) for x in getattr(self, name)))
        if not (len(self.base) == len(self.u) == len(self.v)):
            raise PreconditionError("slice vectors must share one dimension")
        real_u = np.concatenate([np.real(self.u), np.imag(self.u)])
        real_v = np.concatenate([np.real(self.v), np.imag(self.v)])
        if np.linalg.matrix_rank(np.stack([real_u, real_v])) < 2:
            raise PreconditionError("slice directions u, v must be linearly independent")

    @property
    def k(self) -> int:
        return len(self.base)

    @classmethod
    def coordinate_plane(cls, k: int, extent: float, res: int, base: Sequence[complex] = None, axis: int = 0):
        """Complex line of coordinate `axis`, the other coordinates fixed at base."""
        base = tuple(base) if base is not None else (0j,) * k
        u = tuple(1.0 if i == axis else 0.0 for i in range(k))
        v = tuple(1j if i == axis else 0.0 for i in range(k))
        return cls(base, u, v, (extent, extent), (res, res))

    @classmethod
    def real_plane(cls, k: int, extent: float, res: int):
        """Re z_1 against Re z_2 through the origin."""
        u = tuple(1.0 if i == 0 else 0.0 for i in range(k))
        v = tuple(1.0 if i == 1 else 0.0 for i in range(k))
        return cls((0j,) * k, u, v, (extent, extent), (res, res))

    def offsets(self) -> Tuple[np.ndarray, np.ndarray]:
        (w, h), (nx, ny) = self.extents, self.resolution
        s = -w / 2 + (np.arange(nx) + 0.5) * (w / nx)
        t = -h / 2 + (np.arange(ny) + 0.5) * (h / ny)
        return s, t

    def rows(self, rows: range) -> np.ndarray:
        s, t = self.offsets()
        tt, ss = np.meshgrid(t[rows.start:rows.stop], s, indexing="ij")
        base, u, v = (np.asarray(x)[:, None] for x in (self.base, self.u, self.v))
        return base + u * ss.ravel()[None, :] + v * tt.ravel()[None, :]

    def points(self) -> np.ndarray:
        return self.rows(range(0, self.resolution[1]))

    def param_center(self) -> complex:
        """Parameter-plane centre: base_1 for a z_1 coordinate plane, else 0."""
        if self.u[0] == 1 and self.v[0] == 1j and all(x == 0 for x in self.u[1:] + self.v[1:]):
            return self.base[0]
        return 0j

    def describe(self) -> Dict[str, Any]:
        return {
            "base": list(self.base),
            "u": list(self.u),
            "v": list(self.v),
            "extents": list(self.extents),
            "resolution": list(self.resolution),
        }


@dataclass
class FateGrid:
    window: SliceWindow
    codes: np.ndarray  # (ny, nx) int8 Fate codes, row 0 = lowest t
    first_n: np.ndarray  # (ny, nx) int32

    def __post_init__(self):
        nx, ny = self.window.resolution
        if self.codes.shape != (ny, nx) or self.first_n.shape != (ny, nx):
            raise PreconditionError(f"fate arrays {self.codes.shape} do not match window {nx}x{ny}")

    def fate_at(self, i: int, j: int) -> OrbitFate:
        return OrbitFate(Fate(int(self.codes[j, i])), int(self.first_n[j, i]))

    def counts(self) -> Dict[str, int]:
        return {f.name.lower(): int((self.codes == int(f)).sum()) for f in Fate}

    def shades(self) -> np.ndarray:
        """PGM shades: attracted dark, escaped light, undecided 128; top row first."""
        lg = np.log2(1.0 + self.first_n.astype(float))
        shade = np.full(self.codes.shape, 128, dtype=np.uint8)
        att = self.codes == int(Fate.ATTRACTED)
        esc = self.codes == int(Fate.ESCAPED)
        shade[att] = np.minimum(8.0 * lg[att], 100.0).astype(np.uint8)
        shade[esc] = (255.0 - np.minimum(8.0 * lg[esc], 99.0)).astype(np.uint8)
        return np.flipud(shade)


def _classify_chunk(seq: MapSequence, p: BasinParams, window: SliceWindow, rows: range):
    return classify_points(seq, window.rows(rows), p)


def render_slice(seq: MapSequence, window: SliceWindow, p: BasinParams, threads: int = 1) -> FateGrid:
    """Classify every pixel centre; row blocks are farmed out to the worker pool."""
    if window.k != seq.k:
        raise PreconditionError(f"window dimension {window.k} != sequence dimension {seq.k}")
    nx, ny = window.resolution
    blocks = split_range(ny, max(1, threads) * 4)
    results = map_chunks(partial(_classify_chunk, seq, p, window), blocks, threads)
    codes = np.concatenate([r[0] for r in results]).reshape(ny, nx)
    first = np.concatenate([r[1] for r in results]).reshape(ny, nx)
    grid = FateGrid(window, codes, first)
    log.info("[basin] rendered %dx%d slice: %s", nx, ny, grid.counts())
    return grid


_NEIGHBOURS = np.ones((3, 3), dtype=bool)


def boundary_pixels(g: FateGrid) -> GridSet:
    """
    Non-escaped pixels whose 3x3 neighbourhood holds both an Attracted and an
    Escaped pixel (the interface is taken on the bounded side).
    """
    att = g.codes == int(Fate.ATTRACTED)
    esc = g.codes == int(Fate.ESCAPED)
    near_att = ndimage.binary_dilation(att, structure=_NEIGHBOURS)
    near_esc = ndimage.binary_dilation(esc, structure=_NEIGHBOURS)
    bits = near_att & near_esc & ~esc
    w, h = g.window.extents
    return GridSet(center=g.window.param_center(), width=w, height=h, bits=bits)


# ---------------------------------------------------------------------
# Boundary witnesses
# ---------------------------------------------------------------------

@dataclass
class WitnessResult:
    ok: bool
    s1: Optional[Tuple[complex, ...]] = None
    s2: Optional[Tuple[complex, ...]] = None
    fate1: Optional[OrbitFate] = None
    fate2: Optional[OrbitFate] = None
    tried: int = 0
    reason: str = ""


def _ball_samples(z: np.ndarray, eps: float, budget: int, rng: np.random.Generator) -> np.ndarray:
    k = z.size
    cols: List[np.ndarray] = []
    theta = 2.0 * np.pi * np.arange(16) / 16.0
    for j in range(k):
        for frac in (1.0, 0.75, 0.5, 0.25):
            ring = np.repeat(z[:, None], theta.size, axis=1)
            ring[j] = ring[j] + frac * eps * np.exp(1j * theta)
            cols.append(ring)
    structured = np.concatenate(cols, axis=1)[:, :budget]
    extra = budget - structured.shape[1]
    if extra <= 0:
        return structured
    g = rng.standard_normal((2 * k, extra))
    g /= np.linalg.norm(g, axis=0)
    radius = eps * rng.random(extra) ** (1.0 / (2 * k))
    fill = z[:, None] + (g[:k] + 1j * g[k:]) * radius
    return np.concatenate([structured, fill], axis=1)


def boundary_witness(
    seq: MapSequence,
    z: Sequence[Any],
    eps: float,
    budget: int,
    p: BasinParams,
    rng: Optional[np.random.Generator] = None,
) -> WitnessResult:
    """Look for one attracted and one escaped point inside B(z; eps)."""
    if eps <= 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    rng = rng if rng is not None else np.random.default_rng(get_config()["seed"])
    zc = cpoint_native(z)
    cand = _ball_samples(zc, eps, budget, rng)
    codes, _ = classify_points(seq, cand, p)
    att = np.flatnonzero(codes == int(Fate.ATTRACTED))
    esc = np.flatnonzero(codes == int(Fate.ESCAPED))
    if att.size == 0 or esc.size == 0:
        missing = "attracted" if att.size == 0 else "escaped"
        return WitnessResult(ok=False, tried=cand.shape[1], reason=f"no {missing} point within budget")
    s1 = tuple(cand[:, att[0]])
    s2 = tuple(cand[:, esc[0]])
    f1 = classify_point(seq, s1, p)
    f2 = classify_point(seq, s2, p)
    ok = f1.tag is Fate.ATTRACTED and f2.tag is Fate.ESCAPED
    return WitnessResult(ok=ok, s1=s1, s2=s2, fate1=f1, fate2=f2, tried=cand.shape[1],
                         reason="" if ok else "re-verification disagreed")


def sample_attracted(seq: MapSequence, p: BasinParams, count: int, radius: float,
                     rng: np.random.Generator, max_rounds: int = 50) -> np.ndarray:
    """Rejection-sample `count` attracted points from the polydisc of `radius`."""
    found: List[np.ndarray] = []
    total = 0
    for _ in range(max_rounds):
        batch = max(count, 256)
        r = radius * np.sqrt(rng.random((p.k, batch)))
        Z = r * np.exp(2j * np.pi * rng.random((p.k, batch)))
        codes, _ = classify_points(seq, Z, p)
        good = Z[:, codes == int(Fate.ATTRACTED)]
        found.append(good)
        total += good.shape[1]
        if total >= count:
            break
    out = np.concatenate(found, axis=1)[:, :count]
    if out.shape[1] < count:
        log.warning("[basin] only %d of %d attracted samples found", out.shape[1], count)
    return out


__all__ = [
    "Fate",
    "OrbitFate",
    "BasinParams",
    "SliceWindow",
    "FateGrid",
    "RegionLabel",
    "WitnessResult",
    "make_params",
    "classify_points",
    "classify_point",
    "region_of",
    "render_slice",
    "boundary_pixels",
    "boundary_witness",
    "nesting_audit",
    "region_audit",
    "exhaustion_index",
]
