# utils/dimension.py
"""
Box-counting contents, upper box dimension by log-log regression, and
Hausdorff distances between finite point sets or GridSet rasters.

Box grids are anchored at the lower-left extent of the set. Point sets may
have any real dimension; complex arrays are read as points of R^2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage, spatial, stats

from core.errors import PreconditionError
from utils.julia1d import GridSet
from utils.pool import map_chunks

log = logging.getLogger(__name__)

SetLike = Union[GridSet, np.ndarray, Sequence[complex]]


@dataclass
class CoverStats:
    eps: float
    count: int
    h: float
    gamma: float
    flags: List[str] = field(default_factory=list)


@dataclass
class DimEstimate:
    slope: float
    intercept: float
    r2: float
    eps_range: Tuple[float, float]
    window: Tuple[int, int] = (0, 0)
    flagged: bool = False
    notes: List[str] = field(default_factory=list)


def as_points(S: SetLike) -> np.ndarray:
    """(N, d) float array of the represented points."""
    if isinstance(S, GridSet):
        z = S.points()
        return np.column_stack([z.real, z.imag]) if z.size else np.zeros((0, 2))
    arr = np.asarray(S)
    if np.iscomplexobj(arr):
        arr = arr.ravel()
        return np.column_stack([arr.real, arr.imag])
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _min_eps(S: SetLike) -> float:
    return min(S.pixel) if isinstance(S, GridSet) else 0.0


def _cells(pts: np.ndarray, origin: np.ndarray, eps: float) -> np.ndarray:
    return np.unique(np.floor((pts - origin) / eps).astype(np.int64), axis=0)


def box_count(S: SetLike, eps: float, threads: int = 1) -> int:
    """Occupied cells of the axis-aligned eps-grid anchored at the set's lower-left corner."""
    if eps <= 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    if eps < _min_eps(S) * (1 - 1e-12):
        raise PreconditionError(f"eps {eps:.3g} below pixel scale {_min_eps(S):.3g}")
    pts = as_points(S)
    if pts.shape[0] == 0:
        log.warning("[dimension] box count of an empty set")
        return 0
    origin = pts.min(axis=0)
    if threads <= 1 or pts.shape[0] < 4096:
        return int(_cells(pts, origin, eps).shape[0])
    parts = np.array_split(pts, threads * 4)
    cells = map_chunks(_cells_of, [(p, origin, eps) for p in parts], threads)
    return int(np.unique(np.concatenate(cells), axis=0).shape[0])


def _cells_of(args: Tuple[np.ndarray, np.ndarray, float]) -> np.ndarray:
    return _cells(*args)


def gamma_content(S: SetLike, h: float, eps: float) -> CoverStats:
    """gamma_h^eps = eps^h * N(eps)."""
    count = box_count(S, eps)
    flags = ["empty set"] if count == 0 else []
    return CoverStats(eps=eps, count=count, h=h, gamma=eps ** h * count, flags=flags)


def eps_schedule(pixel: float, decades: float, count: int) -> List[float]:
    """Geometric eps values from 2 * pixel * 10^decades down to 2 * pixel."""
    if pixel <= 0 or count < 2:
        raise PreconditionError("eps schedule needs pixel > 0 and count >= 2")
    return list(np.geomspace(2.0 * pixel * 10.0 ** decades, 2.0 * pixel, count))


def boxdim_estimate(S: SetLike, eps_list: Sequence[float], threads: int = 1) -> DimEstimate:
    """
    Slope of log N(eps) against log(1/eps) over the consecutive eps run with
    the best r^2 (at least max(4, ceil(len/2)) values).
    """
    eps = np.sort(np.asarray(eps_list, dtype=float))[::-1]
    if eps.size < 4 or math.log10(eps[0] / eps[-1]) < 1.5 - 1e-9:
        raise PreconditionError("box dimension needs >= 4 eps values spanning >= 1.5 decades")
    counts = np.array([box_count(S, e, threads) for e in eps], dtype=float)
    if np.any(counts == 0):
        raise PreconditionError("box dimension of an empty set")
    x = np.log(1.0 / eps)
    y = np.log(counts)
    width = max(4, math.ceil(eps.size / 2))
    if np.ptp(y) == 0.0:
        est = DimEstimate(0.0, float(y[0]), 0.0, (float(eps[0]), float(eps[-1])), (0, eps.size),
                          flagged=True, notes=["degenerate regression: all counts equal"])
        log.info("[dimension] degenerate box-count regression (N=%d)", int(counts[0]))
        return est
    best = None
    for lo in range(0, eps.size - width + 1):
        for hi in range(lo + width, eps.size + 1):
            if np.ptp(y[lo:hi]) == 0.0:
                continue
            fit = stats.linregress(x[lo:hi], y[lo:hi])
            r2 = float(fit.rvalue ** 2)
            key = (round(r2, 12), hi - lo)
            if best is None or key > best[0]:
                best = (key, fit, r2, lo, hi)
    if best is None:
        raise PreconditionError("no usable regression window")
    _, fit, r2, lo, hi = best
    est = DimEstimate(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r2=min(max(r2, 0.0), 1.0),
        eps_range=(float(eps[lo]), float(eps[hi - 1])),
        window=(lo, hi),
    )
    log.info("[dimension] box dimension %.4f (r2=%.5f) over eps %.3g..%.3g", est.slope, est.r2, *est.eps_range)
    return est


def count_rows(S: SetLike, eps_list: Sequence[float]) -> List[List[float]]:
    """CSV rows (eps, N, log(1/eps), log N)."""
    rows = []
    for e in eps_list:
        n = box_count(S, e)
        rows.append([float(e), n, math.log(1.0 / e), math.log(n) if n else -math.inf])
    return rows


def hausdorff_distance(A: SetLike, B: SetLike) -> float:
    """max(sup_a d(a, B), sup_b d(b, A)); grids on one frame use distance transforms."""
    if isinstance(A, GridSet) and isinstance(B, GridSet) and A.same_frame(B):
        if A.is_empty() or B.is_empty():
            raise PreconditionError("Hausdorff distance of an empty set")
        dx, dy = A.pixel
        to_b = ndimage.distance_transform_edt(~B.bits, sampling=(dy, dx))
        to_a = ndimage.distance_transform_edt(~A.bits, sampling=(dy, dx))
        return float(max(to_b[A.bits].max(), to_a[B.bits].max()))
    pa, pb = as_points(A), as_points(B)
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise PreconditionError("Hausdorff distance of an empty set")
    if pa.shape[1] != pb.shape[1]:
        raise PreconditionError(f"point dimensions differ: {pa.shape[1]} vs {pb.shape[1]}")
    d_ab = spatial.cKDTree(pb).query(pa)[0].max()
    d_ba = spatial.cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


def reference_set(shape: str, res: int, extent: float = 3.0) -> GridSet:
    """Oracle rasters on [-extent/2, extent/2]^2: 'point', unit 'circle', filled unit 'square'."""
    g = GridSet.empty(0j, extent, extent, res)
    z = g.centers()
    if shape == "point":
        bits = np.zeros_like(g.bits)
        bits[res // 2, res // 2] = True
    elif shape == "circle":
        bits = np.abs(np.abs(z) - 1.0) <= min(g.pixel) / math.sqrt(2.0)
    elif shape == "square":
        bits = (np.abs(z.real) <= 0.5) & (np.abs(z.imag) <= 0.5)
    else:
        raise PreconditionError(f"unknown reference shape '{shape}'")
    return g.with_bits(bits)


def product_points(A: SetLike, B: SetLike, limit: Optional[int] = None) -> np.ndarray:
    """Cartesian product of two point sets as an (NA * NB, dA + dB) array."""
    pa, pb = as_points(A), as_points(B)
    if limit is not None and pa.shape[0] * pb.shape[0] > limit:
        raise PreconditionError(f"product of {pa.shape[0]} x {pb.shape[0]} points exceeds {limit}")
    left = np.repeat(pa, pb.shape[0], axis=0)
    right = np.tile(pb, (pa.shape[0], 1))
    return np.hstack([left, right])
