# utils/kobayashi.py
"""
Holomorphic disc witnesses tau_n(x) = F(n)^-1(p_n + x R xi_n) with
tau_n(0) = p and tau_n'(0) close to R xi. Large R with an admissible n
shows the infinitesimal Kobayashi metric at (p, xi) is below 1/R.

Orbit points and tangents run on the extended exponent path, since p_n and
xi_n shrink far below the double range.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import PreconditionError
from core.maps import CPoint, MapSequence, as_cpoint, cpoint_native, forward_orbit, inverse_orbit
from core.num_core import ExtComplex, LogMag, from_native, log_modulus, to_native
from utils.basin import BasinParams, Fate, classify_point, classify_points

log = logging.getLogger(__name__)

FD_STEPS = tuple(10.0 ** -j for j in range(2, 11))


def log_norm(z: CPoint) -> float:
    """log of the Euclidean norm, computed from coordinate log-moduli."""
    logs = [log_modulus(v).value for v in z]
    if any(l == math.inf for l in logs):
        return math.inf
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    return top + 0.5 * math.log(sum(math.exp(2.0 * (l - top)) for l in logs))


def _scale(z: CPoint, log_factor: float) -> CPoint:
    f = LogMag(log_factor).to_ext()
    return tuple(v * f for v in z)


def _axpy(x: complex, u: CPoint, y: CPoint) -> CPoint:
    xe = from_native(x)
    return tuple(b + xe * a for a, b in zip(u, y))


def tangent_step(step, p: CPoint, xi: CPoint, rel: float = 1e-7) -> CPoint:
    """DF_j(p) xi by a central difference along xi/|xi| scaled to |p|."""
    ln_xi = log_norm(xi)
    if ln_xi == -math.inf:
        return xi
    u = _scale(xi, -ln_xi)
    ln_p = log_norm(p)
    ln_h = math.log(rel) + (ln_p if ln_p > -math.inf else 0.0)
    h = LogMag(ln_h).to_ext()
    plus = step.apply(tuple(a + h * b for a, b in zip(p, u)))
    minus = step.apply(tuple(a - h * b for a, b in zip(p, u)))
    two_h = LogMag(ln_h + math.log(2.0)).to_ext()
    diff = tuple((a - b) / two_h for a, b in zip(plus, minus))
    return _scale(diff, ln_xi)


@dataclass
class DiscWitness:
    p: Tuple[complex, ...]
    xi: Tuple[complex, ...]
    R: float
    n: Optional[int]
    center_value: Tuple[complex, ...] = ()
    fd_derivative: Tuple[complex, ...] = ()
    containment_violations: int = 0
    ok: bool = False
    fd_step: float = 0.0
    rel_error: float = math.inf
    center_error: float = math.inf
    xi_trace: List[float] = field(default_factory=list)
    reason: str = ""

    def summary(self) -> dict:
        return {
            "R": self.R,
            "n": self.n if self.n is not None else "none",
            "rel_error": self.rel_error,
            "center_error": self.center_error,
            "containment_violations": self.containment_violations,
            "fd_step": self.fd_step,
            "ok": self.ok,
        }


def disc_witness(
    seq: MapSequence,
    p: Sequence[Any],
    xi: Sequence[Any],
    R: float,
    m: int,
    params: BasinParams,
    r: Optional[float] = None,
) -> DiscWitness:
    """
    Smallest n <= n_max with |p_n| + R |xi_n| < r (r defaults to c, so the
    ball sits inside the attracting polydisc), then tau_n on m boundary
    samples and a central-difference derivative at 0.
    """
    if R <= 0:
        raise PreconditionError(f"R must be positive, got {R}")
    xi_native = cpoint_native(xi)
    if abs(np.linalg.norm(xi_native) - 1.0) > 1e-9:
        raise PreconditionError("xi must be a unit vector")
    if classify_point(seq, p, params).tag is not Fate.ATTRACTED:
        raise PreconditionError("disc witness needs an attracted base point")
    r = params.c if r is None else r
    pc, xc = as_cpoint(p), as_cpoint(xi)
    witness = DiscWitness(p=tuple(cpoint_native(pc)), xi=tuple(xi_native), R=R, n=None)

    orbit = forward_orbit(seq, pc, params.n_max)
    tangent = xc
    chosen = None
    for n in range(params.n_max + 1):
        tangent = tangent_step(seq.step_at(n), orbit[n], tangent)
        ln_xi = log_norm(tangent)
        witness.xi_trace.append(ln_xi)
        ln_reach = np.logaddexp(log_norm(orbit[n + 1]), math.log(R) + ln_xi)
        if ln_reach < math.log(r):
            chosen = n
            break
    if chosen is None:
        witness.reason = f"no admissible n <= {params.n_max}; log |xi_n| trace ends at {witness.xi_trace[-1]:.4g}"
        log.info("[kobayashi] %s", witness.reason)
        return witness

    n = chosen
    pn, xin = orbit[n + 1], tangent
    R_xin = _scale(xin, math.log(R))

    def tau(x: complex) -> CPoint:
        return inverse_orbit(seq, _axpy(x, R_xin, pn), n)

    center = tau(0j)
    witness.n = n
    witness.center_value = tuple(cpoint_native(center))
    witness.center_error = float(np.linalg.norm(np.array(witness.center_value) - np.array(witness.p)))

    derivs = []
    for h in FD_STEPS:
        plus, minus = tau(complex(h)), tau(complex(-h))
        derivs.append(np.array([to_native((a - b) / from_native(2.0 * h)) for a, b in zip(plus, minus)]))
    gaps = [np.linalg.norm(derivs[i] - derivs[i + 1]) for i in range(len(derivs) - 1)]
    best = int(np.nanargmin(gaps)) if np.any(np.isfinite(gaps)) else 0
    witness.fd_step = FD_STEPS[best]
    witness.fd_derivative = tuple(derivs[best])
    witness.rel_error = float(np.linalg.norm(derivs[best] - R * xi_native) / R)

    theta = 2.0 * np.pi * np.arange(m) / m
    boundary = np.column_stack([cpoint_native(tau(complex(np.exp(1j * t)))) for t in theta])
    codes, _ = classify_points(seq, boundary, params)
    witness.containment_violations = int((codes != int(Fate.ATTRACTED)).sum())
    witness.ok = witness.containment_violations == 0
    log.info("[kobayashi] R=%g n=%d rel_error=%.3g violations=%d", R, n, witness.rel_error,
             witness.containment_violations)
    return witness


def rescaled(seq: MapSequence, p: Sequence[Any], xi: Sequence[Any], Rs: Sequence[float], m: int,
             params: BasinParams) -> List[DiscWitness]:
    """Witnesses over a list of radii (derivative scaling and n growth)."""
    return [disc_witness(seq, p, xi, R, m, params) for R in Rs]
