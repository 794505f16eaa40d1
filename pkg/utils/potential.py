# utils/potential.py
"""
Potential ladder for shift-like sequences: phi_n, psi_n = 2^-n log phi_n and
the decreasing envelope Phi_n = psi_n + 2^-n log M, computed on the extended
exponent path so that c^(2^n) sized orbits keep exact logarithms.

Usage:
    from utils.potential import converged_psi
    converged_psi(seq, (0.1, 0.1)).value
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from core.config import get_config
from core.errors import NonFiniteInputError, PreconditionError
from core.maps import MapSequence, ShiftLikeSequence, forward_orbit
from core.num_core import LogMag, log_modulus

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PotentialParams:
    M: float
    c: float
    seq: ShiftLikeSequence

    @property
    def M_step(self) -> float:
        """Constant of the one-step bound phi_(n+1) <= (M + 1) phi_n^2."""
        return self.M + 1.0

    @classmethod
    def for_sequence(cls, seq: ShiftLikeSequence, c: float) -> "PotentialParams":
        _require_shiftlike(seq)
        return cls(M=max(seq.P.at(c), 1.0), c=c, seq=seq)

    def bound_holds(self, samples: int = 256, rng: Optional[np.random.Generator] = None) -> bool:
        """Sample |z^2 P(z)| <= M |z|^2 on the closed disc of radius c."""
        rng = rng if rng is not None else np.random.default_rng(get_config()["seed"])
        z = self.c * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
        z = np.concatenate([z, self.c * np.exp(2j * np.pi * np.arange(64) / 64)])
        lhs = np.abs(z * z * self.seq.P.eval_array(z))
        return bool(np.all(lhs <= self.M * np.abs(z) ** 2 * (1 + 1e-12)))


def _require_shiftlike(seq: MapSequence) -> None:
    if not isinstance(seq, ShiftLikeSequence):
        raise PreconditionError(f"potential ladder needs a shift-like sequence, got {type(seq).__name__}")


# ---------------------------------------------------------------------
# Ladder
# ---------------------------------------------------------------------

def phi_ladder(seq: ShiftLikeSequence, z: Sequence[Any], n: int) -> List[LogMag]:
    """[log phi_0, ..., log phi_n] from one extended-precision orbit pass."""
    _require_shiftlike(seq)
    orbit = forward_orbit(seq, z, n)
    out: List[LogMag] = []
    for j in range(n + 1):
        point = orbit[j + 1]
        if any(v.overflow for v in point):
            out.append(LogMag.escaped())
            continue
        top = max((log_modulus(v).value for v in point), default=-math.inf)
        out.append(LogMag(max(top, seq.coeffs.log_a(j))))
    return out


def phi_n(seq: ShiftLikeSequence, z: Sequence[Any], n: int) -> LogMag:
    return phi_ladder(seq, z, n)[-1]


def _scaled(value: float, n: int) -> float:
    if math.isinf(value):
        return value
    return math.ldexp(value, -n)


def psi_n(seq: ShiftLikeSequence, z: Sequence[Any], n: int) -> float:
    return _scaled(phi_n(seq, z, n).value, n)


def envelope_n(seq: ShiftLikeSequence, z: Sequence[Any], n: int, M: float) -> float:
    """Phi_n = psi_n + sum_(j>=n) 2^-(j+1) log M, the tail summed in closed form."""
    if M <= 0:
        raise PreconditionError(f"M must be positive, got {M}")
    return psi_n(seq, z, n) + math.ldexp(math.log(M), -n)


@dataclass
class PsiLimit:
    value: float
    n: int
    converged: bool
    history: List[float] = field(default_factory=list)

    @property
    def stop_rule(self) -> str:
        return "tolerance" if self.converged else "n_max"


def converged_psi(
    seq: ShiftLikeSequence,
    z: Sequence[Any],
    n_max: Optional[int] = None,
    tol: Optional[float] = None,
) -> PsiLimit:
    """Iterate psi_n until two successive values differ by less than tol, or n_max."""
    cfg = get_config()
    n_max = int(n_max if n_max is not None else cfg["n_max"])
    tol = float(tol if tol is not None else cfg["psi_tol"])
    ladder = phi_ladder(seq, z, n_max)
    history = [_scaled(lm.value, j) for j, lm in enumerate(ladder)]
    for j in range(1, len(history)):
        prev, cur = history[j - 1], history[j]
        if math.isinf(cur) and cur == prev:
            return PsiLimit(cur, j, True, history[: j + 1])
        if abs(cur - prev) < tol:
            return PsiLimit(cur, j, True, history[: j + 1])
    return PsiLimit(history[-1], n_max, False, history)


# ---------------------------------------------------------------------
# Sub-mean-value checks
# ---------------------------------------------------------------------

@dataclass
class PshReport:
    ok: bool
    center: float
    mean: float
    margin: float
    violations: List[str] = field(default_factory=list)


def psh_check(
    values: Callable[[complex], float],
    r: float,
    m: Optional[int] = None,
    tol: Optional[float] = None,
) -> PshReport:
    """
    Sub-mean-value test of `values` on a complex line: value(0) must not
    exceed the m-point circle average at radius r by more than tol * r^2.
    """
    cfg = get_config()
    m = int(m if m is not None else cfg["psh_samples"])
    tol = float(tol if tol is not None else cfg["psh_tol"])
    if r <= 0 or m < 3:
        raise PreconditionError(f"psh_check needs r > 0 and m >= 3, got r={r}, m={m}")
    center = float(values(0j))
    if center == -math.inf:
        return PshReport(ok=True, center=center, mean=-math.inf, margin=math.inf)
    ring = [float(values(r * complex(math.cos(t), math.sin(t)))) for t in 2 * math.pi * np.arange(m) / m]
    if not all(math.isfinite(v) or v == -math.inf for v in ring) or math.isnan(center):
        raise NonFiniteInputError("psh_check samples must be finite or -inf")
    mean = float(np.mean(ring))
    margin = mean - center
    violations: List[str] = []
    if margin < -tol * r * r:
        violations.append(f"center {center:.6g} exceeds circle mean {mean:.6g} by {-margin:.3g}")
    return PshReport(ok=not violations, center=center, mean=mean, margin=margin, violations=violations)


@dataclass
class PshAudit:
    ok: bool
    lines: int
    worst_margin: float
    violations: List[str] = field(default_factory=list)


def random_line_psh(
    seq: ShiftLikeSequence,
    centers: np.ndarray,
    r: float,
    n: int,
    rng: np.random.Generator,
    m: Optional[int] = None,
    tol: Optional[float] = None,
) -> PshAudit:
    """psh_check of psi_n along one random complex direction per center (columns of `centers`)."""
    _require_shiftlike(seq)
    centers = np.asarray(centers, dtype=complex)
    violations: List[str] = []
    worst = math.inf
    for col in range(centers.shape[1]):
        z0 = centers[:, col]
        v = rng.standard_normal(seq.k) + 1j * rng.standard_normal(seq.k)
        v /= np.linalg.norm(v)
        rep = psh_check(lambda zeta: psi_n(seq, tuple(z0 + zeta * v), n), r, m, tol)
        worst = min(worst, rep.margin)
        violations.extend(f"center {col}: {msg}" for msg in rep.violations)
    audit = PshAudit(ok=not violations, lines=int(centers.shape[1]), worst_margin=worst, violations=violations)
    log.info("[potential] psh audit: %d lines, worst margin %.3g", audit.lines, audit.worst_margin)
    return audit


# ---------------------------------------------------------------------
# Tables and audits
# ---------------------------------------------------------------------

def positive_real_table(
    seq: ShiftLikeSequence,
    xs: Sequence[float],
    y: float,
    ns: Sequence[int],
    M: float,
) -> List[List[float]]:
    """Rows (x, y, n, psi_n, envelope_n) along the positive real slice."""
    rows: List[List[float]] = []
    top = max(ns)
    for x in xs:
        ladder = phi_ladder(seq, (x, y), top)
        for n in ns:
            psi = _scaled(ladder[n].value, n)
            rows.append([float(x), float(y), int(n), psi, psi + math.ldexp(math.log(M), -n)])
    return rows


def positive_real_bound(c0: float, x: float, n: int) -> float:
    """Lower bound 2 log(c0 x) - 2^-n log c0 for psi_n on the positive real slice."""
    return 2.0 * math.log(c0 * x) - math.ldexp(math.log(c0), -n)


@dataclass
class RecursionAudit:
    ok: bool
    points: int
    recursion_violations: int
    monotone_violations: int
    bounded_violations: int
    violations: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)


def recursion_audit(
    seq: ShiftLikeSequence,
    points: np.ndarray,
    params: PotentialParams,
    n_max: int,
) -> RecursionAudit:
    """
    From the first n with phi_n <= c: phi_(n+1) <= (M + 1) phi_n^2, the
    envelope with M + 1 never increases, and the last psi stays negative.
    """
    points = np.asarray(points, dtype=complex)
    log_c = math.log(params.c)
    log_step = math.log(params.M_step)
    rec = mono = bounded = 0
    violations: List[str] = []
    for col in range(points.shape[1]):
        ladder = [lm.value for lm in phi_ladder(seq, tuple(points[:, col]), n_max)]
        start = next((j for j, v in enumerate(ladder) if v <= log_c), None)
        if start is None:
            continue
        for j in range(start, n_max):
            lo, hi = ladder[j], ladder[j + 1]
            if lo == -math.inf:
                break
            slack = 1e-9 * max(1.0, abs(hi))
            if hi > log_step + 2.0 * lo + slack:
                rec += 1
                violations.append(f"point {col} n={j}: recursion bound exceeded")
            env_lo = math.ldexp(lo + log_step, -j)
            env_hi = math.ldexp(hi + log_step, -(j + 1))
            if env_hi > env_lo + math.ldexp(slack, -j):
                mono += 1
                violations.append(f"point {col} n={j}: envelope increased")
        if not _scaled(ladder[-1], n_max) < 0.0:
            bounded += 1
            violations.append(f"point {col}: limiting psi not negative")
    audit = RecursionAudit(
        ok=not violations,
        points=int(points.shape[1]),
        recursion_violations=rec,
        monotone_violations=mono,
        bounded_violations=bounded,
        violations=violations,
        details={"M": params.M, "M_step": params.M_step, "c": params.c, "n_max": n_max},
    )
    if violations:
        log.warning("[potential] recursion audit: %d violations (first: %s)", len(violations), violations[0])
    return audit
