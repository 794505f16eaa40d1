# utils/conjugacy.py
"""
Perturbation certificates for sequences with a uniform upper bound at the
origin: the witness (r, C, eps, delta), the tolerance schedule delta_n,
per-step perturbation checks and the conjugacy trace phi_n = S(n)^-1 o F(n)
with its Cauchy-rate certificate.

Sampled sup quantities are inflated (M_n) or deflated (delta~_n) so that a
PASS is conservative. Sample counts are kept as provenance.

Usage:
    w = verify_uub(S, r=1.0, C=0.6, n_max=12)
    sched = tolerance_schedule(w, S, n_max=12)
    check_perturbation(S, F, sched).ok
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from core.config import get_config
from core.errors import JacobianEstimationError, PreconditionError
from core.maps import MapSequence, PerturbedSequence, inverse_array

log = logging.getLogger(__name__)

MACHINE_EPS = float(np.finfo(float).eps)


# ---------------------------------------------------------------------
# Sample clouds
# ---------------------------------------------------------------------

def sphere_samples(k: int, r: float, radii: int, per_radius: int, rng: np.random.Generator) -> np.ndarray:
    """Points on spheres of radius r * 2^-j plus the coordinate-axis points, shape (k, N)."""
    cols: List[np.ndarray] = []
    for j in range(radii):
        rad = r * 0.5 ** j
        g = rng.standard_normal((k, per_radius)) + 1j * rng.standard_normal((k, per_radius))
        cols.append(rad * g / np.linalg.norm(g, axis=0))
        axes = np.zeros((k, 4 * k), dtype=complex)
        for i in range(k):
            axes[i, 4 * i:4 * i + 4] = rad * np.array([1, -1, 1j, -1j])
        cols.append(axes)
    return np.concatenate(cols, axis=1)


def _cfg_int(value: Optional[int], key: str) -> int:
    return int(value if value is not None else get_config()[key])


# ---------------------------------------------------------------------
# Uniform upper bound
# ---------------------------------------------------------------------

@dataclass
class UUBWitness:
    r: float
    C: float
    r0: float
    eps: float
    delta: float
    Ctilde: float
    ok: bool = True
    violation: Optional[Tuple[int, Tuple[complex, ...]]] = None
    samples: int = 0
    worst_ratio: float = 0.0

    def describe(self) -> Dict[str, Any]:
        return {
            "r": self.r, "C": self.C, "r0": self.r0, "eps": self.eps,
            "delta": self.delta, "Ctilde": self.Ctilde, "ok": self.ok,
            "samples": self.samples, "worst_ratio": self.worst_ratio,
        }


def default_constants(r: float, C: float) -> Tuple[float, float]:
    eps = min(0.5 * (r - C * r), 0.5)
    delta = 0.5 * min(eps, 1.0 - C)
    return eps, delta


def verify_uub(
    S: MapSequence,
    r: float,
    C: float,
    n_max: int,
    samples: Optional[int] = None,
    eps: Optional[float] = None,
    delta: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> UUBWitness:
    """Check ||S_n(z)|| < C ||z|| on sphere samples of B(0; r) for n <= n_max."""
    if not 0.0 < C < 1.0 or r <= 0:
        raise PreconditionError(f"need 0 < C < 1 and r > 0, got C={C}, r={r}")
    d_eps, d_delta = default_constants(r, C)
    eps = d_eps if eps is None else eps
    delta = d_delta if delta is None else delta
    if not 0.0 < eps < r - C * r:
        raise PreconditionError(f"eps must lie in (0, r - C r), got {eps}")
    if not 0.0 < delta < min(eps, 1.0 - C):
        raise PreconditionError(f"delta must lie in (0, min(eps, 1 - C)), got {delta}")
    rng = rng if rng is not None else np.random.default_rng(get_config()["seed"])
    Z = sphere_samples(S.k, r, _cfg_int(None, "sphere_radii"), _cfg_int(samples, "sphere_samples"), rng)
    norms = np.linalg.norm(Z, axis=0)
    w = UUBWitness(r=r, C=C, r0=C * r, eps=eps, delta=delta, Ctilde=C + delta, samples=int(Z.shape[1]))
    with np.errstate(all="ignore"):
        for n in range(n_max + 1):
            ratio = np.linalg.norm(S.step_at(n).apply_array(Z), axis=0) / norms
            ratio = np.where(np.isfinite(ratio), ratio, np.inf)
            w.worst_ratio = max(w.worst_ratio, float(ratio.max()))
            bad = np.flatnonzero(~(ratio < C))
            if bad.size:
                w.ok = False
                w.violation = (n, tuple(Z[:, bad[0]]))
                log.info("[conjugacy] uniform bound violated at n=%d (ratio %.4g)", n, ratio[bad[0]])
                return w
    return w


# ---------------------------------------------------------------------
# Tolerance schedule
# ---------------------------------------------------------------------

def fd_jacobians(fn, W: np.ndarray, h: float) -> np.ndarray:
    """Central-difference complex Jacobians of a holomorphic map at each column of W; shape (N, k, k)."""
    k, N = W.shape
    E = np.eye(k, dtype=complex) * h
    shifted = W[:, :, None] + E[:, None, :]
    plus = fn(shifted.reshape(k, N * k)).reshape(k, N, k)
    minus = fn((W[:, :, None] - E[:, None, :]).reshape(k, N * k)).reshape(k, N, k)
    return np.transpose((plus - minus) / (2.0 * h), (1, 0, 2))


def operator_norms(J: np.ndarray, iters: int) -> np.ndarray:
    """Largest singular values of a batch of matrices by power iteration on J^H J."""
    A = np.einsum("nji,njk->nik", J.conj(), J)
    start = np.arange(1, A.shape[1] + 1) * (1.0 + 0.37j)
    x = np.tile(start / np.linalg.norm(start), (A.shape[0], 1))
    for _ in range(iters):
        y = np.einsum("nij,nj->ni", A, x)
        ny = np.linalg.norm(y, axis=1, keepdims=True)
        x = np.where(ny > 0, y / np.where(ny > 0, ny, 1.0), x)
    lam = np.real(np.einsum("ni,ni->n", x.conj(), np.einsum("nij,nj->ni", A, x)))
    return np.sqrt(np.maximum(lam, 0.0))


@dataclass
class ToleranceRecord:
    n: int
    M_raw: float
    M: float
    eps_n: float
    dtilde_raw: float
    dtilde: float
    delta_n: float


@dataclass
class ToleranceSchedule:
    witness: UUBWitness
    records: List[ToleranceRecord] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def delta_at(self, n: int) -> float:
        return self.records[n].delta_n

    @property
    def n_max(self) -> int:
        return len(self.records) - 1

    def csv_rows(self) -> List[List[float]]:
        return [[r.n, r.M_raw, r.M, r.eps_n, r.dtilde_raw, r.dtilde, r.delta_n] for r in self.records]


SCHEDULE_HEADER = ["n", "M_raw", "M", "eps_n", "dtilde_raw", "dtilde", "delta_n"]


def _inverse_lipschitz(S: MapSequence, n: int, cloud: np.ndarray, h: float, iters: int) -> float:
    """sup over the cloud of ||D(S(n-1))^-1||, with S(-1) the identity."""
    if n == 0:
        return 1.0
    J = fd_jacobians(lambda W: inverse_array(S, W, n - 1), cloud, h)
    bad = np.flatnonzero(~np.all(np.isfinite(J), axis=(1, 2)))
    if bad.size:
        raise JacobianEstimationError(
            f"non-finite finite-difference Jacobian of S({n - 1})^-1 at sample {bad[0]} (h={h:.3g})"
        )
    best = float(operator_norms(J, iters).max())
    if best == 0.0:
        raise JacobianEstimationError(f"degenerate Jacobian estimate for S({n - 1})^-1")
    return best


def _continuity_radius(S: MapSequence, n: int, cloud: np.ndarray, dirs: np.ndarray, eps_n: float, start: float) -> float:
    """Largest t = start * 2^-j with sampled ||S_n^-1(w + t u) - S_n^-1(w)|| < eps_n."""
    step = S.step_at(n)
    base = step.inverse_array(cloud)
    t = start
    with np.errstate(all="ignore"):
        for _ in range(400):
            moved = step.inverse_array(cloud + t * dirs)
            worst = np.linalg.norm(moved - base, axis=0).max()
            if np.isfinite(worst) and worst < eps_n:
                return t
            t *= 0.5
    raise JacobianEstimationError(f"modulus of continuity search for S_{n}^-1 did not settle")


def tolerance_schedule(
    w: UUBWitness,
    S: MapSequence,
    n_max: int,
    samples: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> ToleranceSchedule:
    """M_n, eps_n = eps^(n+1) / (2 M_n), delta~_n and delta_n = min(delta Ctilde^n r0, delta~_n)."""
    if not w.ok:
        raise PreconditionError("tolerance schedule needs a passing uniform-bound witness")
    cfg = get_config()
    rng = rng if rng is not None else np.random.default_rng(cfg["seed"])
    cloud = sphere_samples(S.k, w.r, int(cfg["sphere_radii"]), _cfg_int(samples, "sphere_samples"), rng)
    g = rng.standard_normal(cloud.shape) + 1j * rng.standard_normal(cloud.shape)
    dirs = g / np.linalg.norm(g, axis=0)
    h = float(cfg["fd_rel_step"]) * w.r
    iters = int(cfg["power_iters"])
    m_safety = float(cfg["m_safety"])
    d_safety = float(cfg["delta_safety"])

    sched = ToleranceSchedule(
        witness=w,
        provenance={
            "samples": int(cloud.shape[1]),
            "radii": int(cfg["sphere_radii"]),
            "fd_step": h,
            "power_iters": iters,
            "m_safety": m_safety,
            "delta_safety": d_safety,
        },
    )
    for n in range(n_max + 1):
        M_raw = _inverse_lipschitz(S, n, cloud, h, iters)
        M = M_raw if n == 0 else m_safety * M_raw
        eps_n = 0.5 * w.eps ** (n + 1) / M
        raw = _continuity_radius(S, n, cloud, dirs, eps_n, w.r)
        dtilde = d_safety * raw
        delta_n = min(w.delta * w.Ctilde ** n * w.r0, dtilde)
        sched.records.append(ToleranceRecord(n, M_raw, M, eps_n, raw, dtilde, delta_n))
        log.debug("[conjugacy] schedule n=%d M=%.4g eps_n=%.3g delta_n=%.3g", n, M, eps_n, delta_n)
    log.info("[conjugacy] schedule built to n=%d from %d samples", n_max, cloud.shape[1])
    return sched


def reschedule(
    w: UUBWitness,
    r_small: float,
    S: MapSequence,
    n_max: int,
    samples: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> ToleranceSchedule:
    """Schedule for the smaller ball B(0; r_small) with C unchanged.

    eps and delta are rederived for r_small and never exceed the original
    ones, so 0 < eps < r_small - C r_small and delta_n only shrinks.
    """
    if not 0.0 < r_small <= w.r:
        raise PreconditionError(f"r_small must lie in (0, {w.r}], got {r_small}")
    if r_small == w.r:
        return tolerance_schedule(w, S, n_max, samples, rng)
    d_eps, d_delta = default_constants(r_small, w.C)
    eps = min(d_eps, w.eps)
    delta = min(d_delta, w.delta, 0.5 * eps)
    small = UUBWitness(
        r=r_small, C=w.C, r0=w.C * r_small, eps=eps, delta=delta, Ctilde=w.C + delta,
        ok=w.ok, samples=w.samples, worst_ratio=w.worst_ratio,
    )
    log.info("[conjugacy] rescheduled to r=%.4g (eps=%.4g, delta=%.4g)", r_small, eps, delta)
    return tolerance_schedule(small, S, n_max, samples, rng)


# ---------------------------------------------------------------------
# Perturbations
# ---------------------------------------------------------------------

def bump_perturbation(S: MapSequence, sched: ToleranceSchedule, factor: float, bump: str = "linear") -> PerturbedSequence:
    """F_n = S_n + factor * delta_n * bump, the bump having sup 1 over B(0; r)."""
    scales = tuple(factor * rec.delta_n for rec in sched.records)
    return PerturbedSequence(S, scales, bump, sched.witness.r)


@dataclass
class PerturbationCheck:
    ok: bool
    rows: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)


def check_perturbation(
    S: MapSequence,
    F: MapSequence,
    sched: ToleranceSchedule,
    samples: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> PerturbationCheck:
    """sup ||F_n - S_n|| over a cloud in B(0; r) against delta_n, per n."""
    if S.k != F.k:
        raise PreconditionError(f"dimension mismatch: S has k={S.k}, F has k={F.k}")
    rng = rng if rng is not None else np.random.default_rng(get_config()["seed"] + 1)
    cloud = sphere_samples(S.k, sched.witness.r, int(get_config()["sphere_radii"]),
                           _cfg_int(samples, "sphere_samples"), rng)
    out = PerturbationCheck(ok=True)
    for rec in sched.records:
        diff = F.step_at(rec.n).apply_array(cloud) - S.step_at(rec.n).apply_array(cloud)
        sup = float(np.linalg.norm(diff, axis=0).max())
        passed = sup < rec.delta_n
        out.rows.append({"n": rec.n, "sup_diff": sup, "delta_n": rec.delta_n, "pass": passed})
        if not passed:
            out.ok = False
            out.violations.append(f"n={rec.n}: sup ||F_n - S_n|| = {sup:.4g} >= delta_n = {rec.delta_n:.4g}")
    return out


def basin_containment(F: MapSequence, sched: ToleranceSchedule, samples: Optional[int] = None,
                      rng: Optional[np.random.Generator] = None) -> PerturbationCheck:
    """||F(n)(z)|| <= Ctilde^(n+1) r0 for z on spheres of B(0; r0)."""
    w = sched.witness
    rng = rng if rng is not None else np.random.default_rng(get_config()["seed"] + 2)
    cur = sphere_samples(F.k, w.r0, int(get_config()["sphere_radii"]), _cfg_int(samples, "sphere_samples"), rng)
    out = PerturbationCheck(ok=True)
    with np.errstate(all="ignore"):
        for n in range(sched.n_max + 1):
            cur = F.step_at(n).apply_array(cur)
            sup = float(np.linalg.norm(cur, axis=0).max())
            bound = w.Ctilde ** (n + 1) * w.r0 * (1 + 1e-9)
            passed = sup <= bound
            out.rows.append({"n": n, "sup_norm": sup, "bound": bound, "pass": passed})
            if not passed:
                out.ok = False
                out.violations.append(f"n={n}: sup ||F(n)(z)|| = {sup:.4g} > {bound:.4g}")
    return out


def ball_invariance(F: MapSequence, sched: ToleranceSchedule, samples: Optional[int] = None,
                    rng: Optional[np.random.Generator] = None) -> PerturbationCheck:
    """F_n(B(0; r)) inside B(0; r), single steps, sphere samples."""
    w = sched.witness
    rng = rng if rng is not None else np.random.default_rng(get_config()["seed"] + 3)
    cloud = sphere_samples(F.k, w.r, int(get_config()["sphere_radii"]), _cfg_int(samples, "sphere_samples"), rng)
    out = PerturbationCheck(ok=True)
    for n in range(sched.n_max + 1):
        sup = float(np.linalg.norm(F.step_at(n).apply_array(cloud), axis=0).max())
        passed = sup < w.r
        out.rows.append({"n": n, "sup_norm": sup, "bound": w.r, "pass": passed})
        if not passed:
            out.ok = False
            out.violations.append(f"n={n}: F_n leaves B(0; r) (sup {sup:.4g})")
    return out


# ---------------------------------------------------------------------
# Conjugacy trace
# ---------------------------------------------------------------------

@dataclass
class ConjugacyProfile:
    step_sup: List[float]
    step_bound: List[float]
    certificate_ok: bool
    worst_slack: float
    excluded: int
    separation: float
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.certificate_ok

    def csv_rows(self) -> List[List[float]]:
        return [[n, s, b] for n, (s, b) in enumerate(zip(self.step_sup, self.step_bound))]


PROFILE_HEADER = ["n", "sup_phi_step", "eps_pow_n_plus_1"]


def conjugacy_profile(
    S: MapSequence,
    F: MapSequence,
    sched: ToleranceSchedule,
    K: np.ndarray,
    n_max: Optional[int] = None,
) -> ConjugacyProfile:
    """
    phi_n = S(n)^-1 o F(n) on the cloud K, step by step. Certificate:
    sup ||phi_n - phi_m|| <= eps^(n+1) / (1 - eps) for observed n < m,
    up to a rounding allowance.
    """
    n_max = sched.n_max if n_max is None else n_max
    eps = sched.witness.eps
    K = np.asarray(K, dtype=complex)
    phis: List[np.ndarray] = []
    cur = K
    with np.errstate(all="ignore"):
        for n in range(n_max + 1):
            cur = F.step_at(n).apply_array(cur)
            phis.append(inverse_array(S, cur, n))
    stack = np.stack(phis)  # (n+1, k, N)
    good = np.all(np.isfinite(stack), axis=(0, 1)) & np.all(np.abs(stack) < 1e100, axis=(0, 1))
    excluded = int((~good).sum())
    if excluded:
        log.warning("[conjugacy] %d samples left the validated ball and were excluded", excluded)
    stack = stack[:, :, good]
    sup_phi = float(np.abs(stack).max()) if stack.size else 0.0

    step_sup, step_bound = [], []
    for n in range(n_max):
        step_sup.append(float(np.linalg.norm(stack[n + 1] - stack[n], axis=0).max()) if stack.size else 0.0)
        step_bound.append(eps ** (n + 1))

    violations: List[str] = []
    worst = math.inf
    for n in range(n_max + 1):
        for m in range(n + 1, n_max + 1):
            gap = float(np.linalg.norm(stack[m] - stack[n], axis=0).max()) if stack.size else 0.0
            allowance = 64.0 * MACHINE_EPS * (m + 1) * max(1.0, sup_phi)
            bound = eps ** (n + 1) / (1.0 - eps) + allowance
            worst = min(worst, bound - gap)
            if gap > bound:
                violations.append(f"n={n}, m={m}: sup ||phi_n - phi_m|| = {gap:.4g} > {bound:.4g}")

    separation = math.inf
    if stack.shape[-1] >= 2:
        last = stack[-1]
        real = np.vstack([last.real, last.imag]).T
        separation = float(pdist(real).min())

    profile = ConjugacyProfile(
        step_sup=step_sup,
        step_bound=step_bound,
        certificate_ok=not violations,
        worst_slack=worst,
        excluded=excluded,
        separation=separation,
        violations=violations,
    )
    log.info("[conjugacy] profile n_max=%d certificate=%s separation=%.3g",
             n_max, "PASS" if profile.certificate_ok else "FAIL", separation)
    return profile
