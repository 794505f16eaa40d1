"""
Automorphism steps, coefficient sequences and composed iteration.

Composition is zero-based everywhere: F(n) = F_n o ... o F_0, so
forward_orbit(seq, z, n) returns [z, F(0)(z), ..., F(n)(z)].

Every step carries two evaluation paths:
- apply / inverse on CPoint tuples of ExtComplex (exact dynamic range)
- apply_array / inverse_array on complex numpy arrays shaped (k, N)
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    PreconditionError,
    SequenceValidationError,
    UnsupportedOperationError,
)
from .num_core import (
    LN2,
    ExtComplex,
    LogMag,
    ZERO,
    from_native,
    to_native,
)

log = logging.getLogger(__name__)

CPoint = Tuple[ExtComplex, ...]


def as_cpoint(z: Sequence[Any]) -> CPoint:
    return tuple(from_native(v) if not isinstance(v, ExtComplex) else v for v in z)


def cpoint_native(z: Sequence[Any]) -> np.ndarray:
    return np.array([to_native(v) if isinstance(v, ExtComplex) else complex(v) for v in z], dtype=complex)


def _check_dim(z: Sequence[Any], k: int) -> None:
    if len(z) != k:
        raise DimensionMismatchError(f"point has dimension {len(z)}, map expects {k}")


# ---------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class PolySpec:
    """P(z) = sum c_i z^i with real coefficients c_0..c_d."""

    coeffs: Tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise SequenceValidationError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def validate_positive(self) -> None:
        """Construction-family constraint: c_0 > 0 and every c_i >= 0."""
        if self.coeffs[0] <= 0:
            raise SequenceValidationError(f"P(0)=c_0 must be > 0, got {self.coeffs[0]}")
        if any(c < 0 for c in self.coeffs):
            raise SequenceValidationError(f"coefficients must be non-negative: {self.coeffs}")

    def at(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_ext(self, z: ExtComplex) -> ExtComplex:
        acc = from_native(self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + from_native(c)
        return acc

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        acc = np.full_like(z, self.coeffs[-1], dtype=complex)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc


# ---------------------------------------------------------------------
# Coefficient sequences (stored as logs)
# ---------------------------------------------------------------------

class CoeffSequence:
    def log_a(self, n: int) -> float:
        raise NotImplementedError

    def log_mag(self, n: int) -> LogMag:
        return LogMag(self.log_a(n))

    def a(self, n: int) -> float:
        return self.log_mag(n).native()

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Generator(CoeffSequence):
    """log a_n = -K * g**n."""

    K: float
    g: float

    def __post_init__(self):
        if self.K <= 0:
            raise SequenceValidationError(f"generator needs K > 0, got {self.K}")

    def log_a(self, n: int) -> float:
        try:
            return -self.K * math.pow(self.g, n)
        except OverflowError:
            return -math.inf

    def describe(self) -> Dict[str, Any]:
        return {"kind": "generator", "K": self.K, "g": self.g}


@dataclass(frozen=True)
class ExplicitList(CoeffSequence):
    """Stored prefix of log a_n; beyond it the tail keeps squaring."""

    values: Tuple[float, ...]
    tail: Optional[Generator] = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise SequenceValidationError("explicit coefficient list is empty")

    @classmethod
    def from_values(cls, values: Sequence[float], tail: Optional[Generator] = None) -> "ExplicitList":
        return cls(tuple(math.log(v) if v > 0 else -math.inf for v in values), tail)

    def log_a(self, n: int) -> float:
        if n < len(self.values):
            return self.values[n]
        if self.tail is None:
            raise PreconditionError(f"explicit list has {len(self.values)} values, index {n} requested")
        v = self.values[-1]
        for j in range(len(self.values), n + 1):
            v = min(self.tail.log_a(j), 2.0 * v - LN2)
        return v

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "explicit",
            "log_values": list(self.values),
            "tail": self.tail.describe() if self.tail else None,
        }


@dataclass
class SequenceReport:
    ok: bool
    ordering: List[bool]
    root_decay: List[bool]
    violations: List[str]
    details: Dict[str, Any] = field(default_factory=dict)


def validate_sequence(c: CoeffSequence, n_max: int) -> SequenceReport:
    """
    Check 0 < a_{n+1} < a_n^2 < 1 and root decay 2^-n log a_n -> -inf,
    both in the log domain.
    """
    violations: List[str] = []
    n_top = n_max
    if isinstance(c, ExplicitList) and c.tail is None:
        n_top = min(n_max, len(c.values) - 1)

    ordering: List[bool] = []
    for n in range(max(n_top, 0)):
        la, lb = c.log_a(n), c.log_a(n + 1)
        ok = (lb > -math.inf) and lb < 2.0 * la < 0.0
        ordering.append(ok)
        if not ok:
            violations.append(f"ordering n={n}: log a_(n+1)={lb:.6g} vs 2 log a_n={2 * la:.6g}")

    root_decay: List[bool] = []
    if isinstance(c, Generator):
        ok = c.g > 2.0
        root_decay = [ok] * max(n_top, 1)
        if not ok:
            violations.append(f"root decay: g={c.g} <= 2 keeps 2^-n log a_n bounded")
    else:
        scaled = [math.ldexp(c.log_a(n), -n) for n in range(n_top + 1)]
        for n in range(1, len(scaled)):
            ok = scaled[n] < scaled[n - 1]
            root_decay.append(ok)
            if not ok:
                violations.append(f"root decay n={n}: 2^-n log a_n not decreasing")
        if isinstance(c, ExplicitList) and c.tail is not None and c.tail.g <= 2.0:
            root_decay.append(False)
            violations.append(f"root decay: tail g={c.tail.g} <= 2")

    report = SequenceReport(
        ok=not violations,
        ordering=ordering,
        root_decay=root_decay,
        violations=violations,
        details={"n_checked": n_top, "sequence": c.describe()},
    )
    if violations:
        log.info("[maps] sequence validation failed: %s", violations[0])
    return report


# ---------------------------------------------------------------------
# Automorphism steps
# ---------------------------------------------------------------------

class AutoStep:
    variant: ClassVar[str] = "AutoStep"
    fixes_origin: ClassVar[bool] = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def apply(self, z: CPoint) -> CPoint:
        raise NotImplementedError

    def inverse(self, w: CPoint) -> CPoint:
        raise NotImplementedError

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant}


@dataclass(frozen=True)
class ShiftLikeK(AutoStep):
    """z -> (z_1^2 P(z_1) + a z_k, a z_1, ..., a z_(k-1))."""

    a: LogMag
    P: PolySpec
    k: int = 2
    variant: ClassVar[str] = "ShiftLikeK"

    @property
    def dim(self) -> int:
        return self.k

    def apply(self, z: CPoint) -> CPoint:
        a = self.a.to_ext()
        z1 = z[0]
        head = z1 * z1 * self.P.eval_ext(z1) + a * z[-1]
        return (head,) + tuple(a * v for v in z[:-1])

    def inverse(self, w: CPoint) -> CPoint:
        if self.a.is_zero():
            raise PreconditionError("shift-like step with a_n = 0 is not invertible")
        a = self.a.to_ext()
        lead = tuple(v / a for v in w[1:])
        z1 = lead[0]
        last = (w[0] - z1 * z1 * self.P.eval_ext(z1)) / a
        return lead + (last,)

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        a = self.a.native()
        out = np.empty_like(Z)
        out[0] = Z[0] * Z[0] * self.P.eval_array(Z[0]) + a * Z[-1]
        out[1:] = a * Z[:-1]
        return out

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        a = self.a.native()
        out = np.empty_like(W)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out[:-1] = W[1:] / a
            z1 = out[0]
            out[-1] = (W[0] - z1 * z1 * self.P.eval_array(z1)) / a
        return out

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "log_a": self.a.value, "P": list(self.P.coeffs), "k": self.k}


@dataclass(frozen=True)
class ShiftLike2(ShiftLikeK):
    """(z_1, z_2) -> (a z_2 + z_1^2 P(z_1), a z_1)."""

    k: int = field(default=2, init=False)
    variant: ClassVar[str] = "ShiftLike2"


@dataclass(frozen=True)
class HenonLike(AutoStep):
    """(z_1, z_2) -> (a z_2 + p(z_1), a z_1), with p(0) = 0."""

    a: LogMag
    p: PolySpec
    variant: ClassVar[str] = "HenonLike"

    def __post_init__(self):
        if self.p.coeffs[0] != 0.0:
            raise SequenceValidationError("Henon-like step needs p(0) = 0 to fix the origin")

    @property
    def dim(self) -> int:
        return 2

    def apply(self, z: CPoint) -> CPoint:
        a = self.a.to_ext()
        return (a * z[1] + self.p.eval_ext(z[0]), a * z[0])

    def inverse(self, w: CPoint) -> CPoint:
        if self.a.is_zero():
            raise PreconditionError("Henon-like step with a = 0 is not invertible")
        a = self.a.to_ext()
        z1 = w[1] / a
        return (z1, (w[0] - self.p.eval_ext(z1)) / a)

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        a = self.a.native()
        return np.stack([a * Z[1] + self.p.eval_array(Z[0]), a * Z[0]])

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        a = self.a.native()
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            z1 = W[1] / a
            return np.stack([z1, (W[0] - self.p.eval_array(z1)) / a])

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "log_a": self.a.value, "p": list(self.p.coeffs)}


@dataclass(frozen=True)
class RosayRudin(AutoStep):
    """
    (z_1, z_2) -> (z_1 + z_2, (1 - z_2 - exp(z_1 + z_2)) / 2), conjugated by
    the translation taking the fixed point (2 m pi i, 0) to the origin.
    The exponential runs in native precision.
    """

    m: int = 0
    variant: ClassVar[str] = "RosayRudin"

    @property
    def dim(self) -> int:
        return 2

    @property
    def shift(self) -> complex:
        return 2j * math.pi * self.m

    def _fwd(self, z1: complex, z2: complex) -> Tuple[complex, complex]:
        u1 = z1 + self.shift
        s = u1 + z2
        return s - self.shift, 0.5 * (1.0 - z2 - cmath.exp(s))

    def _inv(self, w1: complex, w2: complex) -> Tuple[complex, complex]:
        u1 = w1 + self.shift
        z2 = 1.0 - 2.0 * w2 - cmath.exp(u1)
        return u1 - z2 - self.shift, z2

    def apply(self, z: CPoint) -> CPoint:
        return as_cpoint(self._fwd(to_native(z[0]), to_native(z[1])))

    def inverse(self, w: CPoint) -> CPoint:
        return as_cpoint(self._inv(to_native(w[0]), to_native(w[1])))

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            s = Z[0] + self.shift + Z[1]
            return np.stack([s - self.shift, 0.5 * (1.0 - Z[1] - np.exp(s))])

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            u1 = W[0] + self.shift
            z2 = 1.0 - 2.0 * W[1] - np.exp(u1)
            return np.stack([u1 - z2 - self.shift, z2])

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "m": self.m}


@dataclass(frozen=True)
class DiagLinear(AutoStep):
    """z -> alpha * z (alpha scalar or one entry per coordinate)."""

    alpha: Tuple[complex, ...]
    variant: ClassVar[str] = "DiagLinear"

    def __post_init__(self):
        alpha = tuple(complex(a) for a in self.alpha)
        if any(a == 0 for a in alpha):
            raise SequenceValidationError("diagonal entries must be non-zero")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def scalar(cls, alpha: complex, k: int = 2) -> "DiagLinear":
        return cls(tuple([alpha] * k))

    @property
    def dim(self) -> int:
        return len(self.alpha)

    def apply(self, z: CPoint) -> CPoint:
        return tuple(from_native(a) * v for a, v in zip(self.alpha, z))

    def inverse(self, w: CPoint) -> CPoint:
        return tuple(v / from_native(a) for a, v in zip(self.alpha, w))

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(self.alpha)[:, None] * Z if Z.ndim == 2 else np.asarray(self.alpha) * Z

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        return W / np.asarray(self.alpha)[:, None] if W.ndim == 2 else W / np.asarray(self.alpha)

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "alpha": [[a.real, a.imag] for a in self.alpha]}


@dataclass(frozen=True)
class Custom(AutoStep):
    """User closures acting on complex arrays shaped (k, ...)."""

    forward: Callable[[np.ndarray], np.ndarray]
    k: int = 2
    backward: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "custom"
    variant: ClassVar[str] = "Custom"

    @property
    def dim(self) -> int:
        return self.k

    def apply(self, z: CPoint) -> CPoint:
        return as_cpoint(self.forward(cpoint_native(z)))

    def inverse(self, w: CPoint) -> CPoint:
        if self.backward is None:
            raise UnsupportedOperationError(f"custom step '{self.label}' has no inverse")
        return as_cpoint(self.backward(cpoint_native(w)))

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(self.forward(Z), dtype=complex)

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        if self.backward is None:
            raise UnsupportedOperationError(f"custom step '{self.label}' has no inverse")
        return np.asarray(self.backward(W), dtype=complex)

    def describe(self) -> Dict[str, Any]:
        return {"variant": self.variant, "label": self.label, "k": self.k}


def bump_field(kind: str, Z: np.ndarray, r: float) -> np.ndarray:
    """Origin-fixing perturbation fields with sup 1 over B(0; r)."""
    out = np.zeros_like(Z)
    if kind == "linear":
        out[0] = Z[0] / r
    elif kind == "quadratic":
        out[0] = (Z[0] / r) ** 2
    elif kind == "cross":
        out[-1] = Z[0] / r
    else:
        raise PreconditionError(f"unknown bump kind '{kind}'")
    return out


@dataclass(frozen=True)
class Perturbed(AutoStep):
    """base + scale * bump; inverse by fixed-point iteration through base's inverse."""

    base: AutoStep
    scale: float
    bump: str = "linear"
    radius: float = 1.0
    variant: ClassVar[str] = "Perturbed"

    @property
    def dim(self) -> int:
        return self.base.dim

    def apply_array(self, Z: np.ndarray) -> np.ndarray:
        return self.base.apply_array(Z) + self.scale * bump_field(self.bump, Z, self.radius)

    def inverse_array(self, W: np.ndarray) -> np.ndarray:
        Z = self.base.inverse_array(W)
        for _ in range(60):
            Z = self.base.inverse_array(W - self.scale * bump_field(self.bump, Z, self.radius))
        return Z

    def apply(self, z: CPoint) -> CPoint:
        return as_cpoint(self.apply_array(cpoint_native(z)[:, None])[:, 0])

    def inverse(self, w: CPoint) -> CPoint:
        return as_cpoint(self.inverse_array(cpoint_native(w)[:, None])[:, 0])

    def describe(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "base": self.base.describe(),
            "scale": self.scale,
            "bump": self.bump,
            "radius": self.radius,
        }


def apply(step: AutoStep, z: Sequence[Any]) -> CPoint:
    _check_dim(z, step.dim)
    return step.apply(as_cpoint(z))


def apply_inverse(step: AutoStep, w: Sequence[Any]) -> CPoint:
    _check_dim(w, step.dim)
    return step.inverse(as_cpoint(w))


# ---------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------

class MapSequence:
    """Lazily indexed automorphism steps; step_at(n) is pure."""

    k: int = 2
    escape_rule: str = "norm"

    def step_at(self, n: int) -> AutoStep:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class ShiftLikeSequence(MapSequence):
    coeffs: CoeffSequence
    P: PolySpec
    k: int = 2
    escape_rule: str = "vr_plus"

    def step_at(self, n: int) -> AutoStep:
        if self.k == 2:
            return ShiftLike2(self.coeffs.log_mag(n), self.P)
        return ShiftLikeK(self.coeffs.log_mag(n), self.P, self.k)

    def describe(self) -> Dict[str, Any]:
        return {"family": "shiftlike", "k": self.k, "P": list(self.P.coeffs), "coeffs": self.coeffs.describe()}


@dataclass(frozen=True)
class HenonSequence(MapSequence):
    coeffs: CoeffSequence
    p: PolySpec
    k: int = field(default=2, init=False)
    escape_rule: str = "vr_plus"

    def step_at(self, n: int) -> AutoStep:
        return HenonLike(self.coeffs.log_mag(n), self.p)

    def describe(self) -> Dict[str, Any]:
        return {"family": "henon", "p": list(self.p.coeffs), "coeffs": self.coeffs.describe()}


@dataclass(frozen=True)
class PeriodicSequence(MapSequence):
    """Cycles through a fixed tuple of steps (period 1 = autonomous)."""

    steps: Tuple[AutoStep, ...]
    escape_rule: str = "norm"

    def __post_init__(self):
        if not self.steps:
            raise PreconditionError("periodic sequence needs at least one step")
        dims = {s.dim for s in self.steps}
        if len(dims) != 1:
            raise DimensionMismatchError(f"steps disagree on dimension: {sorted(dims)}")

    @property
    def k(self) -> int:  # type: ignore[override]
        return self.steps[0].dim

    def step_at(self, n: int) -> AutoStep:
        return self.steps[n % len(self.steps)]

    def describe(self) -> Dict[str, Any]:
        return {"family": "periodic", "steps": [s.describe() for s in self.steps]}


@dataclass(frozen=True)
class PerturbedSequence(MapSequence):
    """F_n = S_n + scales[n] * bump (zero perturbation past the stored scales)."""

    base: MapSequence
    scales: Tuple[float, ...]
    bump: str = "linear"
    radius: float = 1.0

    @property
    def k(self) -> int:  # type: ignore[override]
        return self.base.k

    @property
    def escape_rule(self) -> str:  # type: ignore[override]
        return self.base.escape_rule

    def step_at(self, n: int) -> AutoStep:
        base = self.base.step_at(n)
        if n >= len(self.scales) or self.scales[n] == 0.0:
            return base
        return Perturbed(base, self.scales[n], self.bump, self.radius)

    def describe(self) -> Dict[str, Any]:
        return {
            "family": "perturbed",
            "base": self.base.describe(),
            "scales": list(self.scales),
            "bump": self.bump,
            "radius": self.radius,
        }


def theorem_family(P: PolySpec, coeffs: CoeffSequence, k: int = 2) -> ShiftLikeSequence:
    P.validate_positive()
    return ShiftLikeSequence(coeffs, P, k)


def constant(step: AutoStep) -> PeriodicSequence:
    return PeriodicSequence((step,))


def forward_orbit(seq: MapSequence, z: Sequence[Any], n: int) -> List[CPoint]:
    """[z, F(0)(z), ..., F(n)(z)] in extended arithmetic; overflow stays sticky."""
    if n < 0:
        raise PreconditionError(f"orbit length must be >= 0, got {n}")
    _check_dim(z, seq.k)
    cur = as_cpoint(z)
    orbit = [cur]
    for j in range(n + 1):
        if any(v.overflow for v in cur):
            orbit.append(cur)
            continue
        cur = seq.step_at(j).apply(cur)
        orbit.append(cur)
    return orbit


def inverse_orbit(seq: MapSequence, w: Sequence[Any], n: int) -> CPoint:
    """F(n)^-1(w) = F_0^-1 o ... o F_n^-1 (w), step by step."""
    cur = as_cpoint(w)
    for j in range(n, -1, -1):
        cur = seq.step_at(j).inverse(cur)
    return cur


def forward_array(seq: MapSequence, Z: np.ndarray, n: int) -> np.ndarray:
    """F(n)(Z) on the native path (Z shaped (k, N))."""
    cur = np.asarray(Z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n + 1):
            cur = seq.step_at(j).apply_array(cur)
    return cur


def inverse_array(seq: MapSequence, W: np.ndarray, n: int) -> np.ndarray:
    cur = np.asarray(W, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n, -1, -1):
            cur = seq.step_at(j).inverse_array(cur)
    return cur


def is_origin_fixed(step: AutoStep) -> bool:
    zero = tuple([ZERO] * step.dim)
    return all(v.is_zero() for v in step.apply(zero))
