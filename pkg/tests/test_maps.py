import math

import numpy as np
import pytest

from core.num_core import log_modulus
from core.errors import DimensionMismatchError, SequenceValidationError, UnsupportedOperationError
from core.maps import (
    Custom,
    DiagLinear,
    ExplicitList,
    Generator,
    HenonLike,
    LogMag,
    PolySpec,
    RosayRudin,
    ShiftLike2,
    ShiftLikeK,
    apply,
    apply_inverse,
    constant,
    cpoint_native,
    forward_array,
    forward_orbit,
    inverse_array,
    inverse_orbit,
    is_origin_fixed,
    theorem_family,
    validate_sequence,
)

ONE = PolySpec((1.0,))


def _close(z, w, tol=1e-12):
    return np.allclose(cpoint_native(z), np.asarray(w, dtype=complex), rtol=tol, atol=tol)


def test_generator_logs():
    gen = Generator(1.0, 3.0)
    assert [gen.log_a(n) for n in range(4)] == [-1.0, -3.0, -9.0, -27.0]


def test_generator_validates():
    report = validate_sequence(Generator(1.0, 3.0), 20)
    assert report.ok
    assert all(report.ordering) and all(report.root_decay)


def test_slow_generator_fails_root_decay():
    report = validate_sequence(Generator(1.0, 2.0), 10)
    assert not report.ok
    assert any("root decay" in v for v in report.violations)


def test_explicit_list_ordering_violation_is_reported():
    seq = ExplicitList.from_values([0.1, 0.05])
    report = validate_sequence(seq, 5)
    assert not report.ok
    assert "ordering n=0" in report.violations[0]


def test_explicit_list_tail_keeps_squaring():
    seq = ExplicitList((-1.0, -3.0), tail=Generator(1.0, 3.0))
    assert seq.log_a(2) == pytest.approx(min(-9.0, 2 * -3.0 - math.log(2)))
    assert validate_sequence(seq, 12).ok


def test_positive_polynomial_constraint():
    with pytest.raises(SequenceValidationError):
        PolySpec((0.0, 1.0)).validate_positive()
    with pytest.raises(SequenceValidationError):
        theorem_family(PolySpec((1.0, -1.0)), Generator(1.0, 3.0))


@pytest.mark.parametrize(
    "step",
    [
        ShiftLike2(LogMag(-1.0), PolySpec((1.0, 1.0))),
        ShiftLikeK(LogMag(-2.0), ONE, 3),
        HenonLike(LogMag(-0.5), PolySpec((0.0, 0.0, 1.0, 0.5))),
        RosayRudin(0),
        RosayRudin(1),
        DiagLinear.scalar(0.5 + 0.1j),
    ],
)
def test_inverse_round_trip(step, rng):
    for _ in range(20):
        z = tuple(0.3 * (rng.standard_normal(step.dim) + 1j * rng.standard_normal(step.dim)))
        back = apply_inverse(step, apply(step, z))
        assert _close(back, z, 1e-9)


@pytest.mark.parametrize(
    "step",
    [ShiftLike2(LogMag(-1.0), ONE), HenonLike(LogMag(-1.0), PolySpec((0.0, 0.0, 1.0))), RosayRudin(2)],
)
def test_origin_is_fixed(step):
    assert np.allclose(step.apply_array(np.zeros((2, 1), dtype=complex)), 0.0, atol=1e-12)


def test_polynomial_steps_fix_origin_exactly():
    assert is_origin_fixed(ShiftLike2(LogMag(-1.0), ONE))
    assert is_origin_fixed(HenonLike(LogMag(-1.0), PolySpec((0.0, 0.0, 1.0))))


def test_shiftlike_formula():
    step = ShiftLike2(LogMag(math.log(0.5)), PolySpec((1.0, 2.0)))
    w = cpoint_native(apply(step, (1.0 + 0j, 2.0 + 0j)))
    # z1^2 P(z1) + a z2 = 1 * 3 + 1, a z1 = 0.5
    assert np.allclose(w, [4.0, 0.5])


def test_array_and_exact_paths_agree(rng):
    seq = theorem_family(PolySpec((1.0, 1.0)), Generator(1.0, 3.0))
    Z = 0.4 * (rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16)))
    W = forward_array(seq, Z, 2)
    for col in range(Z.shape[1]):
        exact = forward_orbit(seq, tuple(Z[:, col]), 2)[-1]
        assert _close(exact, W[:, col], 1e-10)


def test_forward_orbit_length_and_zero_based_composition():
    seq = constant(DiagLinear.scalar(0.5))
    orbit = forward_orbit(seq, (1.0, 2.0), 3)
    assert len(orbit) == 5
    assert _close(orbit[-1], [0.5 ** 4, 2 * 0.5 ** 4])


def test_exact_orbit_survives_double_underflow():
    seq = theorem_family(ONE, Generator(1.0, 3.0))
    orbit = forward_orbit(seq, (0.1, 0.1), 12)
    last = orbit[-1][0]
    assert not last.is_zero()
    assert log_modulus(last).value < -700


def test_inverse_orbit_undoes_forward():
    seq = theorem_family(ONE, Generator(0.5, 3.0))
    z = (0.2 + 0.1j, -0.1 + 0.05j)
    w = forward_orbit(seq, z, 3)[-1]
    assert _close(inverse_orbit(seq, w, 3), z, 1e-6)
    W = forward_array(seq, np.array(z)[:, None], 3)
    assert np.allclose(inverse_array(seq, W, 3)[:, 0], z, atol=1e-6)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(ShiftLike2(LogMag(-1.0), ONE), (1.0, 2.0, 3.0))


def test_custom_without_inverse():
    step = Custom(lambda Z: 0.5 * Z, k=2, label="half")
    assert _close(apply(step, (2.0, 4.0)), [1.0, 2.0])
    with pytest.raises(UnsupportedOperationError):
        apply_inverse(step, (1.0, 1.0))


def test_henon_requires_fixed_origin():
    with pytest.raises(SequenceValidationError):
        HenonLike(LogMag(-1.0), PolySpec((1.0, 0.0, 1.0)))
