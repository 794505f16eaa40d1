import math

import numpy as np
import pytest

from core.errors import NonFiniteInputError
from core.num_core import (
    ExtComplex,
    LogMag,
    ZERO,
    ext_abs2,
    ext_add,
    ext_div,
    ext_modulus,
    ext_mul,
    ext_scale2,
    ext_sub,
    from_native,
    log_modulus,
    real_to_float,
    to_native,
)

EPS = np.finfo(float).eps


def _random_complex(rng, n, lo=-8, hi=8):
    mag = 10.0 ** rng.uniform(lo, hi, n)
    return mag * np.exp(2j * np.pi * rng.random(n))


@pytest.mark.parametrize("z", [0j, 1 + 0j, -3.5 + 2j, 1e-300 + 0j, 1e300 - 1e300j, 5e-324 + 0j])
def test_embedding_is_exact(z):
    assert to_native(from_native(z)) == z


def test_non_finite_input_is_rejected():
    with pytest.raises(NonFiniteInputError):
        from_native(complex(math.nan, 0.0))
    with pytest.raises(NonFiniteInputError):
        from_native(math.inf)


def test_products_and_sums_agree_with_native(rng):
    a = _random_complex(rng, 2000)
    b = _random_complex(rng, 2000)
    for x, y in zip(a, b):
        ex, ey = from_native(complex(x)), from_native(complex(y))
        prod = to_native(ext_mul(ex, ey))
        assert abs(prod - x * y) <= 4 * EPS * abs(x) * abs(y)
        total = to_native(ext_add(ex, ey))
        assert abs(total - (x + y)) <= 2 * EPS * (abs(x) + abs(y))


def test_division_inverts_multiplication(rng):
    for x, y in zip(_random_complex(rng, 200), _random_complex(rng, 200)):
        q = to_native(ext_div(from_native(complex(x)), from_native(complex(y))))
        assert abs(q - x / y) <= 8 * EPS * abs(x / y)


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ext_div(from_native(1.0), ZERO)


def test_thousand_factor_product_matches_log_oracle():
    acc = from_native(1.0)
    factor = from_native(1e-300)
    for _ in range(1000):
        acc = acc * factor
    expected = 1000 * math.log(1e-300)
    assert log_modulus(acc).value == pytest.approx(expected, rel=1e-9)
    assert to_native(acc) == 0j


def test_repeated_squaring_tracks_doubling_log():
    z = from_native(0.5 + 0.5j)
    for _ in range(40):
        z = ext_mul(z, z)
    expected = 2.0 ** 40 * math.log(abs(0.5 + 0.5j))
    assert log_modulus(z).value == pytest.approx(expected, rel=1e-9)


def test_overflow_is_sticky():
    huge = LogMag(1e30).to_ext()
    assert huge.overflow
    assert (huge + from_native(1.0)).overflow
    assert (huge * from_native(2.0)).overflow
    assert log_modulus(huge).is_escape()
    assert to_native(ext_sub(huge, from_native(3.0))).real == math.inf


def test_underflow_flushes_to_zero():
    tiny = LogMag(-1e30).to_ext()
    assert isinstance(tiny, ExtComplex)
    assert tiny.is_zero()
    assert log_modulus(tiny).is_zero()


def test_modulus_below_the_double_range():
    z = ext_scale2(from_native(3 + 4j), -5000)
    mod, sq = ext_modulus(z), ext_abs2(z)
    assert (mod.mantissa, mod.exp2) == (1.25, 2 - 5000)
    assert (sq.mantissa, sq.exp2) == (1.5625, 4 - 10000)
    assert real_to_float(ext_modulus(from_native(3 + 4j))) == 5.0
    assert ext_modulus(ZERO).is_zero()


def test_cancellation_is_exact_zero():
    z = from_native(1.25 - 7.0j)
    assert (z - z).is_zero()


def test_logmag_native_flushes():
    assert LogMag(-1e6).native() == 0.0
    assert LogMag(1e6).native() == math.inf
    assert LogMag.of(2.0).value == pytest.approx(math.log(2.0))
    with pytest.raises(NonFiniteInputError):
        LogMag.of(-1.0)


@pytest.mark.slow
def test_randomised_ops_stay_within_two_ulp(rng):
    # 4 ops x 250k operand pairs
    a = _random_complex(rng, 250_000, -4, 4).real
    b = _random_complex(rng, 250_000, -4, 4).real
    ops = [(ext_mul, np.multiply), (ext_add, np.add), (ext_sub, np.subtract), (ext_div, np.divide)]
    for x, y in zip(a, b):
        ex, ey = from_native(float(x)), from_native(float(y))
        for ext_op, native_op in ops:
            want = float(native_op(x, y))
            got = to_native(ext_op(ex, ey)).real
            assert abs(got - want) <= 2 * np.spacing(abs(want)), (ext_op.__name__, x, y)
