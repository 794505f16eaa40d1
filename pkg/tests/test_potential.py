import math

import numpy as np
import pytest

from core.errors import PreconditionError
from core.maps import Generator, HenonSequence, PolySpec, theorem_family
from utils.basin import make_params, sample_attracted
from utils.potential import (
    PotentialParams,
    converged_psi,
    envelope_n,
    phi_ladder,
    phi_n,
    positive_real_bound,
    positive_real_table,
    psh_check,
    psi_n,
    random_line_psh,
    recursion_audit,
)


@pytest.fixture
def seq():
    # P = 1 + z, so c_0 = 1
    return theorem_family(PolySpec((1.0, 1.0)), Generator(1.0, 3.0))


@pytest.fixture
def params(seq):
    return make_params(seq)


def test_potential_constants(seq, params):
    pp = PotentialParams.for_sequence(seq, params.c)
    assert pp.M == pytest.approx(1.0 + params.c)
    assert pp.M_step == pytest.approx(pp.M + 1.0)
    assert pp.bound_holds(rng=np.random.default_rng(0))


def test_ladder_keeps_exact_logs_past_double_range(seq):
    ladder = phi_ladder(seq, (0.1, 0.0), 15)
    assert len(ladder) == 16
    assert ladder[-1].value < -1e3
    assert math.isfinite(psi_n(seq, (0.1, 0.0), 15))


def test_phi_n_at_origin_is_the_coefficient(seq):
    assert phi_n(seq, (0.0, 0.0), 4).value == seq.coeffs.log_a(4)
    assert phi_n(seq, (0.1, 0.05), 6).value >= seq.coeffs.log_a(6)


def test_positive_real_bracket(seq, params):
    xs = np.geomspace(0.01 * params.c, params.c, 50, endpoint=False)
    values = []
    for x in xs:
        lim = converged_psi(seq, (x, 0.0))
        assert lim.converged
        assert positive_real_bound(1.0, x, lim.n) - 1e-6 <= lim.value < 0.0
        values.append(lim.value)
    assert max(values) - min(values) > 0.5


def test_envelope_decreases_from_entry(seq, params):
    pp = PotentialParams.for_sequence(seq, params.c)
    z = (0.2, 0.1)
    env = [envelope_n(seq, z, n, pp.M_step) for n in range(1, 20)]
    assert all(b <= a + 1e-12 for a, b in zip(env, env[1:]))


def test_recursion_audit_on_attracted_points(seq, params, rng):
    pp = PotentialParams.for_sequence(seq, params.c)
    Z = sample_attracted(seq, params, 200, 0.8, rng)
    audit = recursion_audit(seq, Z, pp, 30)
    assert audit.ok, audit.violations[:3]


@pytest.mark.slow
def test_envelope_never_increases_on_a_thousand_points(seq, params, rng):
    pp = PotentialParams.for_sequence(seq, params.c)
    Z = sample_attracted(seq, params, 1000, 0.8, rng)
    assert Z.shape[1] == 1000
    audit = recursion_audit(seq, Z, pp, 30)
    assert audit.points == 1000
    assert audit.monotone_violations == 0
    assert audit.ok, audit.violations[:3]


def test_positive_real_table_shape(seq, params):
    rows = positive_real_table(seq, [0.1, 0.2], 0.0, [1, 2, 4], params.M)
    assert len(rows) == 6
    x, y, n, psi, env = rows[0]
    assert (x, y, n) == (0.1, 0.0, 1)
    assert env >= psi


def test_psh_check_accepts_log_modulus():
    report = psh_check(lambda z: math.log(abs(1.0 + z)), 0.5)
    assert report.ok
    assert report.margin == pytest.approx(0.0, abs=1e-9)


def test_psh_check_rejects_superharmonic():
    report = psh_check(lambda z: -abs(z) ** 2, 0.5)
    assert not report.ok
    assert report.violations


def test_psh_check_center_at_minus_infinity():
    report = psh_check(lambda z: math.log(abs(z)) if z != 0 else -math.inf, 0.1)
    assert report.ok


def test_psi_is_psh_on_random_lines(seq, rng):
    centers = 0.3 * np.sqrt(rng.random((2, 20))) * np.exp(2j * np.pi * rng.random((2, 20)))
    audit = random_line_psh(seq, centers, 0.05, 8, rng)
    assert audit.ok, audit.violations[:3]


def test_ladder_needs_shiftlike():
    henon = HenonSequence(Generator(1.0, 3.0), PolySpec((0.0, 0.0, 1.0)))
    with pytest.raises(PreconditionError):
        phi_ladder(henon, (0.1, 0.1), 3)
