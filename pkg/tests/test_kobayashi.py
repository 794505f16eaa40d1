import math

import numpy as np
import pytest

from core.errors import PreconditionError
from core.maps import DiagLinear, Generator, PolySpec, as_cpoint, constant, cpoint_native, theorem_family
from utils.basin import make_params
from utils.kobayashi import disc_witness, log_norm, rescaled, tangent_step

P0 = (0.05, 0.05)
XI = (1 / math.sqrt(2), 1 / math.sqrt(2))


@pytest.fixture
def seq():
    return theorem_family(PolySpec((1.0,)), Generator(1.0, 3.0))


@pytest.fixture
def params(seq):
    return make_params(seq, n_max=40)


def test_log_norm():
    assert log_norm(as_cpoint((3.0, 4.0))) == pytest.approx(math.log(5.0))
    assert log_norm(as_cpoint((0.0, 0.0))) == -math.inf


def test_tangent_step_of_linear_map():
    step = DiagLinear.scalar(0.5)
    out = cpoint_native(tangent_step(step, as_cpoint((0.1, 0.2)), as_cpoint(XI)))
    assert np.allclose(out, 0.5 * np.array(XI))


BASIN_POINTS = [P0, (-0.05, 0.03), (0.04j, -0.06), (0.07, 0.0), (0.02 - 0.02j, 0.05j)]


@pytest.mark.parametrize("R", [10.0, 100.0, 1000.0])
def test_disc_witness_on_shiftlike_basin(seq, params, R):
    wit = disc_witness(seq, P0, XI, R, 32, params)
    assert wit.n is not None and wit.n <= 3
    assert wit.ok
    assert wit.containment_violations == 0
    assert wit.rel_error < 0.01
    assert wit.center_error == pytest.approx(0.0, abs=1e-9)
    assert wit.fd_step in [10.0 ** -j for j in range(2, 11)]


@pytest.mark.slow
@pytest.mark.parametrize("R", [10.0, 100.0, 1000.0])
@pytest.mark.parametrize("p", BASIN_POINTS)
def test_disc_witnesses_at_several_basin_points(seq, params, p, R):
    wit = disc_witness(seq, p, XI, R, 32, params)
    assert wit.ok, wit.reason
    assert wit.containment_violations == 0
    assert wit.rel_error < 0.01
    assert wit.center_error == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("R, n", [(10.0, 4), (1000.0, 10)])
def test_disc_witness_derivative_for_linear_contraction(R, n):
    seq = constant(DiagLinear.scalar(0.5))
    params = make_params(seq, n_max=40)
    wit = disc_witness(seq, P0, XI, R, 16, params)
    # smallest n with 2^-(n+1) (|p| + R) < c = 1/2
    assert wit.n == n
    assert wit.rel_error < 1e-3
    assert np.allclose(wit.fd_derivative, R * np.array(XI), rtol=1e-6)


def test_no_admissible_index_is_reported():
    seq = constant(DiagLinear.scalar(0.5))
    params = make_params(seq, n_max=5)
    wit = disc_witness(seq, P0, XI, 1e30, 8, params)
    assert wit.n is None
    assert not wit.ok
    assert "no admissible n" in wit.reason


def test_rescaled_grows_the_index(seq, params):
    wits = rescaled(seq, P0, XI, [10.0, 1000.0], 16, params)
    assert [w.R for w in wits] == [10.0, 1000.0]
    assert wits[0].n <= wits[1].n


@pytest.mark.parametrize(
    "p, xi, R",
    [(P0, XI, 0.0), (P0, (1.0, 1.0), 10.0), ((5.0, 0.0), XI, 10.0)],
)
def test_disc_witness_preconditions(seq, params, p, xi, R):
    with pytest.raises(PreconditionError):
        disc_witness(seq, p, xi, R, 8, params)
