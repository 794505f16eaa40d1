import numpy as np
import pytest

from core.errors import PreconditionError
from core.maps import Generator, PolySpec, RosayRudin, constant, theorem_family
from utils.basin import (
    BasinParams,
    Fate,
    FateGrid,
    SliceWindow,
    boundary_pixels,
    boundary_witness,
    classify_point,
    classify_points,
    default_c,
    default_escape_radius,
    exhaustion_index,
    make_params,
    nesting_audit,
    region_audit,
    region_of,
    render_slice,
    sample_attracted,
)

ONE = PolySpec((1.0,))


@pytest.fixture
def seq():
    return theorem_family(ONE, Generator(1.0, 3.0))


@pytest.fixture
def params(seq):
    return make_params(seq, n_max=60)


def test_default_parameters(params):
    assert params.c == 0.5
    assert params.M == 1.0
    assert params.nest_ratio == pytest.approx(0.75)
    assert params.R_escape == 16.0
    assert params.n0 == 1


def test_default_c_solves_half_condition():
    c = default_c(PolySpec((1.0, 1.0)))
    assert c * (1 + c) == pytest.approx(0.5)
    assert default_escape_radius(PolySpec((1.0, 1.0))) == 16.0


def test_params_validation():
    with pytest.raises(PreconditionError):
        BasinParams(c=1.5, R_escape=10.0, n_max=10)
    with pytest.raises(PreconditionError):
        BasinParams(c=0.5, R_escape=0.0, n_max=10)


def test_origin_is_attracted_at_step_zero(seq, params):
    fate = classify_point(seq, (0j, 0j), params)
    assert fate.tag is Fate.ATTRACTED
    assert fate.n == 0


def test_polydisc_is_in_the_basin(seq, params, rng):
    r = params.c * np.sqrt(rng.random((2, 300)))
    Z = r * np.exp(2j * np.pi * rng.random((2, 300)))
    codes, _ = classify_points(seq, Z, params)
    assert np.all(codes == int(Fate.ATTRACTED))


def test_large_first_coordinate_escapes(seq, params):
    fate = classify_point(seq, (5.0, 0.0), params)
    assert fate.tag is Fate.ESCAPED
    assert fate.n == 0


def test_budget_exhaustion_is_undecided(seq):
    p = BasinParams(c=0.5, R_escape=16.0, n_max=1)
    assert classify_point(seq, (0.9, 0.0), p).tag is Fate.UNDECIDED


def test_regions():
    assert region_of((1.0, 1.0), 16.0).kind == "V_R"
    plus = region_of((20.0, 1.0), 16.0)
    assert plus.kind == "V_R+" and plus.indices == (1,)
    minus = region_of((1.0, 20.0), 16.0)
    assert minus.kind == "V_R-" and minus.indices == (2,)


def test_exhaustion_index(seq, params):
    assert exhaustion_index(seq, (0j, 0j), params) == 0
    assert exhaustion_index(seq, (5.0, 0.0), params) is None


def test_nesting_has_no_reexits(seq, params, rng):
    Z = sample_attracted(seq, params, 500, 1.0, rng)
    report = nesting_audit(seq, Z, params)
    assert report.attracted == 500
    assert report.reexits == 0


@pytest.mark.slow
def test_nesting_holds_on_ten_thousand_points(seq, params, rng):
    Z = sample_attracted(seq, params, 10_000, 1.0, rng)
    report = nesting_audit(seq, Z, params)
    assert report.attracted == 10_000
    assert report.reexits == 0


def test_region_audit_escape_lemma(seq, params, rng):
    Z = 3.0 * (rng.standard_normal((2, 400)) + 1j * rng.standard_normal((2, 400)))
    audit = region_audit(seq, Z, params, params.R_escape)
    assert audit.escape_lemma_violations == 0


def test_slice_window_rejects_parallel_directions():
    with pytest.raises(PreconditionError):
        SliceWindow((0j, 0j), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (4, 4))


def test_render_contains_attracted_center(seq, params):
    window = SliceWindow.coordinate_plane(2, 3.0, 41)
    grid = render_slice(seq, window, params)
    assert grid.fate_at(20, 20).tag is Fate.ATTRACTED
    assert grid.fate_at(0, 0).tag is Fate.ESCAPED
    shades = grid.shades()
    assert shades.dtype == np.uint8
    assert shades[20, 20] <= 100 and shades[0, 0] >= 156


def test_render_is_thread_count_independent(seq, params):
    window = SliceWindow.real_plane(2, 3.0, 33)
    one = render_slice(seq, window, params, threads=1)
    two = render_slice(seq, window, params, threads=2)
    assert np.array_equal(one.codes, two.codes)
    assert np.array_equal(one.first_n, two.first_n)


def test_boundary_pixels_of_a_split_grid():
    window = SliceWindow.coordinate_plane(2, 2.0, 8)
    codes = np.where(np.arange(8)[None, :] < 4, int(Fate.ATTRACTED), int(Fate.ESCAPED)).repeat(8, axis=0)
    grid = FateGrid(window, codes.astype(np.int8), np.zeros((8, 8), dtype=np.int32))
    edge = boundary_pixels(grid)
    assert edge.count() == 8
    assert edge.bits[:, 3].all()


def test_boundary_witness_near_unit_circle(seq, params, rng):
    res = boundary_witness(seq, (1.0, 0.0), 0.2, 256, params, rng)
    assert res.ok
    assert res.fate1.tag is Fate.ATTRACTED
    assert res.fate2.tag is Fate.ESCAPED


def test_boundary_witness_fails_deep_inside(seq, params, rng):
    res = boundary_witness(seq, (0.0, 0.0), 0.05, 64, params, rng)
    assert not res.ok
    assert "escaped" in res.reason


def test_rosay_rudin_basin_contains_small_ball():
    seq = constant(RosayRudin(0))
    params = make_params(seq, c=0.1)
    assert params.n0 == 0
    assert classify_point(seq, (0.01, 0.01), params).tag is Fate.ATTRACTED
    assert classify_point(seq, (0j, 0j), params).n == 0
