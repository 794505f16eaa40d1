import math

import numpy as np
import pytest

from core.errors import PreconditionError
from utils.dimension import (
    box_count,
    boxdim_estimate,
    count_rows,
    eps_schedule,
    gamma_content,
    hausdorff_distance,
    product_points,
    reference_set,
)
from utils.julia1d import GridSet

RES = 401


def _schedule(S):
    return eps_schedule(min(S.pixel), 1.5, 8)


def test_eps_schedule_endpoints():
    eps = eps_schedule(0.01, 2.0, 5)
    assert len(eps) == 5
    assert eps[0] == pytest.approx(2.0)
    assert eps[-1] == pytest.approx(0.02)
    assert all(a > b for a, b in zip(eps, eps[1:]))
    with pytest.raises(PreconditionError):
        eps_schedule(0.0, 2.0, 5)


def test_point_has_dimension_zero():
    S = reference_set("point", RES)
    est = boxdim_estimate(S, _schedule(S))
    assert est.slope == pytest.approx(0.0, abs=0.05)


def test_circle_has_dimension_one():
    S = reference_set("circle", RES)
    est = boxdim_estimate(S, _schedule(S))
    assert est.slope == pytest.approx(1.0, abs=0.1)
    assert est.r2 > 0.99


def test_filled_square_has_dimension_two():
    S = reference_set("square", RES)
    est = boxdim_estimate(S, _schedule(S))
    assert est.slope == pytest.approx(2.0, abs=0.1)


def test_box_count_of_unit_square_points():
    pts = np.array([[0.0, 0.0], [0.99, 0.0], [0.0, 0.99], [0.99, 0.99]])
    assert box_count(pts, 0.5) == 4
    assert box_count(pts, 1.0) == 1


def test_box_count_is_thread_count_independent():
    S = reference_set("circle", RES)
    assert box_count(S, 0.05, threads=1) == box_count(S, 0.05, threads=2)


def test_gamma_content_of_circle_tracks_length():
    S = reference_set("circle", RES)
    stats = gamma_content(S, 1.0, 0.05)
    assert stats.gamma == pytest.approx(stats.count * 0.05)
    assert 2 * math.pi < stats.gamma < 4 * 2 * math.pi


def test_count_rows():
    S = reference_set("square", 101)
    rows = count_rows(S, [0.5, 0.25])
    assert [r[0] for r in rows] == [0.5, 0.25]
    assert rows[1][1] > rows[0][1]
    assert rows[0][3] == pytest.approx(math.log(rows[0][1]))


def _ring(radius, res=RES, extent=3.0):
    g = GridSet.empty(0j, extent, extent, res)
    return g.with_bits(np.abs(np.abs(g.centers()) - radius) <= min(g.pixel) / math.sqrt(2.0))


def test_hausdorff_distance_of_concentric_circle_rasters():
    outer, inner = _ring(1.0), _ring(0.5)
    assert hausdorff_distance(outer, inner) == pytest.approx(0.5, abs=2 * outer.pixel_diagonal)


def test_hausdorff_distance_of_concentric_circle_samples():
    theta = np.linspace(0.0, 2 * np.pi, 1000, endpoint=False)
    outer, inner = np.exp(1j * theta), 0.5 * np.exp(1j * theta)
    assert hausdorff_distance(outer, inner) == pytest.approx(0.5, abs=1e-12)


def test_hausdorff_metric_axioms(rng):
    A, B, C = (rng.standard_normal((50, 3)) for _ in range(3))
    assert hausdorff_distance(A, A) == 0.0
    assert hausdorff_distance(A, B) == pytest.approx(hausdorff_distance(B, A))
    assert hausdorff_distance(A, C) <= hausdorff_distance(A, B) + hausdorff_distance(B, C) + 1e-12


def test_product_points():
    P = product_points(np.array([0j, 1j]), np.array([[1.0], [2.0], [3.0]]))
    assert P.shape == (6, 3)
    assert P[0].tolist() == [0.0, 0.0, 1.0]
    with pytest.raises(PreconditionError):
        product_points(np.zeros((10, 2)), np.zeros((10, 2)), limit=50)


@pytest.mark.parametrize(
    "call",
    [
        lambda: box_count(np.zeros((3, 2)), 0.0),
        lambda: box_count(reference_set("circle", 101), 1e-4),
        lambda: boxdim_estimate(np.zeros((3, 2)), [1.0, 0.5, 0.1]),
        lambda: boxdim_estimate(GridSet.empty(0j, 1.0, 1.0, 11), [1.0, 0.5, 0.2, 0.1]),
        lambda: hausdorff_distance(np.zeros((0, 2)), np.zeros((2, 2))),
        lambda: hausdorff_distance(np.zeros((2, 2)), np.zeros((2, 3))),
        lambda: reference_set("torus", 51),
    ],
)
def test_preconditions(call):
    with pytest.raises(PreconditionError):
        call()
