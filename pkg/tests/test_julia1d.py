import numpy as np
import pytest

from core.errors import PreconditionError
from utils.julia1d import (
    Fate1D,
    GridSet,
    Poly1,
    attracting_fixed_point,
    attraction_radius,
    compact_components,
    dilate,
    fate1d,
    hyperbolicity_probe,
    image_of,
    julia_grid,
    nested_sequence,
    perturbed_orbits,
)

RECT = (0j, 3.0, 3.0)
SQUARE = Poly1((0.0, 0.0, 1.0))


def _disc(radius, res=101, width=2.0):
    g = GridSet.empty(0j, width, width, res)
    return g.with_bits(np.abs(g.centers()) <= radius)


def test_poly_degree_and_family():
    with pytest.raises(PreconditionError):
        Poly1((1.0, 2.0))
    q = Poly1.quartic_family(0.01, 0.02)
    assert q.degree == 4
    assert complex(q(1.0)) == pytest.approx(1.03)
    assert Poly1((0.0, 0.0, 1.0, 0.0, 0.0)).degree == 2


def test_attracting_fixed_point_of_square():
    assert attracting_fixed_point(SQUARE) == 0j
    assert attraction_radius(SQUARE, 0j) == 0.5


def test_fates():
    assert fate1d(SQUARE, 0.5, 100, 4.0, 0.5) is Fate1D.ATTRACTED0
    assert fate1d(SQUARE, 1.5, 100, 4.0, 0.5) is Fate1D.ESCAPED


def _long_run_fate(p, z, steps=1_000_000):
    z = complex(z)
    for _ in range(steps):
        if abs(z) > 1e8:
            return Fate1D.ESCAPED
        if abs(z) < 1e-12:
            return Fate1D.ATTRACTED0
        z = complex(p(z))
    return Fate1D.UNDECIDED


@pytest.mark.parametrize("z", [0.95, 0.97, 0.99, -0.95, 0.95j, 1.05, 0.5 + 0.5j])
def test_quartic_fates_match_long_run(z):
    quartic = Poly1.quartic_family(0.01, 0.01)
    fate = fate1d(quartic, z, 1000, quartic.escape_radius(), 0.5)
    assert fate is not Fate1D.UNDECIDED
    assert fate is _long_run_fate(quartic, z)
    if z == 0.95:
        assert fate is Fate1D.ATTRACTED0


def test_julia_of_square_is_the_unit_circle():
    J = julia_grid(SQUARE, RECT, 201)
    assert J.count() > 0
    radii = np.abs(J.points())
    assert np.all(np.abs(radii - 1.0) <= 2.0 * J.pixel_diagonal)
    assert J.diameter() == pytest.approx(2.0, abs=4 * J.pixel_diagonal)


def test_grid_set_algebra():
    a, b = _disc(0.5), _disc(0.3)
    assert b.issubset(a)
    assert (a - b).count() == a.count() - b.count()
    assert (a | b).count() == a.count()
    assert (a & b).count() == b.count()
    assert a.complement().count() == a.bits.size - a.count()
    with pytest.raises(PreconditionError):
        a | _disc(0.3, res=51)


def test_index_of_round_trips_pixel_centres():
    g = _disc(0.5)
    row, col, inside = g.index_of(g.points())
    assert inside.all()
    assert g.bits[row, col].all()


def test_dilation():
    g = GridSet.empty(0j, 2.0, 2.0, 101)
    g.bits[50, 50] = True
    grown = dilate(g, 0.2)
    assert g.issubset(grown)
    expected = np.pi * (0.2 / g.pixel[0]) ** 2
    assert 0.8 * expected < grown.count() < 1.2 * expected


def test_dilation_below_half_pixel_is_flagged():
    g = _disc(0.5)
    same = dilate(g, 0.1 * g.pixel[0])
    assert np.array_equal(same.bits, g.bits)
    assert any("below half a pixel" in n for n in same.notes)


def test_image_of_disc_stays_inside():
    C = _disc(0.5)
    assert image_of(SQUARE, C).issubset(C)


@pytest.mark.parametrize(
    "poly, status",
    [
        (SQUARE, "PASS"),
        (Poly1.quartic_family(0.01, 0.01), "PASS"),
        (Poly1((-1.0, 0.0, 1.0)), "PASS_WITH_NOTE"),
        (Poly1((0.3j, 0.0, 1.0)), "FAIL"),
    ],
)
def test_hyperbolicity_probe(poly, status):
    assert hyperbolicity_probe(poly).status == status


def test_second_critical_orbit_on_another_cycle_fails():
    # 0 -> 1 -> 0 exactly; the other critical point -2b/3a ~ -4.28 sits next
    # to an attracting fixed point
    a, b = -69 / 512, -443 / 512
    cubic = Poly1((1.0, 0.0, b, a))
    report = hyperbolicity_probe(cubic)
    assert report.status == "FAIL"
    fates = {d["fate"]: d for d in report.critical}
    assert fates["cycle"]["period"] == 2
    assert fates["other_cycle"]["period"] == 1
    assert fates["other_cycle"]["point"].real == pytest.approx(-2 * b / (3 * a))
    assert any("avoiding 0" in n for n in report.notes)


def test_compact_components_of_square():
    C0, E0, J = compact_components(SQUARE, 0.2, RECT, 201)
    assert np.abs(C0.points()).max() < 1.0
    assert np.abs(E0.points()).min() > 1.0
    assert not (C0 & E0).count()


def test_nested_sequence_shrinks():
    nested = nested_sequence(SQUARE, 0.2, 30, RECT, 201)
    assert nested.steps
    assert all(c > 0 for c in nested.cprimes())
    prev = nested.C0
    for step in nested.steps:
        assert step.C.issubset(prev)
        prev = step.C
    assert nested.bound_for_step(len(nested.steps)) == 0.0
    assert len(nested.csv_rows()) == len(nested.steps)


def test_unbounded_margin_is_constant_and_invariant():
    nested = nested_sequence(SQUARE, 0.2, 30, RECT, 201)
    etas = {step.eta for step in nested.steps}
    assert len(etas) == 1
    eta = etas.pop()
    assert 0.0 < eta < np.inf
    assert dilate(image_of(SQUARE, nested.E0), 2.0 * eta).issubset(nested.E0)


def test_compact_components_need_origin_in_frame():
    with pytest.raises(PreconditionError):
        compact_components(SQUARE, 0.2, (5.0 + 0j, 1.0, 1.0), 51)


@pytest.mark.parametrize("poly", [SQUARE, Poly1.quartic_family(0.01, 0.01)])
def test_perturbed_orbit_dichotomy(poly):
    rng = np.random.default_rng(7)
    nested = nested_sequence(poly, 0.2, 30, RECT, 201)
    inner, outer = nested.C0.points(), nested.E0.points()
    starts = np.concatenate([inner[rng.integers(0, inner.size, 100)], outer[rng.integers(0, outer.size, 100)]])
    expect = np.concatenate([np.ones(100, bool), np.zeros(100, bool)])
    report = perturbed_orbits(poly, nested, starts, expect, rng)
    assert report.ok
    assert report.compact_to_zero == 100
    assert report.unbounded_escaped == 100
    assert report.mismatched == 0
