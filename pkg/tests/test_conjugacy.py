import numpy as np
import pytest

from core.errors import PreconditionError
from core.maps import DiagLinear, constant
from utils.conjugacy import (
    ball_invariance,
    basin_containment,
    bump_perturbation,
    check_perturbation,
    conjugacy_profile,
    default_constants,
    fd_jacobians,
    operator_norms,
    reschedule,
    sphere_samples,
    tolerance_schedule,
    verify_uub,
)

N_MAX = 30


@pytest.fixture
def S():
    return constant(DiagLinear.scalar(0.5))


@pytest.fixture
def witness(S):
    return verify_uub(S, 1.0, 0.6, N_MAX, rng=np.random.default_rng(1))


@pytest.fixture
def sched(S, witness):
    return tolerance_schedule(witness, S, N_MAX, rng=np.random.default_rng(2))


def _cloud(w, rng):
    return sphere_samples(2, w.r0, 4, 64, rng)


def test_default_constants():
    assert default_constants(1.0, 0.6) == pytest.approx((0.2, 0.1))
    assert default_constants(10.0, 0.5) == pytest.approx((0.5, 0.25))


def test_sphere_samples_lie_on_spheres(rng):
    Z = sphere_samples(3, 2.0, 3, 10, rng)
    assert Z.shape == (3, 3 * (10 + 12))
    radii = np.linalg.norm(Z, axis=0)
    assert np.allclose(np.sort(np.unique(radii.round(12))), [0.5, 1.0, 2.0])


def test_uniform_bound_witness(witness):
    assert witness.ok
    assert witness.r0 == pytest.approx(0.6)
    assert witness.Ctilde == pytest.approx(0.7)
    assert witness.worst_ratio == pytest.approx(0.5)


def test_uniform_bound_violation_is_reported(S):
    w = verify_uub(S, 1.0, 0.4, 5, rng=np.random.default_rng(1))
    assert not w.ok
    assert w.violation[0] == 0
    with pytest.raises(PreconditionError):
        tolerance_schedule(w, S, 5)


def test_witness_constant_ranges(S):
    with pytest.raises(PreconditionError):
        verify_uub(S, 1.0, 1.2, 5)
    with pytest.raises(PreconditionError):
        verify_uub(S, 1.0, 0.6, 5, eps=0.5)


def test_fd_jacobian_and_norm_of_linear_map(rng):
    W = rng.standard_normal((2, 5)) + 0j
    J = fd_jacobians(lambda Z: np.array([[3.0], [1.0]]) * Z, W, 1e-6)
    assert np.allclose(J[0], np.diag([3.0, 1.0]))
    assert np.allclose(operator_norms(J, 50), 3.0)


def test_schedule_inverse_lipschitz_doubles(sched):
    assert sched.n_max == N_MAX
    for rec in sched.records:
        assert rec.M_raw == pytest.approx(2.0 ** rec.n, rel=0.1)
        assert rec.eps_n == pytest.approx(0.5 * 0.2 ** (rec.n + 1) / rec.M)
        assert 0.0 < rec.delta_n <= 0.1 * 0.7 ** rec.n * 0.6 + 1e-18
    assert sched.provenance["samples"] == 4 * (64 + 8)
    assert len(sched.csv_rows()) == N_MAX + 1


@pytest.mark.parametrize("bump", ["linear", "quadratic", "cross"])
def test_admissible_perturbations_conjugate(S, sched, bump, rng):
    F = bump_perturbation(S, sched, 0.5, bump)
    assert check_perturbation(S, F, sched).ok
    assert basin_containment(F, sched).ok
    assert ball_invariance(F, sched).ok
    profile = conjugacy_profile(S, F, sched, _cloud(sched.witness, rng))
    assert profile.certificate_ok, profile.violations[:3]
    assert profile.excluded == 0
    assert profile.step_sup[0] <= profile.step_bound[0]


def test_oversized_perturbation_fails(S, sched):
    F = bump_perturbation(S, sched, 2.0, "linear")
    check = check_perturbation(S, F, sched)
    assert not check.ok
    assert check.violations[0].startswith("n=0")


def test_unperturbed_profile_is_identity(S, sched, rng):
    profile = conjugacy_profile(S, S, sched, _cloud(sched.witness, rng))
    assert profile.ok
    assert max(profile.step_sup) == 0.0
    assert profile.separation > 0.0


@pytest.mark.parametrize("r_small", [0.9, 0.5, 0.25])
def test_reschedule_rederives_constants_for_the_smaller_ball(S, witness, r_small):
    w = reschedule(witness, r_small, S, 3).witness
    assert w.r == r_small and w.C == witness.C
    assert 0.0 < w.eps < r_small - w.C * r_small
    assert 0.0 < w.delta < min(w.eps, 1.0 - w.C)
    assert w.Ctilde == w.C + w.delta
    assert w.eps <= witness.eps and w.delta <= witness.delta


def test_reschedule_at_full_radius_is_identical(S, witness):
    same = reschedule(witness, witness.r, S, 8, rng=np.random.default_rng(2))
    ref = tolerance_schedule(witness, S, 8, rng=np.random.default_rng(2))
    assert same.witness == ref.witness
    assert same.records == ref.records


def test_half_radius_tolerances_never_grow(S, witness, sched):
    half = reschedule(witness, witness.r / 2, S, N_MAX, rng=np.random.default_rng(2))
    for big, small in zip(sched.records, half.records):
        assert small.delta_n <= big.delta_n, small.n


@pytest.mark.parametrize("r_small", [0.0, -0.5, 2.0])
def test_reschedule_rejects_radii_outside_the_ball(S, witness, r_small):
    with pytest.raises(PreconditionError):
        reschedule(witness, r_small, S, 3)


def test_unknown_bump_is_rejected(S, sched):
    F = bump_perturbation(S, sched, 0.5, "wiggle")
    with pytest.raises(PreconditionError):
        check_perturbation(S, F, sched)
