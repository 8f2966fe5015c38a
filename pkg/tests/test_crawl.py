import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from origami_loco.crawl import (
    FIRST, SECOND, CrawlParams, GeometryWarning, InfeasibleGeometry, LegParams, NonConvergence,
    chord_length, constraint_residuals, contact_mus, cycle_displacement, default_theta_profile,
    fd_accel, friction_force, friction_sweep, ground_reactions, leg_equivalent, ordering_flips,
    simulate_crawl, solve_state, transition_phases,
)

P = CrawlParams()
SYM = (LegParams(), LegParams())
FRONT_A = LegParams(h=20, H_leg=30, b=15, r=5)
REAR_A = LegParams(h=25, H_leg=30, b=15, r=5)


def test_leg_equivalent_worked_example():
    m, n, l, a_eq = leg_equivalent(FRONT_A, math.radians(30))
    c, s = math.sqrt(3) / 2, 0.5
    # 20 c - 10 s + 35 c and 20 s + 10 c + 35 s
    assert m == pytest.approx(55 * c - 5.0, abs=1e-12)
    assert m == pytest.approx(42.6313972081, abs=1e-9)
    assert n == pytest.approx(36.1602540378, abs=1e-9)
    assert l == pytest.approx(55.9016994375, abs=1e-9)
    assert a_eq == pytest.approx(0.703452275391, abs=1e-11)


def test_leg_equivalent_upright():
    m, n, l, a_eq = leg_equivalent(FRONT_A, 0.0)
    assert (m, n) == (55.0, 10.0)
    assert l == math.hypot(55, 10)
    assert a_eq == math.atan(10 / 55)


def test_leg_equivalent_degenerate():
    with pytest.raises(InfeasibleGeometry):
        leg_equivalent(LegParams(), math.radians(89.9))


@given(st.floats(0.01, 1.2))
def test_identical_legs_identical_outputs(alpha):
    assert leg_equivalent(LegParams(12, 20, 9, 3), alpha) == leg_equivalent(LegParams(12, 20, 9, 3), alpha)


def test_leg_validation():
    with pytest.raises(ValueError):
        LegParams(r=8.0, b=8.0)
    with pytest.raises(ValueError):
        LegParams(h=-1.0)
    with pytest.raises(ValueError):
        CrawlParams(mu_toe=0.0)
    with pytest.raises(ValueError):
        CrawlParams(mu_pelma=1.5)


def test_chord_length():
    assert chord_length(100.0, math.pi / 2) == pytest.approx(200 / math.pi, abs=1e-12)
    assert chord_length(100.0, math.pi / 2) == pytest.approx(63.6619772368, abs=1e-9)
    assert chord_length(100.0, 0.0) == 100.0
    assert chord_length(100.0, 1e-8) == pytest.approx(100.0, abs=1e-6 * 100)
    assert chord_length(100.0, math.pi) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=50)
@given(st.floats(0.01, 0.59))
def test_symmetric_legs_zero_beta(theta):
    s = solve_state(P, *SYM, theta)
    assert abs(s.beta) < 1e-10
    assert s.alpha_f == pytest.approx(theta, abs=1e-10)
    assert s.alpha_r == pytest.approx(theta, abs=1e-10)


@pytest.mark.parametrize("theta", [0.1, 0.3])
def test_asymmetric_state_residuals(theta):
    s = solve_state(P, FRONT_A, REAR_A, theta)
    r = constraint_residuals(P, FRONT_A, REAR_A, s)
    assert max(r.values()) < 1e-9
    # the taller rear leg tilts the chord towards the front
    assert s.beta < 0


def test_theta_bounds():
    for theta in (0.0, -0.1, P.theta_max):
        with pytest.raises(ValueError):
            solve_state(P, *SYM, theta)


def test_arcsin_infeasible():
    with pytest.raises(InfeasibleGeometry, match="arcsin"):
        solve_state(CrawlParams(L_arc=20), LegParams(h=100), LegParams(h=5), 0.3)


def test_iteration_cap():
    with pytest.raises(NonConvergence):
        solve_state(CrawlParams(max_iter=1), FRONT_A, REAR_A, 0.3)


def test_cycle_displacement_identity():
    s = solve_state(P, FRONT_A, REAR_A, 0.2)
    assert cycle_displacement(s, s, FRONT_A, REAR_A) == (0.0, 0.0, 0.0)


def test_symmetric_dy_vanishes():
    s0, s1 = solve_state(P, *SYM, 0.1), solve_state(P, *SYM, 0.3)
    assert cycle_displacement(s0, s1, *SYM)[2] == pytest.approx(0.0, abs=1e-12)


def test_cycle_displacement_term_by_term():
    s0, s1 = solve_state(P, FRONT_A, REAR_A, 0.1), solve_state(P, FRONT_A, REAR_A, 0.3)
    dx1, dx2, dy = cycle_displacement(s0, s1, FRONT_A, REAR_A)
    half = [s.a_chord * math.cos(s.beta) / 2 for s in (s0, s1)]
    front_x = [s.l_f * math.sin(s.alpha_f_eq) for s in (s0, s1)]
    rear_x = [s.l_r * math.sin(s.alpha_r_eq) for s in (s0, s1)]
    heights = [(s.l_f * math.cos(s.alpha_f_eq) - s.l_r * math.cos(s.alpha_r_eq)) / 2 for s in (s0, s1)]
    roll_f = FRONT_A.r * (s1.alpha_f_eq - s0.alpha_f_eq)
    roll_r = REAR_A.r * (s0.alpha_r_eq - s1.alpha_r_eq)
    assert dx1 == pytest.approx(front_x[1] - front_x[0] + half[0] - half[1] + roll_f, abs=1e-12)
    assert dx2 == pytest.approx(rear_x[0] - rear_x[1] + half[0] - half[1] + roll_r, abs=1e-12)
    assert dy == pytest.approx(heights[1] - heights[0], abs=1e-12)
    assert all(math.isfinite(v) for v in (dx1, dx2, dy))


def test_fd_accel():
    assert fd_accel(0.0, 1.0, 4.0, 1.0) == 2.0
    assert fd_accel(3.0, 3.0, 3.0, 0.01) == 0.0
    assert fd_accel(0.9**3, 1.0, 1.1**3, 0.1) == pytest.approx(6.0, abs=1e-9)
    with pytest.raises(ValueError):
        fd_accel(0, 0, 0, 0.0)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-100, 100), st.floats(0.1, 2.0))
def test_fd_exact_for_quadratics(c0, c1, c2, dt):
    x = [c0 + c1 * t + c2 * t * t for t in (0.0, dt, 2 * dt)]
    assert fd_accel(*x, dt) == pytest.approx(2 * c2, abs=1e-9 * (1 + abs(c2) + (abs(c0) + abs(c1)) / dt**2))


def test_static_reactions():
    for phase in (FIRST, SECOND):
        R = ground_reactions(P, phase, 0.0, 0.0, 0.3)
        assert abs(R.front - 0.49) < 1e-12 and abs(R.rear - 0.49) < 1e-12
        assert not R.contact_lost


def test_first_phase_example():
    R = ground_reactions(P, FIRST, 0.1, 0.0, 0.2)
    assert R.front == pytest.approx(0.515, abs=1e-12)
    assert R.rear == pytest.approx(0.465, abs=1e-12)


def test_second_phase_doubles_coupling():
    R = ground_reactions(P, SECOND, 0.1, 0.0, 0.2)
    assert R.front == pytest.approx(0.05 * (-1.0 + 9.8), abs=1e-12)
    assert R.rear == pytest.approx(0.05 * (1.0 + 9.8), abs=1e-12)


def test_contact_loss_flagged():
    R = ground_reactions(P, FIRST, 5.0, 0.0, 0.1)
    assert R.rear < 0 and R.contact_lost
    with pytest.raises(ValueError):
        ground_reactions(P, "third", 0, 0, 0.1)
    with pytest.raises(ValueError):
        ground_reactions(P, FIRST, 0, 0, 0.0)


@given(st.sampled_from([FIRST, SECOND]), st.floats(-20, 20), st.floats(-20, 20),
       st.floats(0.01, 1.0), st.floats(0.01, 5.0), st.floats(1.0, 20.0))
def test_vertical_balance(phase, ax, ay, mu, m, g):
    params = CrawlParams(mass=m, g=g)
    R = ground_reactions(params, phase, ax, ay, mu)
    assert R.front + R.rear - m * (ay + g) == pytest.approx(0.0, abs=1e-9)


def test_friction_force():
    assert friction_force(0.49, 0.3) == pytest.approx(0.147, abs=1e-15)
    assert friction_force(12.0, 0.0) == 0.0
    assert friction_force(0.49, 0.6) == pytest.approx(2 * friction_force(0.49, 0.3), abs=1e-15)


def test_contact_mus_swap():
    assert contact_mus(P, FIRST) == (0.4, 0.2)
    assert contact_mus(P, SECOND) == (0.2, 0.4)


def test_transition_phases():
    assert transition_phases([0.1, 0.2, 0.3, 0.2, 0.1]) == [FIRST, FIRST, SECOND, SECOND, SECOND]
    assert transition_phases([0.2, 0.2, 0.3]) == [FIRST, FIRST, FIRST]
    prof = default_theta_profile()
    assert len(prof) == 41 and prof[0] == prof[-1] == 0.1 and max(prof) == 0.5


def test_constant_profile_is_static():
    tr = simulate_crawl(P, SYM, [0.3] * 6)
    assert all(a == 0.0 for a in tr.ax + tr.ay)
    for F in tr.F_front + tr.F_rear:
        assert F == pytest.approx(0.49, abs=1e-12)


def test_trace_shape_and_balance():
    prof = default_theta_profile()
    tr = simulate_crawl(P, SYM, prof)
    assert len(tr) == len(prof)
    dts = [b - a for a, b in zip(tr.t, tr.t[1:])]
    assert max(dts) - min(dts) < 1e-12
    for f, r, ay in zip(tr.F_front, tr.F_rear, tr.ay):
        assert f + r - P.mass * (ay + P.g) == pytest.approx(0.0, abs=1e-9)
    assert tr.cycles == 1
    assert tr.dx_per_cycle > 0
    assert ordering_flips(tr)


def test_short_profile_rejected():
    with pytest.raises(ValueError):
        simulate_crawl(P, SYM, [0.1, 0.2])


def test_solver_error_carries_sample_index():
    with pytest.raises(InfeasibleGeometry, match="sample 0"):
        simulate_crawl(CrawlParams(L_arc=20), (LegParams(h=100), LegParams(h=5)), [0.3] * 3)


def test_geometry_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        simulate_crawl(CrawlParams(max_length=50.0), SYM, [0.1, 0.2, 0.1])
    msgs = [w for w in caught if issubclass(w.category, GeometryWarning)]
    assert len(msgs) == 1 and "footprint" in str(msgs[0].message)


def test_sweep():
    prof = default_theta_profile()
    rows = friction_sweep(P, SYM, prof, [0.1, 0.2, 0.3, 0.4, 0.5])
    assert len(rows) == 5
    dx = [r.summary()["dx_per_cycle_mm"] for r in rows]
    assert max(dx) - min(dx) < 1e-9
    peaks = [r.summary()["F_front_first_max_N"] for r in rows]
    assert len(set(peaks)) == 5
    with pytest.raises(ValueError):
        friction_sweep(P, SYM, prof, [])


def test_singleton_sweep_matches_simulation():
    prof = default_theta_profile()
    row = friction_sweep(P, SYM, prof, [0.3])[0]
    direct = simulate_crawl(CrawlParams(mu_pelma=0.3, mu_toe=0.3), SYM, prof)
    assert row.trace == direct
