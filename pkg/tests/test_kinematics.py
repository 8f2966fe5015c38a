import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import step_by_step_fk
from origami_loco.kinematics import (
    ArmParams, DHRow, HomTransform, closed_form_pose, compare_fk, coupled_joint_values,
    dh_matrix, dh_transform, default_dh_table, end_plate_normal, forward_kinematics,
    parse_dh_table, literal_dh_table, rotation_angle_between,
)
from origami_loco.tower import TowerGeometry, tower_height

ARM = ArmParams()
FLAT_START = ArmParams(tower=TowerGeometry(theta_int=0.0))

angles = st.floats(-math.pi, math.pi)
lengths = st.floats(-50.0, 50.0)
joints = st.tuples(*[st.floats(0.0, 1.0)] * 3).map(lambda u: [v * ARM.joint_limit() for v in u])


def oracle_pose(params, q):
    return HomTransform(np.array(step_by_step_fk(params, q)))


def test_identity_row():
    assert np.array_equal(dh_matrix(0.0, 0.0, 0.0, 0.0), np.eye(4))


def test_pure_z_rotation():
    m = dh_matrix(0.0, 0.0, 0.0, math.pi / 2)
    np.testing.assert_allclose(m[:3, :3], [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)


def test_twist_offset_translation():
    m = dh_matrix(math.pi / 2, 10.0, 5.0, 0.0)
    expected = [[1, 0, 0, 10], [0, 0, -1, 0], [0, 1, 0, 5], [0, 0, 0, 1]]
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_revolute_row_adds_offset():
    row = DHRow(alpha=0.0, a=0.0, d="Ls", theta="VAR", offset=math.radians(90))
    T = dh_transform(row, 0.0, {"Ls": 16.0})
    np.testing.assert_allclose(T.matrix, dh_matrix(0, 0, 16.0, math.pi / 2), atol=1e-15)


def test_prismatic_row_needs_value():
    row = DHRow(alpha=0.0, a=0.0, d="VAR", theta="0")
    with pytest.raises(ValueError):
        dh_transform(row)
    assert dh_transform(row, 12.5).translation[2] == 12.5


def test_coupled_values_at_rest():
    theta_t, d = coupled_joint_values(FLAT_START, [0, 0, 0])
    assert theta_t == (0.0, 0.0, 0.0)
    assert d == (31.0, 31.0, 25.0)


def test_coupled_values_include_initial_twist():
    q = [0.1, 0.2, 0.3]
    theta_t, d = coupled_joint_values(ARM, q)
    for i in range(3):
        assert theta_t[i] == pytest.approx(math.radians(7) + q[i], abs=1e-15)
    H = [tower_height(ARM.tower, t) for t in theta_t]
    assert d == pytest.approx((H[0] + 16, H[1] + 16, H[2] + 10), abs=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_coupling_law(u, v):
    lo, hi = sorted((u * ARM.joint_limit(), v * ARM.joint_limit()))
    if hi - lo < 1e-6:
        return
    for i in range(3):
        a, b = [0.0] * 3, [0.0] * 3
        a[i], b[i] = lo, hi
        assert coupled_joint_values(ARM, a)[1][i] > coupled_joint_values(ARM, b)[1][i]


def test_joint_limit_default():
    assert math.degrees(ARM.joint_limit()) == pytest.approx(83.0, abs=1e-9)
    with pytest.raises(ValueError):
        forward_kinematics(ARM, [0.0, 0.0, math.radians(84)])
    with pytest.raises(ValueError):
        forward_kinematics(ARM, [-0.01, 0.0, 0.0])


def test_closed_form_at_rest():
    T = closed_form_pose(FLAT_START, [0, 0, 0])
    np.testing.assert_allclose(T.rotation, np.eye(3), atol=1e-15)
    # (0, a/2 - d1, d2 - a/2 + d0) with d = (31, 31, 25), a = 15
    np.testing.assert_allclose(T.translation, [0.0, -23.5, 48.5], atol=1e-12)


def test_closed_form_quarter_bend():
    q = [0.0, math.pi / 2, 0.0]
    T = closed_form_pose(FLAT_START, q)
    d2 = coupled_joint_values(FLAT_START, q)[1][2]
    assert T.translation[0] == pytest.approx(-d2, abs=1e-12)


@settings(max_examples=200)
@given(joints)
def test_closed_form_is_rigid(q):
    assert closed_form_pose(ARM, q).is_rigid(1e-10)


@settings(max_examples=200)
@given(joints)
def test_fk_matches_step_by_step_oracle(q):
    A = forward_kinematics(ARM, q).matrix
    B = np.array(step_by_step_fk(ARM, q))
    np.testing.assert_allclose(A, B, rtol=0, atol=1e-9)


def test_fk_matches_oracle_on_literal_table():
    params = ArmParams(dh_table=literal_dh_table())
    rep = compare_fk(params, 200, reference=oracle_pose, seed=3)
    assert rep.max_position_mm < 1e-9
    assert rep.max_rotation_rad < 1e-12


@settings(max_examples=100)
@given(*[st.tuples(angles, lengths, lengths, angles)] * 3)
def test_composition_closure_and_associativity(r1, r2, r3):
    T1, T2, T3 = (HomTransform(dh_matrix(*r)) for r in (r1, r2, r3))
    left, right = (T1 @ T2) @ T3, T1 @ (T2 @ T3)
    assert left.is_rigid(1e-10)
    np.testing.assert_allclose(left.matrix, right.matrix, rtol=0, atol=1e-12 * 150)


def test_fk_deterministic():
    q = [0.3, 0.7, 1.1]
    assert np.array_equal(forward_kinematics(ARM, q).matrix, forward_kinematics(ARM, q).matrix)


def test_base_transform_is_applied():
    base = HomTransform.from_parts(np.eye(3), [1.0, 2.0, 3.0])
    params = ArmParams(base=base)
    q = [0.2, 0.4, 0.6]
    diff = forward_kinematics(params, q).translation - forward_kinematics(ARM, q).translation
    np.testing.assert_allclose(diff, [1, 2, 3], atol=1e-12)


def test_end_plate_normal_is_z_column():
    assert list(end_plate_normal(HomTransform())) == [0.0, 0.0, 1.0]
    T = HomTransform(dh_matrix(math.pi / 2, 0, 0, 0))
    np.testing.assert_allclose(end_plate_normal(T), [0, -1, 0], atol=1e-15)


def test_rotation_angle_between():
    Rz = dh_matrix(0, 0, 0, 0.3)[:3, :3]
    assert rotation_angle_between(np.eye(3), Rz) == pytest.approx(0.3, abs=1e-15)
    assert rotation_angle_between(Rz, Rz) == 0.0
    Rpi = dh_matrix(0, 0, 0, math.pi)[:3, :3]
    assert rotation_angle_between(np.eye(3), Rpi) == pytest.approx(math.pi, abs=1e-12)


def test_compare_fk_needs_samples():
    with pytest.raises(ValueError):
        compare_fk(ARM, 0)


def test_compare_fk_reports_closed_form_gap():
    # the shipped table and the closed form are not the same pose model
    rep = compare_fk(ARM, 200, seed=0)
    assert rep.max_position_mm > 1.0
    assert rep.samples == 200 and len(rep.argmax_joints) == 3
    assert rep.notes == []
    assert compare_fk(ARM, 200, seed=0).max_position_mm == rep.max_position_mm


def test_literal_table_flags_halved_height():
    rep = compare_fk(ArmParams(dh_table=literal_dh_table()), 10)
    assert any(note.startswith("tower 1") for note in rep.notes)


def test_default_table_shape():
    rows = default_dh_table()
    assert [r.kind for r in rows] == ["P", "R", "P", "R", "P", "R"]
    assert math.degrees(rows[2].alpha) == pytest.approx(-90)
    assert rows[2].a == 0.0


@pytest.mark.parametrize("text, fragment", [
    ("0 0 VAR 0", "expected 5 columns"),
    ("0 0 VAR 0 0 0", "expected 5 columns"),
    ("0 0 Q 0 0", "unknown symbol"),
    ("0 0 VAR VAR 0", "at most one joint variable"),
    ("0 0 1 VAR*2 0", "exactly VAR"),
    ("0 0 __import__('os') 0 0", "bad DH cell"),
])
def test_dh_parse_errors(text, fragment):
    with pytest.raises(ValueError, match=fragment) as exc:
        parse_dh_table("# header\n" + text, "t.dh")
    assert "t.dh:2" in str(exc.value)


def test_dh_table_rejects_wrong_pattern():
    rows = parse_dh_table("\n".join(["0 0 1 VAR 0"] * 6))
    with pytest.raises(ValueError, match="row 0"):
        ArmParams(dh_table=rows)
    with pytest.raises(ValueError, match="6 rows"):
        ArmParams(dh_table=rows[:5])
