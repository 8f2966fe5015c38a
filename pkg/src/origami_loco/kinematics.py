"""Forward kinematics of the three-tower origami arm.

Each twisted tower is split into a prismatic joint (its height) followed by a
revolute joint (its twist). The two are coupled: the tower height is a fixed
function of the twist, so a tower contributes one degree of freedom.

Towers are indexed 0..2 throughout.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .tower import TowerGeometry, max_twist, tower_height

VAR = "VAR"
_SYMBOLS = frozenset({VAR, "Ls", "Lp", "a", "b"})
_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.USub, ast.UAdd,
)


class HomTransform:
    """4x4 homogeneous rigid transform (lengths in mm)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix=None):
        self.matrix = np.eye(4) if matrix is None else np.asarray(matrix, dtype=float)
        if self.matrix.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got {self.matrix.shape}")

    @classmethod
    def from_parts(cls, rotation, translation) -> "HomTransform":
        m = np.eye(4)
        m[:3, :3] = rotation
        m[:3, 3] = translation
        return cls(m)

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:3, 3]

    def __matmul__(self, other: "HomTransform") -> "HomTransform":
        return HomTransform(self.matrix @ other.matrix)

    def orthonormality_error(self) -> float:
        R = self.rotation
        return float(np.max(np.abs(R.T @ R - np.eye(3))))

    def is_rigid(self, tol: float = 1e-10) -> bool:
        return (
            self.orthonormality_error() < tol
            and abs(np.linalg.det(self.rotation) - 1.0) < tol
            and np.allclose(self.matrix[3], (0.0, 0.0, 0.0, 1.0), rtol=0, atol=tol)
        )

    def __repr__(self):
        return f"HomTransform({self.matrix.tolist()!r})"


@dataclass(frozen=True)
class Cell:
    """One d or theta entry of a DH row: a number or a small expression.

    Expressions may reference VAR (the joint variable) and the link symbols
    Ls, Lp, a and b; only + - * / and numeric literals are allowed.
    """

    text: str
    _code: object = field(repr=False, compare=False, default=None)
    names: frozenset = field(compare=False, default=frozenset())

    @classmethod
    def parse(cls, text) -> "Cell":
        text = str(text).strip()
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"bad DH cell {text!r}: {exc.msg}") from None
        names = set()
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise ValueError(f"bad DH cell {text!r}: unsupported syntax")
            if isinstance(node, ast.Name):
                if node.id not in _SYMBOLS:
                    raise ValueError(f"bad DH cell {text!r}: unknown symbol {node.id!r}")
                names.add(node.id)
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
                raise ValueError(f"bad DH cell {text!r}: non-numeric literal")
        code = compile(tree, "<dh-cell>", "eval")
        return cls(text, code, frozenset(names))

    @property
    def is_variable(self) -> bool:
        return VAR in self.names

    def evaluate(self, env: dict) -> float:
        missing = self.names - env.keys()
        if missing:
            raise ValueError(f"DH cell {self.text!r} needs {sorted(missing)}")
        return float(eval(self._code, {"__builtins__": {}}, env))


@dataclass(frozen=True)
class DHRow:
    """Standard DH row. alpha and offset in rad, a in mm.

    ``d`` is a Cell in mm; ``theta`` is a Cell that is either a plain number
    in degrees or exactly VAR (bound in rad).
    """

    alpha: float
    a: float
    d: Cell
    theta: Cell
    offset: float = 0.0

    def __post_init__(self):
        if not isinstance(self.d, Cell):
            object.__setattr__(self, "d", Cell.parse(self.d))
        if not isinstance(self.theta, Cell):
            object.__setattr__(self, "theta", Cell.parse(self.theta))
        if self.theta.is_variable and self.theta.text != VAR:
            raise ValueError("theta cell must be a number or exactly VAR")
        if self.theta.names - {VAR}:
            raise ValueError("theta cell may not reference link symbols")
        if self.d.is_variable and self.theta.is_variable:
            raise ValueError("a DH row may carry at most one joint variable")

    @property
    def kind(self) -> str:
        if self.d.is_variable:
            return "P"
        if self.theta.is_variable:
            return "R"
        return "fixed"


def dh_matrix(alpha: float, a: float, d: float, theta: float) -> np.ndarray:
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([
        [ct, -ca * st, sa * st, a * ct],
        [st, ca * ct, -sa * ct, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def dh_transform(row: DHRow, value: float | None = None, symbols: dict | None = None) -> HomTransform:
    """Transform of one DH row with its variable (if any) set to ``value``.

    ``value`` is a length in mm for a prismatic row and an angle in rad for a
    revolute row. ``symbols`` supplies Ls, Lp, a, b for symbolic d cells.
    """
    env = dict(symbols or {})
    if row.kind != "fixed":
        if value is None:
            raise ValueError(f"{row.kind} row needs a joint value")
        env[VAR] = value
    d = row.d.evaluate(env)
    if row.theta.is_variable:
        theta = value
    else:
        theta = math.radians(row.theta.evaluate(env))
    return HomTransform(dh_matrix(row.alpha, row.a, d, theta + row.offset))


def parse_dh_table(text: str, source: str = "<dh table>") -> tuple[DHRow, ...]:
    """Parse the whitespace-separated DH table format.

    Columns: alpha_deg a_mm d_mm_or_VAR theta_deg_or_VAR offset_deg.
    ``#`` starts a comment. Cells must not contain spaces.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if len(cols) != 5:
            raise ValueError(f"{source}:{lineno}: expected 5 columns, got {len(cols)}")
        try:
            rows.append(DHRow(
                alpha=math.radians(float(cols[0])),
                a=float(cols[1]),
                d=Cell.parse(cols[2]),
                theta=Cell.parse(cols[3]),
                offset=math.radians(float(cols[4])),
            ))
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return tuple(rows)


def load_dh_table(path) -> tuple[DHRow, ...]:
    path = Path(path)
    return parse_dh_table(path.read_text(), str(path))


def _packaged_table(name: str) -> tuple[DHRow, ...]:
    text = resources.files("origami_loco").joinpath("data", name).read_text()
    return parse_dh_table(text, name)


def default_dh_table() -> tuple[DHRow, ...]:
    """Shipped table: row 2 twists by -90 deg with zero offset length."""
    return _packaged_table("arm_default.dh")


def literal_dh_table() -> tuple[DHRow, ...]:
    """Alternative table (-90 as a length in row 2, halved middle height), for compare_fk."""
    return _packaged_table("arm_literal.dh")


@dataclass(frozen=True)
class ArmParams:
    tower: TowerGeometry = field(default_factory=TowerGeometry)
    L_s: float = 16.0
    L_p: float = 10.0
    dh_table: tuple = field(default_factory=default_dh_table)
    base: HomTransform = field(default_factory=HomTransform, compare=False)

    def __post_init__(self):
        if not self.L_s > self.tower.side_a:
            raise ValueError(f"L_s={self.L_s} must exceed tower side a={self.tower.side_a}")
        if self.L_p <= 0:
            raise ValueError("L_p must be positive")
        if len(self.dh_table) != 6:
            raise ValueError(f"dh_table must have 6 rows, got {len(self.dh_table)}")
        for k, row in enumerate(self.dh_table):
            expected = "P" if k % 2 == 0 else "R"
            if row.kind not in (expected, "fixed"):
                raise ValueError(f"dh_table row {k}: expected {expected} or fixed, got {row.kind}")

    @property
    def symbols(self) -> dict:
        return {"Ls": self.L_s, "Lp": self.L_p, "a": self.tower.side_a, "b": self.tower.panel_b}

    def joint_limit(self) -> float:
        """Largest commanded twist (rad) per tower."""
        return max_twist(self.tower) - self.tower.theta_int


def _check_joints(params: ArmParams, joints: Sequence[float]) -> tuple[float, float, float]:
    if len(joints) != 3:
        raise ValueError(f"expected 3 joint angles, got {len(joints)}")
    hi = params.joint_limit()
    for i, q in enumerate(joints):
        if not (-1e-12 <= q <= hi + 1e-12):
            raise ValueError(
                f"joint {i} = {math.degrees(q):.9g} deg outside [0, {math.degrees(hi):.9g}] deg"
            )
    return tuple(float(q) for q in joints)


def coupled_joint_values(params: ArmParams, joints: Sequence[float]):
    """Total twists (rad) and total link lengths (mm) of the three towers.

    The prismatic length of each tower is determined by its twist through the
    height law; the last tower carries the padding link instead of the
    supporting link.
    """
    joints = _check_joints(params, joints)
    theta_t = tuple(params.tower.theta_int + q for q in joints)
    H = [tower_height(params.tower, t) for t in theta_t]
    d = (H[0] + params.L_s, H[1] + params.L_s, H[2] + params.L_p)
    return theta_t, d


def chain_transforms(params: ArmParams, joints: Sequence[float]) -> list[HomTransform]:
    """The six per-row transforms with joint variables bound."""
    joints = _check_joints(params, joints)
    theta_t = [params.tower.theta_int + q for q in joints]
    heights = [tower_height(params.tower, t) for t in theta_t]
    symbols = params.symbols
    out = []
    for k, row in enumerate(params.dh_table):
        tower = k // 2
        if row.kind == "P":
            value = heights[tower]
        elif row.kind == "R":
            value = theta_t[tower]
        else:
            value = None
        out.append(dh_transform(row, value, symbols))
    return out


def forward_kinematics(params: ArmParams, joints: Sequence[float]) -> HomTransform:
    m = params.base.matrix
    for T in chain_transforms(params, joints):
        m = m @ T.matrix
    return HomTransform(m)


def closed_form_pose(params: ArmParams, joints: Sequence[float]) -> HomTransform:
    """Closed-form end pose of the arm, evaluated term by term."""
    (t0, t1, t2), (d0, d1, d2) = coupled_joint_values(params, joints)
    a = params.tower.side_a
    c0, s0 = math.cos(t0), math.sin(t0)
    c1, s1 = math.cos(t1), math.sin(t1)
    c2, s2 = math.cos(t2), math.sin(t2)
    m = np.array([
        [c0 * c1 * c2 - s0 * s2, -c0 * c1 * s2 - s0 * c2, -c0 * s1,
         -d2 * c0 * s1 - 0.5 * a * s0 + d1 * s0],
        [s0 * c1 * c2 + c0 * s2, -s0 * c1 * s2 + c0 * c2, -s0 * s1,
         -d2 * s0 * s1 + 0.5 * a * c0 - d1 * c0],
        [s1 * c2, -s1 * s2, c1, d2 * c1 - 0.5 * a + d0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    return HomTransform(params.base.matrix @ m)


def end_plate_normal(pose: HomTransform) -> np.ndarray:
    """Unit normal of the end plate: the end frame's z axis."""
    return pose.rotation[:, 2].copy()


def rotation_angle_between(R1: np.ndarray, R2: np.ndarray) -> float:
    """Angle (rad) of the relative rotation R1^T R2."""
    M = R1.T @ R2
    # atan2 form stays accurate near 0 and pi, unlike acos of the trace
    s = 0.5 * math.sqrt((M[2, 1] - M[1, 2]) ** 2 + (M[0, 2] - M[2, 0]) ** 2 + (M[1, 0] - M[0, 1]) ** 2)
    c = (np.trace(M) - 1.0) / 2.0
    return math.atan2(s, c)


@dataclass
class DiscrepancyReport:
    samples: int
    max_position_mm: float
    max_axis_mm: tuple  # per-axis max |dx|, |dy|, |dz|
    max_rotation_rad: float
    max_entry: float  # largest |entry| difference of the rotation blocks
    argmax_joints: tuple  # rad, joint state of the worst position deviation
    notes: list = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"{self.samples} samples: max position dev {self.max_position_mm:.6g} mm "
            f"(axes {', '.join(f'{v:.6g}' for v in self.max_axis_mm)}), "
            f"max rotation dev {math.degrees(self.max_rotation_rad):.6g} deg"
        )


def sample_joints(params: ArmParams, rng: np.random.Generator) -> tuple[float, float, float]:
    return tuple(float(q) for q in rng.uniform(0.0, params.joint_limit(), size=3))


def compare_fk(
    params: ArmParams,
    samples: int,
    reference: Callable[[ArmParams, Sequence[float]], HomTransform] = closed_form_pose,
    seed: int = 0,
) -> DiscrepancyReport:
    """Compare forward_kinematics against ``reference`` on random joint states."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst_pos, worst_rot, worst_entry = 0.0, 0.0, 0.0
    axis = np.zeros(3)
    argmax = None
    for _ in range(samples):
        q = sample_joints(params, rng)
        A = forward_kinematics(params, q)
        B = reference(params, q)
        dp = A.translation - B.translation
        axis = np.maximum(axis, np.abs(dp))
        pos = float(np.linalg.norm(dp))
        if argmax is None or pos > worst_pos:
            worst_pos, argmax = pos, q
        worst_rot = max(worst_rot, rotation_angle_between(A.rotation, B.rotation))
        worst_entry = max(worst_entry, float(np.max(np.abs(A.rotation - B.rotation))))
    report = DiscrepancyReport(
        samples, worst_pos, tuple(float(v) for v in axis), worst_rot, worst_entry, argmax
    )
    report.notes.extend(_table_notes(params))
    return report


def _table_notes(params: ArmParams) -> list[str]:
    """Flag towers whose summed d values differ from H_i plus link length."""
    notes = []
    links = (params.L_s, params.L_s, params.L_p)
    H = tower_height(params.tower, params.tower.theta_int)
    for i in range(3):
        env = dict(params.symbols, VAR=H)
        total = sum(
            row.d.evaluate(env) for row in params.dh_table[2 * i:2 * i + 2]
        )
        if not math.isclose(total, H + links[i], rel_tol=0, abs_tol=1e-9):
            notes.append(
                f"tower {i}: DH d values sum to {total:.9g} mm at rest, "
                f"H + link = {H + links[i]:.9g} mm"
            )
    return notes
