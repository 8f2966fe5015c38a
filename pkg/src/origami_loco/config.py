"""Run configuration: one YAML file with nested sections.

Every key is optional; omitted keys take the library defaults. Angles are in
degrees here and converted to radians on load. Validation errors carry the
file line of the offending key.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .crawl import CrawlParams, LegParams, default_theta_profile
from .kinematics import (
    ArmParams, HomTransform, default_dh_table, load_dh_table, literal_dh_table,
)
from .planner import FluidParams
from .tower import TowerGeometry
from .workspace import GridSpec, PlateSpec

DEFAULT_MU_LIST = (0.1, 0.2, 0.3, 0.4, 0.5)


class ConfigError(ValueError):
    def __init__(self, message: str, key: str = "", line: Optional[int] = None, source: str = ""):
        self.key = key
        self.line = line
        loc = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(f"{loc}{key + ': ' if key else ''}{message}")


_num = (int, float)
_LEG = {"h_mm": _num, "H_mm": _num, "b_mm": _num, "r_mm": _num}
SCHEMA = {
    "robot": {
        "tower": {"n_sides": int, "side_a_mm": _num, "panel_b_mm": _num, "theta_int_deg": _num},
        "arm": {
            "L_s_mm": _num, "L_p_mm": _num, "dh_table": str, "pose_model": str,
            "base": {"translation_mm": list, "rpy_deg": list},
        },
        "front_leg": _LEG,
        "rear_leg": _LEG,
        "crawl": {
            "L_arc_mm": _num, "mass_kg": _num, "g": _num, "mu_pelma": _num, "mu_toe": _num,
            "dt_s": _num, "theta_max_deg": _num, "max_iter": int, "tol_rad": _num,
            "damping": _num, "max_height_mm": _num, "max_length_mm": _num,
        },
        "plate": {"area_mm2": _num},
        "fluid": {"rho": _num, "C_d": _num, "V": _num},
    },
    "grid": {"steps": (int, list), "min_deg": (_num, list), "max_deg": (_num, list)},
    "planner": {"connectivity": int, "tie_break": str, "max_step_mm": (_num, type(None))},
    "crawl_profile": {"lo_deg": _num, "hi_deg": _num, "half_steps": int, "mu_list": list},
    "swim_trace": {"cycles": int, "advance_mm_per_cycle": _num},
    "output": {"dir": str},
}


def _flatten_types(t):
    if isinstance(t, tuple):
        out = ()
        for x in t:
            out += _flatten_types(x)
        return out
    return (t,)


def _walk(node, schema, prefix, lines, values, source):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("expected a mapping", prefix or "<root>", node.start_mark.line + 1, source)
    seen = set()
    for key_node, val_node in node.value:
        key = key_node.value
        path = f"{prefix}.{key}" if prefix else key
        line = key_node.start_mark.line + 1
        if key not in schema:
            raise ConfigError("unknown key", path, line, source)
        if key in seen:
            raise ConfigError("duplicate key", path, line, source)
        seen.add(key)
        lines[path] = line
        spec = schema[key]
        if isinstance(spec, dict):
            if isinstance(val_node, yaml.ScalarNode) and val_node.value in ("", "~", "null"):
                continue
            _walk(val_node, spec, path, lines, values, source)
            continue
        value = yaml.safe_load(yaml.serialize(val_node))
        types = _flatten_types(spec)
        if isinstance(value, bool) or not isinstance(value, types):
            names = "/".join(t.__name__ for t in types)
            raise ConfigError(f"expected {names}, got {type(value).__name__}", path, line, source)
        values[path] = value


@dataclass
class RunConfig:
    tower: TowerGeometry = field(default_factory=TowerGeometry)
    arm: ArmParams = field(default_factory=ArmParams)
    front_leg: LegParams = field(default_factory=LegParams)
    rear_leg: LegParams = field(default_factory=LegParams)
    crawl: CrawlParams = field(default_factory=CrawlParams)
    plate: PlateSpec = field(default_factory=PlateSpec)
    fluid: FluidParams = field(default_factory=FluidParams)
    grid: Optional[GridSpec] = None
    pose_model: str = "dh"
    connectivity: int = 6
    tie_break: str = "grid-index"
    max_step_mm: Optional[float] = None
    theta_profile: list = field(default_factory=default_theta_profile)
    mu_list: tuple = DEFAULT_MU_LIST
    trace_cycles: int = 3
    advance_mm_per_cycle: float = 0.0
    output_dir: str = "out"

    def __post_init__(self):
        if self.grid is None:
            hi = self.arm.joint_limit()
            self.grid = GridSpec((0.0,) * 3, (hi,) * 3, (21,) * 3)

    @property
    def legs(self):
        return self.front_leg, self.rear_leg


def _rpy_matrix(roll, pitch, yaw):
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


class _Builder:
    def __init__(self, values, lines, source, base_dir):
        self.values = values
        self.lines = lines
        self.source = source
        self.base_dir = base_dir

    def get(self, key, default):
        return self.values.get(key, default)

    def error(self, key, message):
        # fall back to the enclosing section's line
        probe = key
        while probe and probe not in self.lines:
            probe = probe.rpartition(".")[0]
        return ConfigError(message, key, self.lines.get(probe), self.source)

    def build(self, section, factory, **kwargs):
        try:
            return factory(**kwargs)
        except ValueError as exc:
            raise self.error(section, str(exc)) from None

    def triple(self, key, default, cast=float):
        v = self.get(key, default)
        if isinstance(v, list):
            if len(v) != 3 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
                raise self.error(key, "expected a number or a list of 3 numbers")
            return tuple(cast(x) for x in v)
        return (cast(v),) * 3


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, str(path), path.parent)


def parse_config(text: str, source: str = "<config>", base_dir=Path(".")) -> RunConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(
            f"malformed YAML: {getattr(exc, 'problem', exc)}",
            line=mark.line + 1 if mark else None, source=source,
        ) from None
    values, lines = {}, {}
    if root is not None:
        _walk(root, SCHEMA, "", lines, values, source)
    b = _Builder(values, lines, source, Path(base_dir))

    tower = b.build(
        "robot.tower", TowerGeometry,
        n_sides=b.get("robot.tower.n_sides", 4),
        side_a=float(b.get("robot.tower.side_a_mm", 15.0)),
        panel_b=float(b.get("robot.tower.panel_b_mm", 15.0)),
        theta_int=math.radians(b.get("robot.tower.theta_int_deg", 7.0)),
    )

    table_name = b.get("robot.arm.dh_table", "default")
    try:
        if table_name == "default":
            table = default_dh_table()
        elif table_name == "literal":
            table = literal_dh_table()
        else:
            table = load_dh_table(b.base_dir / table_name)
    except (OSError, ValueError) as exc:
        raise b.error("robot.arm.dh_table", str(exc)) from None
    base = HomTransform()
    if "robot.arm.base.translation_mm" in values or "robot.arm.base.rpy_deg" in values:
        t = b.triple("robot.arm.base.translation_mm", [0.0, 0.0, 0.0])
        rpy = b.triple("robot.arm.base.rpy_deg", [0.0, 0.0, 0.0])
        base = HomTransform.from_parts(_rpy_matrix(*map(math.radians, rpy)), t)
    arm = b.build(
        "robot.arm", ArmParams,
        tower=tower,
        L_s=float(b.get("robot.arm.L_s_mm", 16.0)),
        L_p=float(b.get("robot.arm.L_p_mm", 10.0)),
        dh_table=table,
        base=base,
    )
    pose_model = b.get("robot.arm.pose_model", "dh")
    if pose_model not in ("dh", "closed_form"):
        raise b.error("robot.arm.pose_model", "expected 'dh' or 'closed_form'")

    legs = {}
    for which in ("front_leg", "rear_leg"):
        pre = f"robot.{which}"
        d = LegParams()
        legs[which] = b.build(
            pre, LegParams,
            h=float(b.get(f"{pre}.h_mm", d.h)),
            H_leg=float(b.get(f"{pre}.H_mm", d.H_leg)),
            b=float(b.get(f"{pre}.b_mm", d.b)),
            r=float(b.get(f"{pre}.r_mm", d.r)),
        )

    dc = CrawlParams()
    crawl = b.build(
        "robot.crawl", CrawlParams,
        L_arc=float(b.get("robot.crawl.L_arc_mm", dc.L_arc)),
        mass=float(b.get("robot.crawl.mass_kg", dc.mass)),
        g=float(b.get("robot.crawl.g", dc.g)),
        mu_pelma=float(b.get("robot.crawl.mu_pelma", dc.mu_pelma)),
        mu_toe=float(b.get("robot.crawl.mu_toe", dc.mu_toe)),
        dt=float(b.get("robot.crawl.dt_s", dc.dt)),
        theta_max=math.radians(b.get("robot.crawl.theta_max_deg", math.degrees(dc.theta_max))),
        max_iter=b.get("robot.crawl.max_iter", dc.max_iter),
        tol=float(b.get("robot.crawl.tol_rad", dc.tol)),
        damping=float(b.get("robot.crawl.damping", dc.damping)),
        max_height=float(b.get("robot.crawl.max_height_mm", dc.max_height)),
        max_length=float(b.get("robot.crawl.max_length_mm", dc.max_length)),
    )
    plate = b.build("robot.plate", PlateSpec, plate_area=float(b.get("robot.plate.area_mm2", 600.0)))
    df = FluidParams()
    fluid = b.build(
        "robot.fluid", FluidParams,
        rho=float(b.get("robot.fluid.rho", df.rho)),
        C_d=float(b.get("robot.fluid.C_d", df.C_d)),
        V=float(b.get("robot.fluid.V", df.V)),
    )

    hi_deg = math.degrees(arm.joint_limit())
    steps = b.triple("grid.steps", 21, cast=lambda x: x)
    if not all(isinstance(n, int) and not isinstance(n, bool) for n in steps):
        raise b.error("grid.steps", "step counts must be integers")
    if min(steps) < 2:
        raise b.error("grid.steps", "each joint needs at least 2 steps (the grid would be empty)")
    mins = b.triple("grid.min_deg", 0.0)
    maxs = b.triple("grid.max_deg", hi_deg)
    grid = b.build(
        "grid", GridSpec,
        mins=tuple(math.radians(v) for v in mins),
        maxs=tuple(arm.joint_limit() if v == hi_deg else math.radians(v) for v in maxs),
        steps=steps,
    )
    try:
        grid.check_within(arm)
    except ValueError as exc:
        key = "grid.min_deg" if min(grid.mins) < 0 else "grid.max_deg"
        raise b.error(key, str(exc)) from None

    connectivity = b.get("planner.connectivity", 6)
    if connectivity not in (6, 26):
        raise b.error("planner.connectivity", "expected 6 or 26")
    tie_break = b.get("planner.tie_break", "grid-index")
    if tie_break != "grid-index":
        raise b.error("planner.tie_break", "only 'grid-index' is supported")
    max_step = b.get("planner.max_step_mm", None)
    if max_step is not None and not max_step > 0:
        raise b.error("planner.max_step_mm", "must be positive")

    lo = b.get("crawl_profile.lo_deg", None)
    hi = b.get("crawl_profile.hi_deg", None)
    lo = 0.1 if lo is None else math.radians(lo)
    hi = 0.5 if hi is None else math.radians(hi)
    half = b.get("crawl_profile.half_steps", 20)
    if not 0 < lo < hi or half < 1:
        raise b.error("crawl_profile", "need 0 < lo_deg < hi_deg and half_steps >= 1")
    profile = default_theta_profile(lo, hi, half)
    mu_list = b.get("crawl_profile.mu_list", list(DEFAULT_MU_LIST))
    if not mu_list or not all(
        isinstance(m, (int, float)) and not isinstance(m, bool) and 0 < m <= 1 for m in mu_list
    ):
        raise b.error("crawl_profile.mu_list", "expected a non-empty list of values in (0, 1]")

    cycles = b.get("swim_trace.cycles", 3)
    if cycles < 1:
        raise b.error("swim_trace.cycles", "must be >= 1")

    return RunConfig(
        tower=tower, arm=arm, front_leg=legs["front_leg"], rear_leg=legs["rear_leg"],
        crawl=crawl, plate=plate, fluid=fluid, grid=grid, pose_model=pose_model,
        connectivity=connectivity, tie_break=tie_break,
        max_step_mm=None if max_step is None else float(max_step),
        theta_profile=profile, mu_list=tuple(float(m) for m in mu_list),
        trace_cycles=cycles,
        advance_mm_per_cycle=float(b.get("swim_trace.advance_mm_per_cycle", 0.0)),
        output_dir=b.get("output.dir", "out"),
    )


def read_theta_profile(path) -> list[float]:
    """Bending-angle schedule in degrees, one value per line; returns rad.

    Blank lines, ``#`` comments and a ``theta_deg`` header are skipped.
    """
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line == "theta_deg":
            continue
        try:
            out.append(math.radians(float(line)))
        except ValueError:
            raise ConfigError(f"not a number: {line!r}", line=lineno, source=str(path)) from None
    if len(out) < 3:
        raise ConfigError("profile needs at least 3 samples", source=str(path))
    return out
