"""Plot-ready text outputs and their readers.

All floats are written with 9 significant digits so repeated runs produce
byte-identical files, and reading a file then writing it back reproduces it.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .crawl import CrawlTrace
from .kinematics import DiscrepancyReport
from .planner import FluidParams, GaitPath, GaitPlan, stroke_profile, thrust_force
from .workspace import Workspace

TRACE_COLUMNS = (
    "t_s", "theta_rad", "phase", "x_mm", "y_mm",
    "F_front_N", "F_rear_N", "fric_front_N", "fric_rear_N",
)
WORKSPACE_COLUMNS = (
    "grid_i", "grid_j", "grid_k", "theta1_deg", "theta2_deg", "theta3_deg",
    "x_mm", "y_mm", "z_mm", "nx", "ny", "nz", "area_mm2",
)
PROFILE_COLUMNS = ("stroke", "path_index", "y_mm", "area_mm2")
JOINT_TRAJECTORY_COLUMNS = ("stroke", "path_index", "theta1_deg", "theta2_deg", "theta3_deg")
SWIM_TRACE_COLUMNS = ("cycle", "step", "stroke", "theta1_deg", "theta2_deg", "theta3_deg",
                      "x_mm", "y_mm", "z_mm")
PLAN_FORMAT = "origami-gait-plan/1"


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v == 0.0:
            return "0"  # folds -0.0 as well
        return f"{v:.9g}"
    return str(v)


def rounded(v: float) -> float:
    """``v`` as it survives a trip through the text formats."""
    return float(fmt(float(v)))


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _convert(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path, columns=None) -> list[dict]:
    """Rows as dicts; numeric cells come back as int or float."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if columns is not None and tuple(header) != tuple(columns):
            raise ValueError(f"{path}: unexpected header {header}")
        return [dict(zip(header, map(_convert, row))) for row in reader]


def trace_rows(trace: CrawlTrace):
    for k in range(len(trace)):
        yield (
            trace.t[k], trace.theta[k], trace.phase[k], trace.x_mm[k], trace.y_mm[k],
            trace.F_front[k], trace.F_rear[k], trace.fric_front[k], trace.fric_rear[k],
        )


def write_trace(path, trace: CrawlTrace) -> Path:
    return write_csv(path, TRACE_COLUMNS, trace_rows(trace))


def read_trace(path) -> list[dict]:
    return read_csv(path, TRACE_COLUMNS)


def workspace_rows(ws: Workspace):
    for n in ws:
        yield (
            *n.grid_index,
            *(math.degrees(q) for q in n.joints),
            *n.position, *n.normal, n.area_p,
        )


def write_workspace(path, ws: Workspace) -> Path:
    return write_csv(path, WORKSPACE_COLUMNS, workspace_rows(ws))


def read_workspace(path) -> list[dict]:
    return read_csv(path, WORKSPACE_COLUMNS)


def _r(values):
    return [rounded(v) for v in values]


def path_document(path: GaitPath, fluid: FluidParams) -> dict:
    areas = [n.area_p for n in path.nodes]
    return {
        "nodes": [
            {
                "grid_index": list(n.grid_index),
                "theta_deg": _r(math.degrees(q) for q in n.joints),
                "position_mm": _r(n.position),
                "area_mm2": rounded(n.area_p),
            }
            for n in path.nodes
        ],
        "edge_strengths": _r(path.edge_strengths),
        "total_thrust": rounded(path.total_thrust),
        "total_drag": rounded(path.total_drag),
        "peak_force_N": rounded(thrust_force(fluid, max(areas))),
        "mean_force_N": rounded(thrust_force(fluid, sum(areas) / len(areas))),
        "nodes_expanded": path.nodes_expanded,
        "path_length": path.path_length,
    }


def plan_document(plan: GaitPlan, fluid: FluidParams, connectivity: int) -> dict:
    return {
        "format": PLAN_FORMAT,
        "connectivity": connectivity,
        "endpoints": {
            "start": list(plan.endpoints.start.grid_index),
            "goal": list(plan.endpoints.goal.grid_index),
        },
        "strokes": {
            "thrust": path_document(plan.thrust, fluid),
            "drag": path_document(plan.drag, fluid),
        },
    }


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return path


def write_plan(path, plan: GaitPlan, fluid: FluidParams, connectivity: int) -> Path:
    return write_json(path, plan_document(plan, fluid, connectivity))


def read_plan(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != PLAN_FORMAT:
        raise ValueError(f"{path}: not a gait plan (format {doc.get('format')!r})")
    for stroke in ("thrust", "drag"):
        if stroke not in doc.get("strokes", {}):
            raise ValueError(f"{path}: missing {stroke} stroke")
    return doc


def profile_rows(plan: GaitPlan):
    for stroke, path in (("thrust", plan.thrust), ("drag", plan.drag)):
        for k, (y, area) in enumerate(stroke_profile(path)):
            yield stroke, k, y, area


def joint_trajectory_rows(plan: GaitPlan):
    for stroke, path in (("thrust", plan.thrust), ("drag", plan.drag)):
        for k, n in enumerate(path.nodes):
            yield (stroke, k, *(math.degrees(q) for q in n.joints))


def discrepancy_document(report: DiscrepancyReport, seed: int) -> dict:
    return {
        "samples": report.samples,
        "seed": seed,
        "max_position_mm": rounded(report.max_position_mm),
        "max_axis_mm": _r(report.max_axis_mm),
        "max_rotation_deg": rounded(math.degrees(report.max_rotation_rad)),
        "max_rotation_entry": rounded(report.max_entry),
        "argmax_theta_deg": _r(math.degrees(q) for q in report.argmax_joints),
        "notes": list(report.notes),
    }


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
