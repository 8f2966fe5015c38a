"""Stroke planning over a rasterized arm workspace.

The thrust (in-sweep) stroke maximizes the swept strength sum of
dy * mean(area) over paths whose y never increases; the drag (recovery and
out-sweep) stroke minimizes the sum of |dy| * mean(area) with no direction
constraint. Both use best-first search on grid-index neighbours.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .workspace import GridSpec, Workspace, WorkspaceNode


class NoPathError(LookupError):
    """No admissible path joins the requested endpoints."""


@dataclass(frozen=True)
class FluidParams:
    rho: float = 1000.0  # kg/m^3
    C_d: float = 1.2
    V: float = 0.1  # m/s

    def __post_init__(self):
        if not (self.rho > 0 and self.C_d > 0 and self.V > 0):
            raise ValueError("rho, C_d and V must all be positive")


def thrust_force(fluid: FluidParams, area_p: float) -> float:
    """Blade-element force (N) on a plate of projected area ``area_p`` mm^2."""
    if area_p < 0:
        raise ValueError("area_p must be non-negative")
    return 0.5 * fluid.C_d * fluid.rho * (area_p * 1e-6) * fluid.V**2


_OFFSETS = {
    6: tuple(d for d in itertools.product((-1, 0, 1), repeat=3) if sum(map(abs, d)) == 1),
    26: tuple(d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)),
}


def neighbors(grid: GridSpec, index, connectivity: int = 6) -> list[tuple[int, int, int]]:
    """In-grid neighbours of ``index``, sorted by grid index."""
    if connectivity not in _OFFSETS:
        raise ValueError(f"connectivity must be 6 or 26, got {connectivity}")
    index = tuple(index)
    if not grid.contains(index):
        raise IndexError(f"grid index {index} outside grid {grid.shape}")
    out = []
    for d in _OFFSETS[connectivity]:
        m = (index[0] + d[0], index[1] + d[1], index[2] + d[2])
        if grid.contains(m):
            out.append(m)
    return sorted(out)


def are_neighbors(a, b, connectivity: int = 6) -> bool:
    d = [abs(x - y) for x, y in zip(a, b)]
    if connectivity == 6:
        return sum(d) == 1
    return max(d) == 1


def edge_thrust(frm: WorkspaceNode, to: WorkspaceNode, connectivity: int = 6) -> float:
    """Signed strength of moving the plate from ``frm`` to ``to``.

    Positive when the plate travels towards -y, i.e. pushes water backwards.
    """
    if not are_neighbors(frm.grid_index, to.grid_index, connectivity):
        raise ValueError(f"{frm.grid_index} and {to.grid_index} are not grid neighbours")
    return (frm.y - to.y) * (frm.area_p + to.area_p) / 2.0


@dataclass(frozen=True)
class StrokeEndpoints:
    start: WorkspaceNode
    goal: WorkspaceNode

    def __post_init__(self):
        if tuple(self.start.grid_index) == tuple(self.goal.grid_index):
            raise ValueError("stroke start and goal coincide")


def select_endpoints(ws: Workspace) -> StrokeEndpoints:
    """In-sweep endpoints: start at max x, goal at min y.

    Ties go to the smallest grid index (nodes are stored in that order).
    """
    if len(ws) == 0:
        raise ValueError("empty workspace")
    start = goal = ws[0]
    for n in ws:
        if n.position[0] > start.position[0]:
            start = n
        if n.y < goal.y:
            goal = n
    return StrokeEndpoints(start, goal)


@dataclass
class GaitPath:
    nodes: tuple  # WorkspaceNode, in path order
    edge_strengths: tuple  # signed edge_thrust per edge
    total_thrust: float
    total_drag: float
    expanded: tuple = field(default=(), repr=False)  # grid indices, in expansion order

    @property
    def indices(self) -> list[tuple]:
        return [tuple(n.grid_index) for n in self.nodes]

    @property
    def nodes_expanded(self) -> int:
        return len(self.expanded)

    @property
    def path_length(self) -> int:
        return len(self.nodes)


def _build_path(ws, parent, goal_idx, expanded, connectivity) -> GaitPath:
    seq = [goal_idx]
    while parent[seq[-1]] is not None:
        seq.append(parent[seq[-1]])
    seq.reverse()
    nodes = tuple(ws.node(i) for i in seq)
    edges = tuple(edge_thrust(a, b, connectivity) for a, b in zip(nodes, nodes[1:]))
    thrust = 0.0
    drag = 0.0
    for e in edges:
        thrust += e
        drag += abs(e)
    return GaitPath(nodes, edges, thrust, drag, tuple(expanded))


def _step_ok(a: WorkspaceNode, b: WorkspaceNode, max_step_mm: Optional[float]) -> bool:
    return max_step_mm is None or math.dist(a.position, b.position) <= max_step_mm


def thrust_heuristic(ws: Workspace, goal: WorkspaceNode):
    a_max = ws.area_max
    return lambda n: a_max * abs(n.y - goal.y)


def drag_heuristic(ws: Workspace, goal: WorkspaceNode):
    a_min = ws.area_min
    return lambda n: a_min * abs(n.y - goal.y)


def plan_thrust_stroke(
    ws: Workspace,
    endpoints: StrokeEndpoints,
    connectivity: int = 6,
    max_step_mm: Optional[float] = None,
) -> GaitPath:
    """Maximum-strength path from start to goal with y never increasing.

    Best-first on f = g + A_max * |y - y_goal|. Every edge gains at most
    A_max * dy, so f never grows along a path and the first expansion of a
    node fixes its best g.
    """
    start, goal = endpoints.start, endpoints.goal
    if start.y < goal.y:
        raise NoPathError("start lies below goal in y; no y-monotone path exists")
    h = thrust_heuristic(ws, goal)
    s_idx, g_idx = tuple(start.grid_index), tuple(goal.grid_index)
    g = {s_idx: 0.0}
    parent = {s_idx: None}
    heap = [(-h(start), s_idx)]
    closed = set()
    expanded = []
    while heap:
        _, idx = heapq.heappop(heap)
        if idx in closed:
            continue
        closed.add(idx)
        expanded.append(idx)
        if idx == g_idx:
            return _build_path(ws, parent, g_idx, expanded, connectivity)
        n = ws.node(idx)
        for m_idx in neighbors(ws.grid, idx, connectivity):
            if m_idx in closed:
                continue
            m = ws.node(m_idx)
            if m.y > n.y or m.y < goal.y or not _step_ok(n, m, max_step_mm):
                continue
            cand = g[idx] + (n.y - m.y) * (n.area_p + m.area_p) / 2.0
            if m_idx not in g or cand > g[m_idx]:
                g[m_idx] = cand
                parent[m_idx] = idx
                heapq.heappush(heap, (-(cand + h(m)), m_idx))
    raise NoPathError(f"no y-monotone path from {s_idx} to {g_idx}")


def plan_drag_stroke(
    ws: Workspace,
    start: WorkspaceNode,
    goal: WorkspaceNode,
    connectivity: int = 6,
    max_step_mm: Optional[float] = None,
) -> GaitPath:
    """Minimum-drag path, A* with the consistent bound A_min * |y - y_goal|."""
    h = drag_heuristic(ws, goal)
    s_idx, g_idx = tuple(start.grid_index), tuple(goal.grid_index)
    g = {s_idx: 0.0}
    parent = {s_idx: None}
    heap = [(h(start), s_idx)]
    closed = set()
    expanded = []
    while heap:
        _, idx = heapq.heappop(heap)
        if idx in closed:
            continue
        closed.add(idx)
        expanded.append(idx)
        if idx == g_idx:
            return _build_path(ws, parent, g_idx, expanded, connectivity)
        n = ws.node(idx)
        for m_idx in neighbors(ws.grid, idx, connectivity):
            if m_idx in closed:
                continue
            m = ws.node(m_idx)
            if not _step_ok(n, m, max_step_mm):
                continue
            cand = g[idx] + abs(n.y - m.y) * (n.area_p + m.area_p) / 2.0
            if m_idx not in g or cand < g[m_idx]:
                g[m_idx] = cand
                parent[m_idx] = idx
                heapq.heappush(heap, (cand + h(m), m_idx))
    raise NoPathError(f"no path from {s_idx} to {g_idx}")


def stroke_profile(path: GaitPath) -> list[tuple[float, float]]:
    """(y mm, area mm^2) per path node, in path order."""
    if not path.nodes:
        raise ValueError("empty path")
    return [(n.y, n.area_p) for n in path.nodes]


def enclosed_area(profile) -> float:
    """Trapezoidal |dy| * mean(area) integral of a stroke profile."""
    total = 0.0
    for (y0, a0), (y1, a1) in zip(profile, profile[1:]):
        total += abs(y0 - y1) * (a0 + a1) / 2.0
    return total


@dataclass
class GaitPlan:
    endpoints: StrokeEndpoints
    thrust: GaitPath
    drag: GaitPath


def plan_gait(ws: Workspace, connectivity: int = 6, max_step_mm: Optional[float] = None) -> GaitPlan:
    """Thrust stroke between the selected endpoints, then the drag stroke back."""
    ends = select_endpoints(ws)
    thrust = plan_thrust_stroke(ws, ends, connectivity, max_step_mm)
    drag = plan_drag_stroke(ws, ends.goal, ends.start, connectivity, max_step_mm)
    return GaitPlan(ends, thrust, drag)
