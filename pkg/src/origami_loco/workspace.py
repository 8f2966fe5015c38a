"""Joint-space rasterization of the arm and per-node projected plate area."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .kinematics import ArmParams, HomTransform, end_plate_normal, forward_kinematics
from .tower import DomainError

FORWARD_AXIS = (0.0, 1.0, 0.0)


@dataclass(frozen=True)
class PlateSpec:
    plate_area: float = 600.0  # mm^2

    def __post_init__(self):
        if not self.plate_area > 0:
            raise ValueError("plate_area must be positive")


@dataclass(frozen=True)
class GridSpec:
    """Per-joint (min, max) in rad and step counts."""

    mins: tuple
    maxs: tuple
    steps: tuple

    def __post_init__(self):
        if not (len(self.mins) == len(self.maxs) == len(self.steps) == 3):
            raise ValueError("GridSpec needs three joints")
        for i, (lo, hi, n) in enumerate(zip(self.mins, self.maxs, self.steps)):
            if int(n) != n or n < 2:
                raise ValueError(f"joint {i}: steps must be an integer >= 2, got {n}")
            if not lo < hi:
                raise ValueError(f"joint {i}: min must be < max")

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.steps)

    def angle(self, axis: int, g: int) -> float:
        lo, hi, n = self.mins[axis], self.maxs[axis], self.steps[axis]
        return lo + g * (hi - lo) / (n - 1)

    def joints(self, index) -> tuple[float, float, float]:
        return tuple(self.angle(k, g) for k, g in enumerate(index))

    def indices(self) -> Iterator[tuple[int, int, int]]:
        return itertools.product(*(range(n) for n in self.shape))

    def contains(self, index) -> bool:
        return len(index) == 3 and all(0 <= g < n for g, n in zip(index, self.shape))

    def check_within(self, params: ArmParams) -> None:
        hi = params.joint_limit()
        for i, (lo, up) in enumerate(zip(self.mins, self.maxs)):
            if lo < -1e-12 or up > hi + 1e-12:
                raise ValueError(
                    f"joint {i}: grid range [{math.degrees(lo):.9g}, {math.degrees(up):.9g}] deg "
                    f"outside [0, {math.degrees(hi):.9g}] deg"
                )


def default_grid(params: ArmParams, steps: int = 21) -> GridSpec:
    hi = params.joint_limit()
    return GridSpec((0.0,) * 3, (hi,) * 3, (steps,) * 3)


@dataclass(frozen=True)
class WorkspaceNode:
    grid_index: tuple
    joints: tuple  # rad
    position: tuple  # mm
    normal: tuple
    area_p: float  # mm^2

    @property
    def y(self) -> float:
        return self.position[1]


class Workspace(Sequence):
    """Nodes of a rasterized joint grid, in lexicographic grid-index order."""

    def __init__(self, grid: GridSpec, nodes: Sequence[WorkspaceNode]):
        nodes = tuple(nodes)
        expected = list(grid.indices())
        if [tuple(n.grid_index) for n in nodes] != expected:
            raise ValueError("nodes must cover the grid in lexicographic order")
        self.grid = grid
        self.nodes = nodes
        self._shape = grid.shape

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i):
        return self.nodes[i]

    def flat(self, index) -> int:
        i, j, k = index
        _, nj, nk = self._shape
        return (i * nj + j) * nk + k

    def node(self, index) -> WorkspaceNode:
        if not self.grid.contains(index):
            raise IndexError(f"grid index {tuple(index)} outside grid {self._shape}")
        return self.nodes[self.flat(index)]

    @property
    def area_max(self) -> float:
        return max(n.area_p for n in self.nodes)

    @property
    def area_min(self) -> float:
        return min(n.area_p for n in self.nodes)


def projected_area(pose: HomTransform, plate: PlateSpec, forward_axis=FORWARD_AXIS) -> float:
    """Plate area seen along ``forward_axis``; either plate face counts."""
    axis = np.asarray(forward_axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
        raise ValueError("forward_axis must be a unit vector")
    c = abs(float(end_plate_normal(pose) @ axis))
    return plate.plate_area * min(c, 1.0)


def sample_workspace(
    params: ArmParams,
    grid: GridSpec,
    plate: PlateSpec,
    pose_fn: Callable[[ArmParams, Sequence[float]], HomTransform] = forward_kinematics,
    forward_axis=FORWARD_AXIS,
) -> Workspace:
    grid.check_within(params)
    nodes = []
    for index in grid.indices():
        q = grid.joints(index)
        try:
            pose = pose_fn(params, q)
        except DomainError as exc:
            raise DomainError(f"grid index {index}: {exc}") from exc
        nodes.append(WorkspaceNode(
            grid_index=index,
            joints=q,
            position=tuple(float(v) for v in pose.translation),
            normal=tuple(float(v) for v in end_plate_normal(pose)),
            area_p=projected_area(pose, plate, forward_axis),
        ))
    return Workspace(grid, nodes)


def workspace_summary(ws: Workspace, origin=(0.0, 0.0, 0.0)) -> dict:
    """Radial extent of the point cloud about ``origin`` plus area range."""
    pts = np.array([n.position for n in ws.nodes]) - np.asarray(origin, dtype=float)
    r = np.linalg.norm(pts, axis=1)
    return {
        "nodes": len(ws),
        "r_min_mm": float(r.min()),
        "r_max_mm": float(r.max()),
        "area_min_mm2": ws.area_min,
        "area_max_mm2": ws.area_max,
    }
