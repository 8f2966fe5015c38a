"""Batch command line: crawl-sim, crawl-sweep, swim-workspace, swim-plan, swim-trace.

Exit codes: 0 ok, 2 config error, 3 infeasible geometry, 4 no path.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

from . import export
from .config import ConfigError, RunConfig, load_config, read_theta_profile
from .crawl import InfeasibleGeometry, NonConvergence, friction_sweep, simulate_crawl
from .kinematics import closed_form_pose, compare_fk, forward_kinematics
from .planner import NoPathError, plan_gait
from .tower import DomainError
from .workspace import sample_workspace, workspace_summary

log = logging.getLogger("origami_loco")

EXIT_OK, EXIT_CONFIG, EXIT_GEOMETRY, EXIT_NO_PATH = 0, 2, 3, 4


def _pose_fn(cfg: RunConfig):
    return closed_form_pose if cfg.pose_model == "closed_form" else forward_kinematics


def cmd_crawl_sim(cfg: RunConfig, out: Path, args) -> list[Path]:
    profile = read_theta_profile(args.profile) if args.profile else cfg.theta_profile
    trace = simulate_crawl(cfg.crawl, cfg.legs, profile)
    return [export.write_trace(out / "crawl_trace.csv", trace)]


def cmd_crawl_sweep(cfg: RunConfig, out: Path, args) -> list[Path]:
    profile = read_theta_profile(args.profile) if args.profile else cfg.theta_profile
    rows = friction_sweep(cfg.crawl, cfg.legs, profile, cfg.mu_list)
    written = []
    summaries = [r.summary() for r in rows]
    columns = list(summaries[0])
    written.append(export.write_csv(
        out / "crawl_sweep.csv", columns, ([s[c] for c in columns] for s in summaries)
    ))
    for r in rows:
        written.append(export.write_trace(out / f"crawl_sweep_mu_{export.fmt(r.mu)}.csv", r.trace))
    return written


def _workspace(cfg: RunConfig):
    return sample_workspace(cfg.arm, cfg.grid, cfg.plate, pose_fn=_pose_fn(cfg))


def cmd_swim_workspace(cfg: RunConfig, out: Path, args) -> list[Path]:
    ws = _workspace(cfg)
    summary = {k: export.rounded(v) if isinstance(v, float) else v
               for k, v in workspace_summary(ws, cfg.arm.base.translation).items()}
    report = compare_fk(cfg.arm, 1000, seed=args.seed)
    return [
        export.write_workspace(out / "workspace.csv", ws),
        export.write_json(out / "workspace_summary.json", summary),
        export.write_json(out / "fk_discrepancy.json", export.discrepancy_document(report, args.seed)),
    ]


def cmd_swim_plan(cfg: RunConfig, out: Path, args) -> list[Path]:
    ws = _workspace(cfg)
    plan = plan_gait(ws, cfg.connectivity, cfg.max_step_mm)
    log.info("thrust %.6g over %d nodes, drag %.6g over %d nodes",
             plan.thrust.total_thrust, plan.thrust.path_length,
             plan.drag.total_drag, plan.drag.path_length)
    return [
        export.write_plan(out / "gait_plan.json", plan, cfg.fluid, cfg.connectivity),
        export.write_csv(out / "stroke_profile.csv", export.PROFILE_COLUMNS, export.profile_rows(plan)),
        export.write_csv(out / "joint_trajectory.csv", export.JOINT_TRAJECTORY_COLUMNS,
                         export.joint_trajectory_rows(plan)),
    ]


def swim_trace_rows(cfg: RunConfig, doc: dict):
    """End-effector positions replaying a plan for ``cfg.trace_cycles`` cycles.

    One cycle is the thrust stroke followed by the drag stroke; the shared
    endpoints are visited once. The base moves ``advance_mm_per_cycle``
    along +y per cycle, spread evenly over the cycle's steps.
    """
    steps = []
    for stroke in ("thrust", "drag"):
        nodes = doc["strokes"][stroke]["nodes"]
        for k, n in enumerate(nodes):
            if stroke == "drag" and k == 0:
                continue
            if stroke == "drag" and k == len(nodes) - 1:
                continue
            steps.append((stroke, n["theta_deg"]))
    limit = cfg.arm.joint_limit()
    pose_fn = _pose_fn(cfg)
    per_cycle = len(steps)
    for c in range(cfg.trace_cycles):
        for s, (stroke, theta_deg) in enumerate(steps):
            # degrees rounded to 9 digits may land a hair past the joint limit
            q = [min(max(math.radians(v), 0.0), limit) for v in theta_deg]
            p = pose_fn(cfg.arm, q).translation
            shift = cfg.advance_mm_per_cycle * (c + s / per_cycle)
            yield (c, s, stroke, *theta_deg, p[0], p[1] + shift, p[2])


def cmd_swim_trace(cfg: RunConfig, out: Path, args) -> list[Path]:
    if not args.plan:
        raise ConfigError("swim-trace needs --plan <gait_plan.json>", key="--plan")
    try:
        doc = export.read_plan(args.plan)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc), key="--plan") from None
    return [export.write_csv(out / "swim_trace.csv", export.SWIM_TRACE_COLUMNS,
                             swim_trace_rows(cfg, doc))]


COMMANDS = {
    "crawl-sim": (cmd_crawl_sim, "simulate one crawl profile, write crawl_trace.csv"),
    "crawl-sweep": (cmd_crawl_sweep, "friction sweep over crawl_profile.mu_list"),
    "swim-workspace": (cmd_swim_workspace, "rasterize the arm workspace"),
    "swim-plan": (cmd_swim_plan, "plan thrust and drag strokes"),
    "swim-trace": (cmd_swim_trace, "replay a gait plan through forward kinematics"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="origami-loco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML run configuration (defaults if omitted)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--connectivity", type=int, choices=(6, 26),
                       help="grid neighbourhood (overrides planner.connectivity)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name.startswith("crawl"):
            p.add_argument("--profile", help="theta profile file, one angle in degrees per line")
        if name == "swim-trace":
            p.add_argument("--plan", help="gait_plan.json written by swim-plan")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    warnings.simplefilter("default")
    func = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.connectivity is not None:
            cfg.connectivity = args.connectivity
        out = Path(args.out or cfg.output_dir)
        written = func(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleGeometry, DomainError, NonConvergence) as exc:
        print(f"infeasible geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except NoPathError as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
