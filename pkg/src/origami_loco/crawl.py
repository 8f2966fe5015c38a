"""Inchworm crawling model of the octagon-origami body.

Units: leg and body lengths in mm, time in s, forces in N. Accelerations fed
to the reaction-force model are in m/s^2, so COG positions are converted from
mm before differencing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

FIRST, SECOND = "first", "second"


class InfeasibleGeometry(ValueError):
    """The leg/body dimensions admit no configuration at this bending angle."""


class NonConvergence(RuntimeError):
    pass


class GeometryWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LegParams:
    h: float = 10.0
    H_leg: float = 15.0
    b: float = 8.0
    r: float = 5.0

    def __post_init__(self):
        if not all(v > 0 for v in (self.h, self.H_leg, self.b, self.r)):
            raise ValueError("leg dimensions must be positive")
        if not self.r < self.b:
            raise ValueError("foot radius r must be smaller than b")


@dataclass(frozen=True)
class CrawlParams:
    L_arc: float = 60.0  # mm
    mass: float = 0.1  # kg
    g: float = 9.8  # m/s^2
    mu_pelma: float = 0.4
    mu_toe: float = 0.2
    dt: float = 0.05  # s
    theta_max: float = 0.6  # rad
    max_iter: int = 200
    tol: float = 1e-10  # rad
    damping: float = 0.5
    max_height: float = 85.0  # mm
    max_length: float = 110.0  # mm

    def __post_init__(self):
        if not self.L_arc > 0:
            raise ValueError("L_arc must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        for name in ("mu_pelma", "mu_toe"):
            mu = getattr(self, name)
            if not 0 < mu <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {mu}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.theta_max < math.pi:
            raise ValueError("theta_max must lie in (0, pi)")


@dataclass(frozen=True)
class CrawlState:
    theta: float
    alpha_f: float
    alpha_r: float
    alpha_f_eq: float
    alpha_r_eq: float
    l_f: float
    l_r: float
    beta: float
    a_chord: float

    @property
    def height(self) -> float:
        """Front-leg height, the robot's overall height."""
        return self.l_f * math.cos(self.alpha_f_eq)

    @property
    def footprint(self) -> float:
        return (
            self.a_chord * math.cos(self.beta)
            + self.l_f * math.sin(self.alpha_f_eq)
            + self.l_r * math.sin(self.alpha_r_eq)
        )


def leg_equivalent(leg: LegParams, alpha: float):
    """Projections (m, n), equivalent length and angle of a leg at inclination alpha.

    Returns (m_proj, n_proj, l_eq, alpha_eq).
    """
    c, s = math.cos(alpha), math.sin(alpha)
    m = leg.h * c - (leg.b - leg.r) * s + (leg.H_leg + leg.r) * c
    n = leg.h * s + (leg.b - leg.r) * c + (leg.H_leg + leg.r) * s
    if m <= 0:
        raise InfeasibleGeometry(
            f"leg projection m={m:.6g} mm <= 0 at alpha={math.degrees(alpha):.6g} deg"
        )
    return m, n, math.hypot(m, n), math.atan(n / m)


def chord_length(L_arc: float, theta: float) -> float:
    """Chord of an arc of length L_arc subtending theta (rad)."""
    if theta == 0.0:
        return L_arc
    return L_arc / theta * math.sin(theta)


def _beta_image(front, rear, theta, beta, a):
    m_f = leg_equivalent(front, theta - beta)[0]
    m_r = leg_equivalent(rear, theta + beta)[0]
    arg = (m_f - m_r) / a
    if not -1.0 <= arg <= 1.0:
        raise InfeasibleGeometry(
            f"chord inclination arcsin argument {arg:.6g} outside [-1, 1] at theta={theta:.6g}"
        )
    return math.asin(arg)


def solve_state(params: CrawlParams, front: LegParams, rear: LegParams, theta: float) -> CrawlState:
    """Solve the body/leg closure for bending angle ``theta``.

    The chord inclination beta is the fixed point of
    beta -> arcsin((l_f cos a'_f - l_r cos a'_r) / a) with a_f = theta - beta,
    a_r = theta + beta. One damped step seeds a secant iteration on the
    fixed-point residual.
    """
    if not 0.0 < theta < params.theta_max:
        raise ValueError(f"theta={theta:.6g} outside (0, {params.theta_max:.6g})")
    a = chord_length(params.L_arc, theta)

    b0 = 0.0
    r0 = _beta_image(front, rear, theta, b0, a)
    beta = b0 + params.damping * r0
    for _ in range(params.max_iter):
        if abs(r0) < params.tol:
            beta = b0
            break
        res = _beta_image(front, rear, theta, beta, a) - beta
        if abs(res) < params.tol:
            break
        if res == r0:
            step = params.damping * res
        else:
            step = -res * (beta - b0) / (res - r0)
        b0, r0 = beta, res
        beta = beta + step
    else:
        raise NonConvergence(
            f"beta iteration did not converge in {params.max_iter} steps at theta={theta:.6g}"
        )

    _, _, l_f, af_eq = leg_equivalent(front, theta - beta)
    _, _, l_r, ar_eq = leg_equivalent(rear, theta + beta)
    return CrawlState(
        theta=theta,
        alpha_f=theta - beta,
        alpha_r=theta + beta,
        alpha_f_eq=af_eq,
        alpha_r_eq=ar_eq,
        l_f=l_f,
        l_r=l_r,
        beta=beta,
        a_chord=a,
    )


def constraint_residuals(params: CrawlParams, front: LegParams, rear: LegParams, s: CrawlState) -> dict:
    """Residuals of the closure equations, recomputed from scratch."""
    _, _, l_f, af_eq = leg_equivalent(front, s.alpha_f)
    _, _, l_r, ar_eq = leg_equivalent(rear, s.alpha_r)
    arg = (l_f * math.cos(af_eq) - l_r * math.cos(ar_eq)) / s.a_chord
    return {
        "inclination": abs(math.asin(max(-1.0, min(1.0, arg))) - s.beta),
        "chord": abs(s.a_chord - params.L_arc / s.theta * math.sin(s.theta)),
        "front_angle": abs(s.theta - (s.alpha_f + s.beta)),
        "rear_angle": abs(s.theta - (s.alpha_r - s.beta)),
    }


def cycle_displacement(s0: CrawlState, s1: CrawlState, front: LegParams, rear: LegParams):
    """COG displacement (mm) for a transition s0 -> s1.

    Returns (dx first half, dx second half, dy); dy is shared by both halves.
    """
    half_chord = s0.a_chord / 2 * math.cos(s0.beta) - s1.a_chord / 2 * math.cos(s1.beta)
    roll_f = front.r * (s1.alpha_f_eq - s0.alpha_f_eq)
    roll_r = rear.r * (s0.alpha_r_eq - s1.alpha_r_eq)
    dx1 = (
        s1.l_f * math.sin(s1.alpha_f_eq) - s0.l_f * math.sin(s0.alpha_f_eq)
        + half_chord + roll_f
    )
    dx2 = (
        s0.l_r * math.sin(s0.alpha_r_eq) - s1.l_r * math.sin(s1.alpha_r_eq)
        + half_chord + roll_r
    )
    dy = (
        (s1.l_f * math.cos(s1.alpha_f_eq) - s1.l_r * math.cos(s1.alpha_r_eq)) / 2
        - (s0.l_f * math.cos(s0.alpha_f_eq) - s0.l_r * math.cos(s0.alpha_r_eq)) / 2
    )
    return dx1, dx2, dy


def fd_accel(prev: float, curr: float, nxt: float, dt: float) -> float:
    if not dt > 0:
        raise ValueError("dt must be positive")
    return (nxt - 2.0 * curr + prev) / (dt * dt)


class Reactions(NamedTuple):
    front: float
    rear: float

    @property
    def contact_lost(self) -> bool:
        return self.front < 0 or self.rear < 0


def ground_reactions(params: CrawlParams, phase: str, ax: float, ay: float, mu: float) -> Reactions:
    """Normal reactions (N) at the front and rear feet."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    half_m = params.mass / 2.0
    vert = ay + params.g
    if phase == FIRST:
        return Reactions(half_m * (ax / mu + vert), half_m * (-ax / mu + vert))
    if phase == SECOND:
        return Reactions(half_m * (-2.0 * ax / mu + vert), half_m * (2.0 * ax / mu + vert))
    raise ValueError(f"phase must be {FIRST!r} or {SECOND!r}, got {phase!r}")


def friction_force(F_R: float, mu: float) -> float:
    return mu * F_R


def contact_mus(params: CrawlParams, phase: str) -> tuple[float, float]:
    """(front, rear) surface friction in contact during ``phase``.

    Front pelma and rear toe touch in the first half; the reverse in the second.
    """
    if phase == FIRST:
        return params.mu_pelma, params.mu_toe
    return params.mu_toe, params.mu_pelma


@dataclass
class CrawlTrace:
    t: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    phase: list = field(default_factory=list)
    x_mm: list = field(default_factory=list)
    y_mm: list = field(default_factory=list)
    ax: list = field(default_factory=list)
    ay: list = field(default_factory=list)
    F_front: list = field(default_factory=list)
    F_rear: list = field(default_factory=list)
    fric_front: list = field(default_factory=list)
    fric_rear: list = field(default_factory=list)
    contact_lost: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    @property
    def cycles(self) -> int:
        """Completed second halves, at least one."""
        runs = sum(
            1 for k, p in enumerate(self.phase)
            if p == SECOND and (k + 1 == len(self.phase) or self.phase[k + 1] != SECOND)
        )
        return max(runs, 1)

    @property
    def dx_per_cycle(self) -> float:
        return (self.x_mm[-1] - self.x_mm[0]) / self.cycles


def transition_phases(theta_profile: Sequence[float]) -> list[str]:
    """Half-cycle tag per sample: bending (theta rising) is the first half."""
    phases = []
    current = FIRST
    for k in range(len(theta_profile)):
        if k + 1 < len(theta_profile):
            dtheta = theta_profile[k + 1] - theta_profile[k]
            if dtheta > 0:
                current = FIRST
            elif dtheta < 0:
                current = SECOND
        phases.append(current)
    return phases


def default_theta_profile(lo: float = 0.1, hi: float = 0.5, half_steps: int = 20) -> list[float]:
    """One cycle: a linear ramp lo -> hi followed by hi -> lo."""
    up = [lo + (hi - lo) * k / half_steps for k in range(half_steps + 1)]
    return up + up[-2::-1]


def check_geometry(params: CrawlParams, states: Sequence[CrawlState]) -> list[str]:
    """Envelope violations (height and length limits) over ``states``."""
    issues = []
    height = max(s.height for s in states)
    length = max(s.footprint for s in states)
    if height > params.max_height:
        issues.append(f"height reaches {height:.6g} mm, limit {params.max_height:.6g} mm")
    if length > params.max_length:
        issues.append(f"footprint reaches {length:.6g} mm, limit {params.max_length:.6g} mm")
    return issues


def simulate_crawl(params: CrawlParams, legs, theta_profile: Sequence[float]) -> CrawlTrace:
    """Kinematics, COG accelerations and foot reactions along ``theta_profile``.

    ``legs`` is a (front, rear) pair of LegParams. Samples are dt apart.
    """
    front, rear = legs
    if len(theta_profile) < 3:
        raise ValueError("theta profile needs at least 3 samples")
    states = []
    for k, th in enumerate(theta_profile):
        try:
            states.append(solve_state(params, front, rear, th))
        except (InfeasibleGeometry, NonConvergence, ValueError) as exc:
            raise type(exc)(f"sample {k}: {exc}") from exc
    for msg in check_geometry(params, states):
        warnings.warn(msg, GeometryWarning, stacklevel=2)

    phases = transition_phases(theta_profile)
    x = [0.0]
    y = [0.0]
    for k in range(len(states) - 1):
        dx1, dx2, dy = cycle_displacement(states[k], states[k + 1], front, rear)
        x.append(x[-1] + (dx1 if phases[k] == FIRST else dx2))
        y.append(y[-1] + dy)

    n = len(states)
    xm = [v / 1000.0 for v in x]
    ym = [v / 1000.0 for v in y]
    ax = [0.0] * n
    ay = [0.0] * n
    for k in range(1, n - 1):
        ax[k] = fd_accel(xm[k - 1], xm[k], xm[k + 1], params.dt)
        ay[k] = fd_accel(ym[k - 1], ym[k], ym[k + 1], params.dt)
    ax[0], ay[0] = ax[1], ay[1]
    ax[-1], ay[-1] = ax[-2], ay[-2]

    trace = CrawlTrace()
    for k in range(n):
        mu_f, mu_r = contact_mus(params, phases[k])
        R = ground_reactions(params, phases[k], ax[k], ay[k], mu_f)
        trace.t.append(k * params.dt)
        trace.theta.append(theta_profile[k])
        trace.phase.append(phases[k])
        trace.x_mm.append(x[k])
        trace.y_mm.append(y[k])
        trace.ax.append(ax[k])
        trace.ay.append(ay[k])
        trace.F_front.append(R.front)
        trace.F_rear.append(R.rear)
        trace.fric_front.append(friction_force(R.front, mu_f))
        trace.fric_rear.append(friction_force(R.rear, mu_r))
        trace.contact_lost.append(R.contact_lost)
    return trace


@dataclass
class SweepRow:
    mu: float
    trace: CrawlTrace = field(repr=False)

    def _pick(self, values, phase, fn):
        sel = [v for v, p in zip(values, self.trace.phase) if p == phase]
        return fn(sel) if sel else math.nan

    def summary(self) -> dict:
        tr = self.trace
        out = {"mu": self.mu}
        for phase in (FIRST, SECOND):
            for name, vals in (("F_front", tr.F_front), ("F_rear", tr.F_rear)):
                out[f"{name}_{phase}_max_N"] = self._pick(vals, phase, max)
                out[f"{name}_{phase}_min_N"] = self._pick(vals, phase, min)
        out["fric_front_max_N"] = max(tr.fric_front)
        out["fric_rear_max_N"] = max(tr.fric_rear)
        out["dx_per_cycle_mm"] = tr.dx_per_cycle
        out["contact_lost"] = any(tr.contact_lost)
        return out


def friction_sweep(params: CrawlParams, legs, theta_profile, mu_list) -> list[SweepRow]:
    """One simulation per friction value, with both surfaces set to that value."""
    mu_list = list(mu_list)
    if not mu_list:
        raise ValueError("mu_list is empty")
    return [
        SweepRow(mu, simulate_crawl(replace(params, mu_pelma=mu, mu_toe=mu), legs, theta_profile))
        for mu in mu_list
    ]


def ordering_flips(trace: CrawlTrace) -> bool:
    """True when the mean front-minus-rear reaction changes sign between halves."""
    diff = {FIRST: [], SECOND: []}
    for f, r, p in zip(trace.F_front, trace.F_rear, trace.phase):
        diff[p].append(f - r)
    if not diff[FIRST] or not diff[SECOND]:
        return False
    m1 = sum(diff[FIRST]) / len(diff[FIRST])
    m2 = sum(diff[SECOND]) / len(diff[SECOND])
    return m1 * m2 < 0
