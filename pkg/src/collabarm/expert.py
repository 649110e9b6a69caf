"""Expert action sources: scripted per-task controllers, the discrete human
command table, and a latency wrapper for slow decision channels.

Scripted controllers are stationary: the phase (approach / engage / carry /
push) is re-derived from the state every call, so the same state always maps
to the same action and the controller is total over the state space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .env import (
    HANDLE_RADIUS,
    MAX_STEP,
    Action,
    TaskSpec,
    WorldState,
    handle_pos,
    is_grasped,
)

GRIP_OPEN = -1.0
GRIP_CLOSE = 1.0
GRIP_HOLD = 0.0

# Approach stand-off: close enough to grasp (< GRASP_RADIUS) while staying
# out of pushing contact (> CONTACT_DIST).
_APPROACH_STOP = 0.035
_CLOSE_AT = 0.036
# Push geometry: nose-to-object gap while shoving, and the staging distance
# the gripper retreats to before lining up behind the object.
_PUSH_STANDOFF = 0.10
_PUSH_ALIGN_TOL = 0.012
_AVOID_CLEARANCE = 0.055
# Slider drive: aim past full travel so trailing engagement offsets cannot
# leave the articulation short of its goal, rotating from approach into the
# drive between the engage radius and the inner radius.
_DRIVE_OVERSHOOT = 0.08
_BLEND_OUTER = HANDLE_RADIUS
_BLEND_INNER = 0.04


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _unit(v: tuple[float, float]) -> tuple[float, float]:
    m = math.hypot(v[0], v[1])
    if m < 1e-12:
        return (1.0, 0.0)
    return (v[0] / m, v[1] / m)


def _toward(gripper: tuple[float, float], waypoint: tuple[float, float],
            grip: float, gain: float = 1.0) -> Action:
    ax = gain * (waypoint[0] - gripper[0]) / MAX_STEP
    ay = gain * (waypoint[1] - gripper[1]) / MAX_STEP
    # Saturate by rescaling so the travel direction is preserved; per-axis
    # clipping would snap saturated headings onto the 45-degree diagonals.
    m = max(abs(ax), abs(ay))
    if m > 1.0:
        ax, ay = ax / m, ay / m
    return Action(ax, ay, grip)


def _segment_clearance(a: tuple[float, float], b: tuple[float, float],
                       p: tuple[float, float]) -> float:
    """Min distance from point p to segment a-b."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    apx, apy = p[0] - a[0], p[1] - a[1]
    denom = abx * abx + aby * aby
    if denom < 1e-18:
        return _dist(a, p)
    t = min(max((apx * abx + apy * aby) / denom, 0.0), 1.0)
    return _dist((a[0] + t * abx, a[1] + t * aby), p)


@dataclass
class ScriptedController:
    """Near-optimal waypoint controller for one task."""

    task: TaskSpec
    gain: float = 1.0
    latency_ticks: int = 1

    def action(self, state: WorldState) -> Action:
        kind = self.task.kind
        if kind in ("reach", "button"):
            return _toward(state.gripper_pos, state.target_pos, GRIP_OPEN, self.gain)
        if kind == "slider":
            return self._slider(state)
        if self.task.carry:
            return self._carry(state)
        return self._push(state)

    def _slider(self, state: WorldState) -> Action:
        # Approach the handle, then rotate into the drive inside the engage
        # radius. The drive waypoint sits past full travel (the slider clamps)
        # and halves the engagement offset, so the drive field keeps pointing
        # back at the handle; the in-radius rotation keeps the cloned field
        # free of the direction flip that stalls imitators at the boundary.
        # No slider may be laid out with its drive pointing collinearly back
        # at the approach side: that geometry puts a fixed point of this
        # field in front of the handle (see the task table in env).
        g = state.gripper_pos
        handle = handle_pos(state.slider_base, self.task, state.articulation)
        d = _dist(g, handle)
        goal_art = 1.0 if self.task.goal_open else 0.0
        ax, ay = self.task.axis  # type: ignore[misc]
        sign = 1.0 if self.task.goal_open else -1.0
        goal = handle_pos(state.slider_base, self.task, goal_art)
        drive_wp = (goal[0] + sign * ax * _DRIVE_OVERSHOOT + 0.5 * (g[0] - handle[0]),
                    goal[1] + sign * ay * _DRIVE_OVERSHOOT + 0.5 * (g[1] - handle[1]))
        s = (_BLEND_OUTER - d) / (_BLEND_OUTER - _BLEND_INNER)
        s = min(max(s, 0.0), 1.0)
        waypoint = (handle[0] + s * (drive_wp[0] - handle[0]),
                    handle[1] + s * (drive_wp[1] - handle[1]))
        return _toward(g, waypoint, GRIP_OPEN, self.gain)

    def _carry(self, state: WorldState) -> Action:
        g, obj, target = state.gripper_pos, state.object_pos, state.target_pos
        if is_grasped(state):
            offset = (g[0] - obj[0], g[1] - obj[1])
            goal = self._carry_goal(obj, target)
            waypoint = (goal[0] + offset[0], goal[1] + offset[1])
            return _toward(g, waypoint, GRIP_CLOSE, self.gain)
        d = _dist(g, obj)
        if d <= _CLOSE_AT:
            return Action(0.0, 0.0, GRIP_CLOSE)
        away = _unit((g[0] - obj[0], g[1] - obj[1]))
        standoff = (obj[0] + away[0] * _APPROACH_STOP, obj[1] + away[1] * _APPROACH_STOP)
        return _toward(g, standoff, GRIP_OPEN, self.gain)

    def _carry_goal(self, obj: tuple[float, float], target: tuple[float, float]) -> tuple[float, float]:
        off = self.task.staging_offset
        if off is None:
            return target
        staging = (target[0] + off[0], target[1] + off[1])
        # Slide into the slot only once lined up at the staging point.
        on_axis = abs(obj[1] - staging[1]) <= 0.01
        past = obj[0] <= staging[0] + 0.005
        if on_axis and past:
            return target
        return staging

    def _push(self, state: WorldState) -> Action:
        g, obj, target = state.gripper_pos, state.object_pos, state.target_pos
        to_t = _unit((target[0] - obj[0], target[1] - obj[1]))
        go = (obj[0] - g[0], obj[1] - g[1])
        d_go = math.hypot(*go)

        # Roughly behind the object: pursue a point just behind its center on
        # the object-target line. The aim point tracks the object, so lateral
        # error self-corrects while contact shoves the object at the target.
        if 1e-9 < d_go <= _PUSH_STANDOFF + 0.02:
            cos = (go[0] * to_t[0] + go[1] * to_t[1]) / d_go
            if cos >= 0.95:
                aim = (obj[0] - to_t[0] * 0.015, obj[1] - to_t[1] * 0.015)
                return _toward(g, aim, GRIP_OPEN, self.gain)

        # Too close but misaligned: retreat radially before re-staging.
        if d_go < 0.085:
            away = _unit((g[0] - obj[0], g[1] - obj[1]))
            out = (obj[0] + away[0] * _PUSH_STANDOFF, obj[1] + away[1] * _PUSH_STANDOFF)
            return _toward(g, out, GRIP_OPEN, self.gain)

        # Head for the staging point behind the object, detouring sideways
        # when the straight path would graze it.
        far = (obj[0] - to_t[0] * _PUSH_STANDOFF, obj[1] - to_t[1] * _PUSH_STANDOFF)
        if _segment_clearance(g, far, obj) < _AVOID_CLEARANCE:
            side = (g[0] - obj[0]) * to_t[1] - (g[1] - obj[1]) * to_t[0]
            perp = (to_t[1], -to_t[0]) if side >= 0 else (-to_t[1], to_t[0])
            detour = (obj[0] + perp[0] * 0.12, obj[1] + perp[1] * 0.12)
            return _toward(g, detour, GRIP_OPEN, self.gain)
        return _toward(g, far, GRIP_OPEN, self.gain)


# Discrete command table shared by the human UI and the synthetic BCI channel.
# Movement preserves the grip; "grip" toggles it; "noop" is the zero action.
_DIRS: dict[str, tuple[float, float]] = {
    "up": (0.0, 1.0),
    "down": (0.0, -1.0),
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
    "up-left": (-1.0, 1.0),
    "up-right": (1.0, 1.0),
    "down-left": (-1.0, -1.0),
    "down-right": (1.0, -1.0),
}
COMMANDS: tuple[str, ...] = tuple(_DIRS) + ("grip", "noop")


def command_to_action(command: str, gripper_closed: bool) -> Action:
    """Total mapping from UI command to a bounded action."""
    if command == "noop":
        return Action(0.0, 0.0, 0.0)
    if command == "grip":
        return Action(0.0, 0.0, GRIP_OPEN if gripper_closed else GRIP_CLOSE)
    if command in _DIRS:
        dx, dy = _DIRS[command]
        return Action(dx, dy, GRIP_CLOSE if gripper_closed else GRIP_OPEN)
    raise ValueError(f"unknown command: {command!r}")


class ExpertTimeout(Exception):
    """No human command arrived within the turn deadline."""


class HumanExpert:
    """Expert turns are answered by commands pulled from a session queue.

    `source` blocks until a command string is available or raises
    ExpertTimeout; the session service (server module) provides it. When a
    fallback controller is configured, timeouts defer to it instead of
    propagating.
    """

    latency_ticks = 1

    def __init__(self, source, fallback: ScriptedController | None = None):
        self._source = source
        self._fallback = fallback

    def action(self, state: WorldState) -> Action:
        try:
            command = self._source(state)
        except ExpertTimeout:
            if self._fallback is not None:
                return self._fallback.action(state)
            raise
        return command_to_action(command, state.gripper_closed)


class SlowExpert:
    """Charges `latency_ticks` of wall-clock budget per decision while taking
    actions from the wrapped expert."""

    def __init__(self, base, latency_ticks: int = 48):
        if latency_ticks < 1:
            raise ValueError("latency_ticks must be >= 1")
        self._base = base
        self.latency_ticks = latency_ticks

    def action(self, state: WorldState) -> Action:
        return self._base.action(state)


def scripted_expert(task: TaskSpec, gain: float = 1.0) -> ScriptedController:
    return ScriptedController(task=task, gain=gain)
