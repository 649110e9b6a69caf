"""Planar ten-task manipulation bench.

A single gripper disk moves on the unit square. Depending on the task it
reaches a goal, pushes or carries an object disk, presses a button, or drags
a 1-D slider (drawer / window / door) along its axis. Dynamics are pure
functions of (state, action) so episodes replay bit-identically from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# Workspace and dynamics constants. All positions live in [0, 1]^2.
MAX_STEP = 0.05            # gripper travel per unit action component
GRASP_RADIUS = 0.04        # max gripper-object distance for a grasp to hold
CONTACT_DIST = 0.03        # gripper-object separation enforced by pushing
HANDLE_RADIUS = 0.10       # slider handles engage within this distance
FAILURE_THRESHOLD = 500    # hard episode cap, steps
DEFAULT_SUCCESS_THRESHOLD = 0.03

ART_OPEN_AT = 0.9          # articulation >= this counts as "open"
ART_CLOSED_AT = 0.1        # articulation <= this counts as "closed"
_CONTACT_SUBSTEPS = 5      # swept-contact resolution within one step

ACTION_MIN = -1.0
ACTION_MAX = 1.0


class MalformedActionError(ValueError):
    """Raised when an action contains a non-finite component."""


@dataclass(frozen=True)
class Action:
    """Planar delta plus gripper command, each component in [-1, 1].

    grip > 0 closes the gripper, grip < 0 opens it, grip == 0 leaves it
    unchanged (so the all-zero action is a true no-op).
    """

    dx: float
    dy: float
    grip: float

    def clamped(self) -> "Action":
        if not (math.isfinite(self.dx) and math.isfinite(self.dy) and math.isfinite(self.grip)):
            raise MalformedActionError(f"non-finite action component: {self}")
        c = lambda v: min(max(v, ACTION_MIN), ACTION_MAX)
        return Action(c(self.dx), c(self.dy), c(self.grip))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.dx, self.dy, self.grip)


@dataclass(frozen=True)
class Range2D:
    """Axis-aligned rectangle of initial positions."""

    x: tuple[float, float]
    y: tuple[float, float]

    def sample(self, rng: np.random.Generator) -> tuple[float, float]:
        return (float(rng.uniform(*self.x)), float(rng.uniform(*self.y)))


@dataclass(frozen=True)
class TaskSpec:
    """Geometry and goal of one task.

    kind is one of: reach, button, object (push / carry) or slider.
    Slider tasks articulate along `axis` for `extent` workspace units from a
    randomized base; `initial_articulation` and `goal_open` select whether the
    episode opens or closes the mechanism.
    """

    name: str
    kind: str
    success_threshold: float = DEFAULT_SUCCESS_THRESHOLD
    gripper_range: Range2D = Range2D((0.40, 0.60), (0.10, 0.20))
    object_range: Range2D | None = None
    target_range: Range2D | None = None
    min_separation: float = 0.0          # object-target separation at reset
    axis: tuple[float, float] | None = None
    extent: float = 0.0
    initial_articulation: float = 0.0
    goal_open: bool = True
    carry: bool = False                  # object is grasped and carried
    staging_offset: tuple[float, float] | None = None  # pre-insert waypoint


# The ten tasks, in the canonical bench order.
TASKS: dict[str, TaskSpec] = {
    "window open": TaskSpec(
        name="window open", kind="slider",
        target_range=Range2D((0.15, 0.35), (0.60, 0.80)),
        axis=(1.0, 0.0), extent=0.25, initial_articulation=0.0, goal_open=True,
    ),
    "reach": TaskSpec(
        name="reach", kind="reach",
        target_range=Range2D((0.15, 0.85), (0.30, 0.85)),
    ),
    "peg insert": TaskSpec(
        name="peg insert", kind="object", success_threshold=0.02,
        object_range=Range2D((0.45, 0.70), (0.35, 0.75)),
        target_range=Range2D((0.10, 0.18), (0.35, 0.75)),
        carry=True, staging_offset=(0.10, 0.0),
    ),
    "drawer close": TaskSpec(
        name="drawer close", kind="slider",
        target_range=Range2D((0.30, 0.70), (0.55, 0.75)),
        axis=(0.0, -1.0), extent=0.20, initial_articulation=1.0, goal_open=False,
    ),
    "drawer open": TaskSpec(
        name="drawer open", kind="slider",
        target_range=Range2D((0.25, 0.40), (0.55, 0.75)),
        axis=(-1.0, 0.0), extent=0.20, initial_articulation=0.0, goal_open=True,
    ),
    "push": TaskSpec(
        name="push", kind="object",
        object_range=Range2D((0.35, 0.65), (0.35, 0.65)),
        target_range=Range2D((0.25, 0.75), (0.30, 0.80)),
        min_separation=0.15, carry=False,
    ),
    "button press": TaskSpec(
        name="button press", kind="button", success_threshold=0.04,
        target_range=Range2D((0.30, 0.70), (0.50, 0.75)),
    ),
    "window close": TaskSpec(
        name="window close", kind="slider",
        target_range=Range2D((0.15, 0.35), (0.60, 0.80)),
        axis=(1.0, 0.0), extent=0.25, initial_articulation=1.0, goal_open=False,
    ),
    "pick place": TaskSpec(
        name="pick place", kind="object",
        object_range=Range2D((0.30, 0.70), (0.35, 0.70)),
        target_range=Range2D((0.20, 0.80), (0.30, 0.80)),
        min_separation=0.20, carry=True,
    ),
    "door open": TaskSpec(
        name="door open", kind="slider",
        target_range=Range2D((0.65, 0.85), (0.45, 0.70)),
        axis=(-1.0, 0.0), extent=0.25, initial_articulation=0.0, goal_open=True,
    ),
}

TASK_NAMES: tuple[str, ...] = tuple(TASKS)


@dataclass(frozen=True)
class WorldState:
    """Full simulator state; the scripted expert sees all of it."""

    task_id: str
    gripper_pos: tuple[float, float]
    gripper_closed: bool
    object_pos: tuple[float, float]     # object disk, slider handle, or button
    articulation: float                 # slider extension in [0, 1]
    target_pos: tuple[float, float]
    step_count: int
    slider_base: tuple[float, float] = (0.0, 0.0)

    @property
    def task(self) -> TaskSpec:
        return TASKS[self.task_id]


def _clamp01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def _clamp2(p: tuple[float, float]) -> tuple[float, float]:
    return (_clamp01(p[0]), _clamp01(p[1]))


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def handle_pos(base: tuple[float, float], task: TaskSpec, articulation: float) -> tuple[float, float]:
    ax, ay = task.axis  # type: ignore[misc]
    return (base[0] + ax * task.extent * articulation, base[1] + ay * task.extent * articulation)


def reset(task: TaskSpec, seed: int) -> WorldState:
    """Draw an initial state for `task`. Identical (task, seed) pairs yield
    bit-identical states."""
    rng = np.random.Generator(np.random.PCG64(seed))
    gripper = task.gripper_range.sample(rng)

    if task.kind == "slider":
        base = task.target_range.sample(rng)  # type: ignore[union-attr]
        art = task.initial_articulation
        goal_art = 1.0 if task.goal_open else 0.0
        return WorldState(
            task_id=task.name, gripper_pos=gripper, gripper_closed=False,
            object_pos=handle_pos(base, task, art), articulation=art,
            target_pos=handle_pos(base, task, goal_art), step_count=0,
            slider_base=base,
        )

    target = task.target_range.sample(rng)  # type: ignore[union-attr]
    if task.kind == "object":
        obj = task.object_range.sample(rng)  # type: ignore[union-attr]
        while _dist(obj, target) < task.min_separation:
            obj = task.object_range.sample(rng)  # type: ignore[union-attr]
    elif task.kind == "button":
        obj = target
    else:  # reach
        obj = (0.0, 0.0)
    return WorldState(
        task_id=task.name, gripper_pos=gripper, gripper_closed=False,
        object_pos=obj, articulation=0.0, target_pos=target, step_count=0,
    )


def is_grasped(state: WorldState) -> bool:
    """Object tasks only: the object is attached while the gripper is closed
    within grasp range (the offset is preserved, so a held object stays in
    range until released)."""
    return (
        state.task.kind == "object"
        and state.gripper_closed
        and _dist(state.gripper_pos, state.object_pos) <= GRASP_RADIUS
    )


def success(state: WorldState) -> bool:
    task = state.task
    if task.kind == "slider":
        return state.articulation >= ART_OPEN_AT if task.goal_open else state.articulation <= ART_CLOSED_AT
    if task.kind in ("reach", "button"):
        return _dist(state.gripper_pos, state.target_pos) < task.success_threshold
    return _dist(state.object_pos, state.target_pos) < task.success_threshold


def step(state: WorldState, action: Action) -> tuple[WorldState, bool, bool]:
    """Advance one step. Returns (next_state, done, success)."""
    a = action.clamped()
    task = state.task

    if a.grip > 0.0:
        closed = True
    elif a.grip < 0.0:
        closed = False
    else:
        closed = state.gripper_closed

    gx, gy = state.gripper_pos
    new_g = _clamp2((gx + a.dx * MAX_STEP, gy + a.dy * MAX_STEP))
    delta = (new_g[0] - gx, new_g[1] - gy)

    obj = state.object_pos
    art = state.articulation
    if task.kind == "object":
        attached = closed and _dist(state.gripper_pos, obj) <= GRASP_RADIUS
        if attached:
            obj = _clamp2((obj[0] + delta[0], obj[1] + delta[1]))
        else:
            # Sweep the gripper in substeps so a full step cannot tunnel
            # through the contact radius.
            for k in range(1, _CONTACT_SUBSTEPS + 1):
                t = k / _CONTACT_SUBSTEPS
                g_k = (gx + delta[0] * t, gy + delta[1] * t)
                d = _dist(g_k, obj)
                if d < CONTACT_DIST:
                    if d > 1e-12:
                        nx, ny = (obj[0] - g_k[0]) / d, (obj[1] - g_k[1]) / d
                    elif math.hypot(*delta) > 1e-12:
                        m = math.hypot(*delta)
                        nx, ny = delta[0] / m, delta[1] / m
                    else:
                        nx, ny = 1.0, 0.0
                    obj = _clamp2((g_k[0] + nx * CONTACT_DIST, g_k[1] + ny * CONTACT_DIST))
    elif task.kind == "slider":
        handle = handle_pos(state.slider_base, task, art)
        if _dist(state.gripper_pos, handle) <= HANDLE_RADIUS:
            ax, ay = task.axis  # type: ignore[misc]
            art = _clamp01(art + (delta[0] * ax + delta[1] * ay) / task.extent)
        obj = handle_pos(state.slider_base, task, art)

    nxt = replace(
        state, gripper_pos=new_g, gripper_closed=closed, object_pos=obj,
        articulation=art, step_count=state.step_count + 1,
    )
    won = success(nxt)
    done = won or nxt.step_count >= FAILURE_THRESHOLD
    return nxt, done, won


# Raster rendering: fixed intensity bands per entity, gripper painted last.
RASTER_SIZE = 32
_INT_TARGET = 0.25
_INT_OBJECT = 0.55
_INT_GRIPPER_OPEN = 0.85
_INT_GRIPPER_CLOSED = 1.0
_R_TARGET = 0.05
_R_OBJECT = 0.04
_R_GRIPPER = 0.03


def render_raster(state: WorldState) -> np.ndarray:
    """32x32 grayscale top-down view, values in [0, 1], background 0."""
    grid = np.zeros((RASTER_SIZE, RASTER_SIZE), dtype=np.float64)
    centers = (np.arange(RASTER_SIZE) + 0.5) / RASTER_SIZE
    xs = centers[None, :]
    ys = centers[:, None]

    def paint(pos: tuple[float, float], radius: float, value: float) -> None:
        mask = (xs - pos[0]) ** 2 + (ys - pos[1]) ** 2 <= radius ** 2
        grid[mask] = value

    paint(state.target_pos, _R_TARGET, _INT_TARGET)
    if state.task.kind != "reach":
        paint(state.object_pos, _R_OBJECT, _INT_OBJECT)
    paint(state.gripper_pos, _R_GRIPPER,
          _INT_GRIPPER_CLOSED if state.gripper_closed else _INT_GRIPPER_OPEN)
    return grid
