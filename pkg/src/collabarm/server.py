"""Session service bridging a live collaboration episode to the human-expert
UI over a WebSocket.

One session per episode run. The episode loop runs on its own thread and
talks to the connection through two queues: frames out (state, action
requests, results, heartbeats), commands in. The simulation pauses while
awaiting human input, so seeds stay meaningful with a human in the loop.

Frame schema (protocol version 1): every frame is a single-line JSON object
with at least {type, session, seq}; unknown fields are ignored. Types:
hello, start, state, action_request, action, ack, reject, result, abort,
heartbeat.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import anyio
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .arbiter import ArbiterConfig, run_episode
from .config import RunConfig
from .env import TASKS, WorldState
from .expert import COMMANDS, ExpertTimeout, HumanExpert, scripted_expert
from .policy import PolicyActor
from .train import load_checkpoint
from . import trajlog

PROTOCOL_VERSION = 1
HEARTBEAT_S = 2.0

TURN_POLICY_RUNNING = "policy-running"
TURN_AWAITING_EXPERT = "awaiting-expert"
TURN_TERMINAL = "terminal"


class _Aborted(Exception):
    pass


@dataclass
class Session:
    session_id: str
    config: RunConfig
    seq: int = 0
    turn_state: str = TURN_POLICY_RUNNING
    turn_index: int = 0              # step index awaiting an expert action
    turn_open: bool = False          # no command consumed yet this turn
    commands: "queue.Queue[str]" = field(default_factory=queue.Queue)
    subscribers: list = field(default_factory=list)
    controller_attached: bool = False
    episode_thread: threading.Thread | None = None
    abort_event: threading.Event = field(default_factory=threading.Event)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def next_seq(self) -> int:
        with self.lock:
            self.seq += 1
            return self.seq

    def publish(self, frame: dict) -> None:
        frame = {"session": self.session_id, "seq": self.next_seq(), **frame}
        with self.lock:
            sinks = list(self.subscribers)
        for q in sinks:
            q.put(frame)

    def subscribe(self) -> "queue.Queue[dict]":
        q: "queue.Queue[dict]" = queue.Queue()
        with self.lock:
            self.subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self.lock:
            if q in self.subscribers:
                self.subscribers.remove(q)


def _scene(state: WorldState) -> dict:
    return {
        "task": state.task_id,
        "gripper": list(state.gripper_pos),
        "gripper_closed": state.gripper_closed,
        "object": list(state.object_pos),
        "target": list(state.target_pos),
        "articulation": state.articulation,
        "step_count": state.step_count,
    }


class SessionHub:
    """All live sessions; sessions are kept after their episode ends so a
    client can reconnect and read the result."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def create(self) -> Session:
        with self._lock:
            self._counter += 1
            session = Session(session_id=f"s{self._counter:04d}", config=self.config)
            self.sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        return self.sessions.get(session_id)


def _run_session_episode(session: Session, task_name: str, seed: int, n: int) -> None:
    cfg = session.config
    task = TASKS[task_name]
    params, stats, meta = load_checkpoint(cfg.checkpoint_path())
    actor = PolicyActor(params, stats)
    task_names = tuple(meta.get("tasks", cfg.tasks))
    throttle = 1.0 / cfg.display_rate_hz if cfg.display_rate_hz > 0 else 0.0

    def command_source(state: WorldState) -> str:
        with session.lock:
            session.turn_state = TURN_AWAITING_EXPERT
            session.turn_index = state.step_count + 1
            session.turn_open = True
        while True:
            session.publish({
                "type": "action_request",
                "step": state.step_count + 1,
                "deadline_s": cfg.turn_timeout_s,
                "commands": list(COMMANDS),
            })
            try:
                command = session.commands.get(timeout=cfg.turn_timeout_s)
            except queue.Empty:
                if session.abort_event.is_set():
                    raise _Aborted()
                continue  # pause-and-reprompt
            with session.lock:
                session.turn_state = TURN_POLICY_RUNNING
            return command

    expert = HumanExpert(command_source)

    def frame_sink(state: WorldState, step_index: int, step, done: bool) -> None:
        if session.abort_event.is_set():
            raise _Aborted()
        session.publish({
            "type": "state",
            "step": step_index,
            "actor": step.actor if step else None,
            "scene": _scene(state),
            "success": bool(step.success) if step else False,
            "done": done,
        })
        if throttle and not done and (step is None or step.actor == "policy"):
            time.sleep(throttle)

    try:
        record = run_episode(actor, expert, task, seed,
                             ArbiterConfig(n=n), obs_mode=cfg.obs_mode,
                             history_k=cfg.history_k, frame_sink=frame_sink,
                             task_names=task_names)
        session.turn_state = TURN_TERMINAL
        session.publish({
            "type": "result", "success": record.success, "steps": record.total_steps,
            "expert_steps": record.expert_steps, "ticks": record.ticks, "aborted": False,
        })
        log_path = Path(cfg.out_dir) / "session-trajectories.jsonl"
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "a") as fh:
            trajlog.write_episode(fh, session.session_id, 0, record)
    except _Aborted:
        session.turn_state = TURN_TERMINAL
        session.publish({"type": "result", "success": False, "steps": 0,
                         "expert_steps": 0, "ticks": 0, "aborted": True})
    except ExpertTimeout:
        session.turn_state = TURN_TERMINAL
        session.publish({"type": "result", "success": False, "steps": 0,
                         "expert_steps": 0, "ticks": 0, "aborted": True})


def _handle_client_frame(session: Session, raw: str, is_controller: bool) -> None:
    try:
        frame = json.loads(raw)
        ftype = frame["type"]
    except (json.JSONDecodeError, KeyError, TypeError):
        session.publish({"type": "reject", "reason": "malformed-frame"})
        return

    if ftype == "heartbeat":
        return
    if not is_controller:
        session.publish({"type": "reject", "reason": "observer-only"})
        return

    if ftype == "start":
        if session.episode_thread is not None:
            session.publish({"type": "reject", "reason": "episode-already-started"})
            return
        task_name = frame.get("task", session.config.tasks[0])
        if task_name not in TASKS:
            session.publish({"type": "reject", "reason": f"unknown-task:{task_name}"})
            return
        seed = int(frame.get("seed", 0))
        n = int(frame.get("n", session.config.arbiter_n))
        session.episode_thread = threading.Thread(
            target=_run_session_episode, args=(session, task_name, seed, n), daemon=True)
        session.episode_thread.start()
        return

    if ftype == "action":
        command = frame.get("command")
        if command not in COMMANDS:
            session.publish({"type": "reject", "reason": f"unknown-command:{command}"})
            return
        # First valid command wins the turn, decided synchronously under the
        # session lock; anything later for the same turn is dropped with a
        # notice. Clients echo the action_request's step as `turn`, which
        # pins double-sends to the turn they answered.
        turn = frame.get("turn")
        with session.lock:
            if session.turn_state != TURN_AWAITING_EXPERT:
                verdict = "not-awaiting-expert"
            elif turn is not None and turn != session.turn_index:
                verdict = "turn-already-answered"
            elif not session.turn_open:
                verdict = "turn-already-answered"
            else:
                session.turn_open = False
                verdict = None
        if verdict is not None:
            session.publish({"type": "reject", "reason": verdict})
            return
        session.commands.put(command)
        session.publish({"type": "ack", "command": command, "step": session.turn_index})
        return

    if ftype == "abort":
        session.abort_event.set()
        return

    session.publish({"type": "reject", "reason": f"unknown-type:{ftype}"})


def build_app(config: RunConfig) -> FastAPI:
    app = FastAPI()
    hub = SessionHub(config)
    app.state.hub = hub

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        resume_id = ws.query_params.get("session")
        session = hub.get(resume_id) if resume_id else None
        resumed = session is not None
        if session is None:
            session = hub.create()
        is_controller = not session.controller_attached
        if is_controller:
            session.controller_attached = True
        outbox = session.subscribe()
        await ws.send_text(json.dumps({
            "type": "hello", "session": session.session_id, "seq": session.next_seq(),
            "protocol": PROTOCOL_VERSION,
            "role": "controller" if is_controller else "observer",
            "resumed": resumed,
        }))

        async def pump_out():
            while True:
                try:
                    frame = await anyio.to_thread.run_sync(
                        lambda: outbox.get(timeout=HEARTBEAT_S), abandon_on_cancel=True)
                except queue.Empty:
                    frame = {"type": "heartbeat", "session": session.session_id,
                             "seq": session.next_seq()}
                try:
                    await ws.send_text(json.dumps(frame))
                except (WebSocketDisconnect, RuntimeError):
                    return

        async def pump_in():
            try:
                while True:
                    raw = await ws.receive_text()
                    _handle_client_frame(session, raw, is_controller)
            except WebSocketDisconnect:
                return

        try:
            async with anyio.create_task_group() as tg:
                tg.start_soon(pump_out)
                await pump_in()
                tg.cancel_scope.cancel()
        finally:
            session.unsubscribe(outbox)
            if is_controller:
                session.controller_attached = False

    return app
