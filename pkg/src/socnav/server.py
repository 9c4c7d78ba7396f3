"""Line-delimited JSON environment service.

One server process hosts exactly one session: a client drives the
episode loop over newline-terminated JSON objects, on stdio or on a
single TCP connection. Every request line produces exactly one response
line; malformed input produces an error response and leaves the session
usable. The loop underneath is the in-process EpisodeRunner, so step
logs written with --log are byte-identical to library-driven runs.

Request:  {"cmd": "reset" | "step" | "spec" | "close",
           "action": <int, step only>, "seed": <int, reset only>}
Response: {"obs", "reward", "done", "outcome", "metrics"} on step,
          {"obs", "done", "scenario"} on reset, or {"error": "..."}.
"""

from __future__ import annotations

import json
import logging
import os
import socket
import sys
from dataclasses import replace
from typing import IO, TYPE_CHECKING

import numpy as np

from .episode import AgentProtocolError, EpisodeRunner, canonical_json
from .nav import DiscreteAction
from .world import Terminal, scenario_hash, scenario_schedule

if TYPE_CHECKING:
    from .config import SimConfig

log = logging.getLogger("socnav.server")

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_OUTCOME_NAMES = {Terminal.SUCCESS: "success", Terminal.FAILURE: "failure"}


def configure_logging() -> None:
    """Route logs to stderr at the level named by SOCNAV_LOG_LEVEL.

    stdout stays reserved for protocol traffic. Unknown level names fall
    back to "warn" rather than refusing to start.
    """
    name = os.environ.get("SOCNAV_LOG_LEVEL", "warn").strip().lower()
    level = LOG_LEVELS.get(name, logging.WARNING)
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )


class Session:
    """One client's environment: a scenario schedule plus the running episode.

    reset() pulls the next scheduled scenario; reset with a seed restarts
    the schedule from that seed, so two fresh sessions resetting with the
    same seed see identical episodes. Episode k after a (re)seed draws its
    noise stream from (seed, k), the same keying run_benchmark uses.
    """

    def __init__(self, cfg: "SimConfig", log_path: str | None = None):
        self.cfg = cfg
        self._log: IO[str] | None = (
            open(log_path, "w", encoding="utf-8") if log_path else None
        )
        self._runner: EpisodeRunner | None = None
        self._reseed(cfg.seed)

    def _reseed(self, seed: int) -> None:
        self._seed = seed
        scen = self.cfg.scenario
        if seed != scen.seed:
            scen = replace(scen, seed=seed)
        self._schedule = scenario_schedule(scen)
        self._episode_index = 0

    def close(self) -> None:
        if self._log is not None:
            self._log.close()
            self._log = None

    def handle_line(self, line: str) -> tuple[str, bool]:
        """One request line in, one canonical-JSON response line out.

        The returned flag is True when the client asked to close. Any
        failure, including unexpected internal ones, becomes an error
        response; nothing a client sends may kill the session.
        """
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            return canonical_json({"error": "invalid JSON"}), False
        if not isinstance(msg, dict):
            return canonical_json({"error": "request must be a JSON object"}), False
        cmd = msg.get("cmd")
        try:
            if cmd == "spec":
                resp = self._do_spec()
            elif cmd == "reset":
                resp = self._do_reset(msg)
            elif cmd == "step":
                resp = self._do_step(msg)
            elif cmd == "close":
                return canonical_json({"ok": True}), True
            else:
                resp = {"error": f"unknown cmd: {cmd!r}"}
        except Exception as exc:  # noqa: BLE001 - session must survive any request
            log.exception("request failed: %r", line[:200])
            resp = {"error": f"internal: {type(exc).__name__}: {exc}"}
        return canonical_json(resp), False

    def _do_spec(self) -> dict:
        return {
            "obs_dim": self.cfg.obs_dim,
            "n_actions": len(DiscreteAction),
            "dt": self.cfg.nav.control_period,
        }

    def _do_reset(self, msg: dict) -> dict:
        seed = msg.get("seed")
        if seed is not None:
            if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
                return {"error": "seed must be a non-negative integer"}
            self._reseed(seed)
        try:
            scenario, _ = next(self._schedule)
        except StopIteration:
            return {"error": "scenario schedule exhausted; reset with a seed to restart"}
        rng = np.random.default_rng(np.random.SeedSequence((self._seed, self._episode_index)))
        self._episode_index += 1
        self._runner = EpisodeRunner(self.cfg, scenario, rng=rng)
        obs = self._runner.reset()
        return {
            "obs": [float(x) for x in obs],
            "done": False,
            "scenario": scenario_hash(scenario),
        }

    def _do_step(self, msg: dict) -> dict:
        if self._runner is None:
            return {"error": "step before reset"}
        if self._runner.done:
            return {"error": "episode done; only reset, spec, or close are accepted"}
        if "action" not in msg:
            return {"error": "missing action"}
        action = msg["action"]
        if isinstance(action, bool):  # JSON true would coerce to action 1
            return {"error": "action out of range"}
        try:
            out = self._runner.step(action)
        except AgentProtocolError:
            return {"error": "action out of range"}
        if self._log is not None:
            self._log.write(canonical_json(out.log_line) + "\n")
            self._log.flush()
        m = out.metrics
        return {
            "obs": [float(x) for x in out.obs],
            "reward": out.reward,
            "done": out.done,
            "outcome": _OUTCOME_NAMES.get(out.outcome),
            "metrics": {
                "d_g": m.d_g,
                "force": m.force,
                "blame": m.blame,
                "dist_step": m.dist_step,
                "human_collisions": m.human_collisions,
                "wall_collisions": m.wall_collisions,
            },
        }


def _serve_streams(session: Session, rf: IO[str], wf: IO[str]) -> int:
    for line in rf:
        resp, closing = session.handle_line(line)
        wf.write(resp + "\n")
        wf.flush()
        if closing:
            break
    session.close()
    return 0


def serve(
    cfg: "SimConfig", *, port: int | None = None, log_path: str | None = None
) -> int:
    """Serve one session on stdio (default) or one TCP connection.

    Returns the process exit code: 0 after close or client EOF, 1 on
    transport loss. With port=0 the OS picks a port; the bound address is
    announced on stderr either way.
    """
    session = Session(cfg, log_path)
    if port is None:
        # Fuzz input may not be valid UTF-8; mangle it instead of dying.
        if hasattr(sys.stdin, "reconfigure"):
            sys.stdin.reconfigure(errors="replace")
        try:
            return _serve_streams(session, sys.stdin, sys.stdout)
        except (BrokenPipeError, ConnectionError):
            log.error("stdio transport lost")
            return 1
        finally:
            session.close()
    with socket.create_server(("127.0.0.1", port)) as srv:
        bound = srv.getsockname()[1]
        print(f"listening on 127.0.0.1:{bound}", file=sys.stderr, flush=True)
        conn, peer = srv.accept()
        log.info("client %s:%d connected", *peer)
        with conn:
            rf = conn.makefile("r", encoding="utf-8", errors="replace", newline="\n")
            wf = conn.makefile("w", encoding="utf-8", newline="\n")
            try:
                return _serve_streams(session, rf, wf)
            except (BrokenPipeError, ConnectionError):
                log.error("tcp transport lost")
                return 1
            finally:
                session.close()
