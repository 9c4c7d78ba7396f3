"""
Wire protocol and replay rendering
==================================

Drives the line-delimited JSON session the way an external client
would, logging every step, then renders the log into SVG frames. The
same session is reachable out-of-process via

    python -m socnav serve --stdio
"""

import json
import os
import tempfile
from pathlib import Path

from socnav import default_config
from socnav.cli import render_log_frames
from socnav.server import Session

cfg = default_config(seed=5)
log_path = os.path.join(tempfile.mkdtemp(prefix="socnav_demo_"), "episode.jsonl")
session = Session(cfg, log_path=log_path)


def ask(payload: dict) -> dict:
    reply, _ = session.handle_line(json.dumps(payload))
    return json.loads(reply)


# Handshake: dimensions first, so a client can size its buffers.
spec = ask({"cmd": "spec"})
print("spec:", spec)

# Reset with an explicit seed restarts the scenario schedule, so two
# fresh sessions given the same seed replay the same episodes.
obs = ask({"cmd": "reset", "seed": 42})
print(f"reset -> scenario {obs['scenario'][:12]}..., obs[{len(obs['obs'])}]")

# Malformed requests get an error response; the session survives.
print("bad action ->", ask({"cmd": "step", "action": 99}))

done = False
steps = 0
while not done:
    reply = ask({"cmd": "step", "action": 0})  # 0 = go alone
    done, steps = reply["done"], steps + 1
print(f"episode over after {steps} steps, outcome={reply['outcome']}, "
      f"last reward={reply['reward']:+.3f}")
ask({"cmd": "close"})

# The log holds one JSON object per step; replay it into frames.
with open(log_path) as fh:
    entries = [json.loads(line) for line in fh]
out_dir = Path(log_path).parent / "frames"
out_dir.mkdir(exist_ok=True)
n = render_log_frames(entries, cfg.scenario.world, out_dir)
print(f"log {log_path}\nrendered {n} SVG frames into {out_dir}")
