"""Command-line front end: serve, bench, replay, validate-map.

Exit codes: 0 success, 1 config or I/O errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import SimConfig, default_config, load_config
from .harness import POLICY_NAMES, make_policy, run_benchmark
from .server import configure_logging, serve
from .world import ConfigError, WorldMap, load_map, validate_world


def _add_config_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", help="simulation config JSON")
    sp.add_argument("--seed", type=int, metavar="N", help="override the config seed")


def _load_cfg(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = replace(cfg, scenario=replace(cfg.scenario, seed=args.seed))
    return cfg


def _cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _load_cfg(args)
    port = args.port if args.port is not None else None
    return serve(cfg, port=port, log_path=args.log)


def _cmd_bench(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _load_cfg(args)
    names = [s.strip() for s in args.policies.split(",") if s.strip()]
    if not names:
        parser.error("--policies needs at least one policy name")
    try:
        policies = [make_policy(name, seed=cfg.seed) for name in names]
    except ValueError as exc:
        parser.error(str(exc))
    report = run_benchmark(policies, cfg, n_episodes=args.episodes, n_jobs=args.jobs)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        for name, agg in report.policies.items():
            rate = agg["success_rate"]
            print(f"{name}: success_rate={rate:.3f} over {report.n_episodes} episodes")
    else:
        print(text)
    return 0


def _cmd_validate_map(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    world = load_map(args.map)
    problems = validate_world(world)
    if problems:
        for item in problems:
            print(f"{args.map}: {item}", file=sys.stderr)
        return 1
    print(
        f"{args.map}: ok ({len(world.nav_nodes)} nodes, "
        f"{len(world.nav_edges)} edges, {len(world.segments)} walls)"
    )
    return 0


def _cmd_replay(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    log = args.log if args.log is not None else args.log_flag
    if log is None:
        parser.error("replay needs a step log (positional LOG or --log PATH)")
    cfg = _load_cfg(args)
    with open(log, encoding="utf-8") as fh:
        entries = [json.loads(line) for line in fh if line.strip()]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = render_log_frames(entries, cfg.world, out_dir)
    print(f"wrote {n} frames to {out_dir}")
    return 0


# --- replay rendering ----------------------------------------------------

_SCALE = 40.0  # px per meter
_PAD = 1.0     # meters of margin around the scene


def _world_points(entry: dict) -> tuple[tuple[float, float], list[tuple[float, float]]]:
    """Recover the goal and visible human positions in world frame.

    The log stores the robot pose and the robot-frame observation; slots
    of exact zeros are absent or occluded humans and are skipped.
    """
    x, y, theta = entry["robot"]
    obs = entry["obs"]
    c, s = math.cos(theta), math.sin(theta)

    def to_world(lx: float, ly: float) -> tuple[float, float]:
        return (x + c * lx - s * ly, y + s * lx + c * ly)

    goal = to_world(obs[0], obs[1])
    humans = []
    for base in range(6, len(obs), 4):
        px, py, vx, vy = obs[base : base + 4]
        if px == 0.0 and py == 0.0 and vx == 0.0 and vy == 0.0:
            continue
        humans.append(to_world(px, py))
    return goal, humans


def render_log_frames(entries: list[dict], world: WorldMap, out_dir: Path) -> int:
    """Write one SVG per log entry; returns the frame count.

    Frame bounds are computed once over the whole trajectory so the
    sequence plays back without jitter.
    """
    xs: list[float] = []
    ys: list[float] = []
    for seg in world.segments:
        xs += [seg.a.x, seg.b.x]
        ys += [seg.a.y, seg.b.y]
    goals = []
    trail: list[tuple[float, float]] = []
    per_frame_humans = []
    for entry in entries:
        goal, humans = _world_points(entry)
        goals.append(goal)
        per_frame_humans.append(humans)
        trail.append((entry["robot"][0], entry["robot"][1]))
        for p in [goal, *humans]:
            xs.append(p[0])
            ys.append(p[1])
        xs.append(entry["robot"][0])
        ys.append(entry["robot"][1])
    if not xs:
        return 0
    min_x, max_x = min(xs) - _PAD, max(xs) + _PAD
    min_y, max_y = min(ys) - _PAD, max(ys) + _PAD

    def sx(x: float) -> float:
        return (x - min_x) * _SCALE

    def sy(y: float) -> float:
        return (max_y - y) * _SCALE  # SVG y axis points down

    width = (max_x - min_x) * _SCALE
    height = (max_y - min_y) * _SCALE
    walls = "".join(
        f'<line x1="{sx(s.a.x):.1f}" y1="{sy(s.a.y):.1f}" '
        f'x2="{sx(s.b.x):.1f}" y2="{sy(s.b.y):.1f}" '
        'stroke="#333" stroke-width="3"/>'
        for s in world.segments
    )
    for k, entry in enumerate(entries):
        x, y, theta = entry["robot"]
        gx, gy = goals[k]
        tip = (x + 0.45 * math.cos(theta), y + 0.45 * math.sin(theta))
        trail_pts = " ".join(f"{sx(px):.1f},{sy(py):.1f}" for px, py in trail[: k + 1])
        humans = "".join(
            f'<circle cx="{sx(hx):.1f}" cy="{sy(hy):.1f}" r="{0.3 * _SCALE:.1f}" '
            'fill="#d62728" fill-opacity="0.8"/>'
            for hx, hy in per_frame_humans[k]
        )
        body = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
            f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">'
            f'<rect width="100%" height="100%" fill="#fafafa"/>{walls}'
            f'<circle cx="{sx(gx):.1f}" cy="{sy(gy):.1f}" r="{0.5 * _SCALE:.1f}" '
            'fill="none" stroke="#2ca02c" stroke-dasharray="4 3"/>'
            f'<polyline points="{trail_pts}" fill="none" stroke="#9ecae1" stroke-width="2"/>'
            f"{humans}"
            f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="{0.3 * _SCALE:.1f}" fill="#1f77b4"/>'
            f'<line x1="{sx(x):.1f}" y1="{sy(y):.1f}" x2="{sx(tip[0]):.1f}" '
            f'y2="{sy(tip[1]):.1f}" stroke="#fff" stroke-width="2"/>'
            f'<text x="6" y="14" font-family="monospace" font-size="12">'
            f't={entry["t"]:.2f}s a={entry["action"]}</text>'
            "</svg>"
        )
        (out_dir / f"frame_{k:05d}.svg").write_text(body, encoding="utf-8")
    return len(entries)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socnav",
        description="2D social-navigation simulator: service, benchmark, and map tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("serve", help="serve one episodic session over JSON lines")
    _add_config_args(sp)
    transport = sp.add_mutually_exclusive_group()
    transport.add_argument(
        "--stdio", action="store_true", help="serve on stdin/stdout (default)"
    )
    transport.add_argument(
        "--port", type=int, metavar="N",
        help="serve one TCP connection on 127.0.0.1:N (0 picks a free port)",
    )
    sp.add_argument("--log", metavar="PATH", help="write per-step JSONL logs to PATH")
    sp.set_defaults(func=_cmd_serve)

    bp = sub.add_parser("bench", help="run the policy benchmark")
    _add_config_args(bp)
    bp.add_argument(
        "--policies", default=",".join(POLICY_NAMES), metavar="A,B,...",
        help=f"comma-separated policy names from {POLICY_NAMES}",
    )
    bp.add_argument("--episodes", type=int, metavar="N", help="episode count")
    bp.add_argument("--out", metavar="PATH", help="write the report JSON here")
    bp.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel episodes")
    bp.set_defaults(func=_cmd_bench)

    rp = sub.add_parser("replay", help="render a step log to SVG frames")
    _add_config_args(rp)
    # Accept the log either positionally or as --log, matching the flag
    # vocabulary the other subcommands use.
    rp.add_argument("log", nargs="?", metavar="LOG", help="JSONL step log to render")
    rp.add_argument("--log", dest="log_flag", metavar="PATH", help=argparse.SUPPRESS)
    rp.add_argument("--out", required=True, metavar="DIR", help="frame output directory")
    rp.set_defaults(func=_cmd_replay)

    vp = sub.add_parser("validate-map", help="check a map file's invariants")
    vp.add_argument("map", metavar="MAP", help="map JSON path or builtin name")
    vp.set_defaults(func=_cmd_validate_map)
    return parser


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ConfigError as exc:
        print(f"socnav: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"socnav: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
