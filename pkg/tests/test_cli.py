"""Command-line behavior: subcommands, exit codes, artifacts on disk."""

import json

import numpy as np
import pytest

from socnav.cli import main
from socnav.config import config_to_dict, default_config
from socnav.episode import canonical_json, run_episode
from socnav.harness import GoAlonePolicy
from socnav.world import load_map, save_map, scenario_schedule


def run(argv: list[str]) -> int:
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage failures
        return int(exc.code)


@pytest.fixture
def quick_cfg_path(tmp_path):
    cfg = default_config(seed=9, h_min=0, h_max=0, t_fail=1.0)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config_to_dict(cfg)), encoding="utf-8")
    return str(path)


def test_no_subcommand_is_usage_error(capsys):
    assert run([]) == 2
    capsys.readouterr()


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["frobnicate"]) == 2
    capsys.readouterr()


def test_validate_map_builtin_names_pass(capsys):
    assert run(["validate-map", "training"]) == 0
    assert run(["validate-map", "transfer"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out


def test_validate_map_file_path_passes(tmp_path, capsys):
    path = tmp_path / "copy.json"
    save_map(load_map("training"), path)
    assert run(["validate-map", str(path)]) == 0
    capsys.readouterr()


def test_validate_map_names_wall_crossing_edge(tmp_path, capsys):
    bad = {
        "format_version": 1,
        "name": "bad",
        "segments": [[1.0, -1.0, 1.0, 1.0]],
        "nav_nodes": [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
        "nav_edges": [[0, 1]],
        "legal_pose_indices": [0, 1],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad), encoding="utf-8")
    assert run(["validate-map", str(path)]) == 1
    err = capsys.readouterr().err
    assert "edge (0,1) crosses wall segment 0" in err


def test_validate_map_missing_file_is_config_error(tmp_path, capsys):
    assert run(["validate-map", str(tmp_path / "nope.json")]) == 1
    capsys.readouterr()


def test_bad_config_json_exits_one(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert run(["bench", "--config", str(path)]) == 1
    assert "socnav:" in capsys.readouterr().err


def test_bench_unknown_policy_is_usage_error(capsys):
    assert run(["bench", "--policies", "warp9"]) == 2
    capsys.readouterr()


def test_bench_writes_report(tmp_path, quick_cfg_path, capsys):
    out = tmp_path / "report.json"
    code = run(
        ["bench", "--config", quick_cfg_path, "--policies", "goalone,halt",
         "--episodes", "3", "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["n_episodes"] == 3
    assert set(report["policies"]) == {"goalone", "halt"}
    assert report["policies"]["halt"]["success_rate"] == 0.0
    stdout = capsys.readouterr().out
    assert "halt: success_rate=0.000" in stdout


def test_bench_without_out_prints_json(quick_cfg_path, capsys):
    assert run(
        ["bench", "--config", quick_cfg_path, "--policies", "halt", "--episodes", "2"]
    ) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["policies"]["halt"]["episodes"] == 2


def test_replay_renders_one_frame_per_step(tmp_path, capsys):
    cfg = default_config(seed=13, t_fail=2.0)
    scenario, _ = next(scenario_schedule(cfg.scenario))
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0)))
    record = run_episode(scenario, GoAlonePolicy(), cfg, rng=rng)
    log_path = tmp_path / "steps.jsonl"
    log_path.write_text(
        "".join(canonical_json(s) + "\n" for s in record.steps), encoding="utf-8"
    )
    out_dir = tmp_path / "frames"
    assert run(["replay", str(log_path), "--out", str(out_dir)]) == 0
    frames = sorted(out_dir.glob("frame_*.svg"))
    assert len(frames) == record.n_steps
    first = frames[0].read_text(encoding="utf-8")
    assert first.startswith("<svg") and "</svg>" in first
    capsys.readouterr()


def test_replay_missing_log_exits_one(tmp_path, capsys):
    assert run(["replay", str(tmp_path / "none.jsonl"), "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_seed_flag_changes_bench_scenarios(quick_cfg_path, capsys):
    def report_for(seed: str) -> dict:
        assert run(
            ["bench", "--config", quick_cfg_path, "--policies", "halt",
             "--episodes", "2", "--seed", seed]
        ) == 0
        return json.loads(capsys.readouterr().out)

    assert report_for("1")["scenario_hashes"] != report_for("2")["scenario_hashes"]
    assert report_for("3") == report_for("3")
