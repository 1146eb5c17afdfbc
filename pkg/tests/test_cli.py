from __future__ import annotations

import json
from collections import Counter

import pytest

from tqdsim.cli import ParseError, Report, ValidationError, emit_report, main, parse_config, run_command


def run_json(argv, capsys):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_parse_gauge_flags():
    cfg = parse_config(["gauge", "--group", "S3", "--cocycle", "p1=1,p2=1", "--lattice", "2x2", "--seed", "7"])
    assert (cfg.command, cfg.group, cfg.params, cfg.lattice, cfg.seed) == ("gauge", "S3", (1, 1), (2, 2), 7)


def test_unknown_group_is_a_validation_error(capsys):
    with pytest.raises(ValidationError):
        parse_config(["verify", "--group", "A5"])
    assert main(["verify", "--group", "A5"]) == 2
    assert "A5" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["verify", "--lattice", "2by2"],
    ["verify", "--group", "S3", "--cocycle", "q=1"],
    ["sfc", "--group", "Z4", "--cocycle", "1"],
    ["fusion", "--group", "S3", "--normal", "e,a,a2"],
    ["sfc", "--group", "Z4", "--normal", "0,7"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_bad_cocycle_params_aggregate():
    with pytest.raises(ValidationError) as err:
        parse_config(["sfc", "--group", "D4", "--cocycle", "9,0,0", "--lattice", "1x3"])
    assert len(err.value.errors) == 3


def test_unreadable_config_file(tmp_path):
    with pytest.raises(ParseError):
        parse_config(["verify", "--config", str(tmp_path / "missing.json")])


def test_config_file_round_trips_through_echo(tmp_path):
    cfg = parse_config(["sfc", "--group", "Z2xZ2", "--cocycle", "k1=1,k3=1", "--normal", "(0,0),(1,0)", "--seed", "3"])
    path = tmp_path / "cfg.json"
    echo = cfg.echo()
    path.write_text(json.dumps(echo))
    again = parse_config([echo["command"], "--config", str(path)])
    assert again == cfg
    assert again.echo() == echo


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"group": "Z3", "params": [1], "lattice": [3, 3]}))
    cfg = parse_config(["verify", "--config", str(path), "--lattice", "2x2"])
    assert (cfg.group, cfg.params, cfg.lattice) == ("Z3", (1,), (2, 2))


def test_sfc_z4_text_report(capsys):
    assert main(["sfc", "--group", "Z4", "--cocycle", "1", "--normal", "0,2", "--format", "text"]) == 0
    assert "0_x×0_x = s" in capsys.readouterr().out


def test_fusion_s3_nine_anyons(capsys):
    code, data = run_json(["fusion", "--group", "S3", "--cocycle", "p1=1", "--normal", "e,a,a2", "--flux", "x"], capsys)
    assert code == 0
    (res,) = data["results"]
    assert Counter(res["anyons"]) == Counter(["1", "e", "e²", "m", "em", "e²m", "m²", "em²", "e²m²"])
    assert res["status"] == "conjectured-operator-derived"


def test_gauge_z2_on_three_by_three(capsys):
    code, data = run_json(["gauge", "--group", "Z2", "--cocycle", "0", "--lattice", "3x3", "--seed", "1"], capsys)
    assert code == 0 and data["passed"]
    eig = next(r for r in data["results"] if r["check"] == "eigenstate")
    assert eig["summary"] == "all pass"


def test_forced_outcomes_file(tmp_path, capsys):
    forced = tmp_path / "forced.json"
    forced.write_text(json.dumps({"1": {str(v): [0] for v in range(4)}}))
    code, data = run_json(["gauge", "--group", "Z2", "--cocycle", "1", "--force-outcomes", str(forced)], capsys)
    assert code == 0
    trace = next(r for r in data["results"] if r["check"] == "trace")["trace"]
    assert json.dumps(trace).count("true") >= 1
    assert data["config"]["forced"] == {"1": {str(v): [0] for v in range(4)}}


def test_inconsistent_forced_outcomes_fail_with_exit_one(tmp_path, capsys):
    forced = tmp_path / "forced.json"
    forced.write_text(json.dumps({"1": {"0": [1], "1": [0], "2": [0], "3": [0]}}))
    code, data = run_json(["gauge", "--group", "Z2", "--cocycle", "0", "--force-outcomes", str(forced)], capsys)
    assert code == 1
    assert not data["passed"]


def test_out_file_and_cocycle_check(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["cocycle-check", "--group", "D4", "--cocycle", "1,1,1", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["results"][0]["check"] == "cocycle-condition"


def test_braiding_with_parenthesized_labels(capsys):
    code, data = run_json(["braiding", "--group", "Z2xZ2", "--cocycle", "0,0,0", "--normal", "(0,0),(1,0)"], capsys)
    assert code == 0
    assert sorted(data["results"][0]["anyons"]) == sorted(["1", "e", "m", "em"])


def test_empty_report_is_valid_json():
    data = json.loads(emit_report(Report({"command": "verify"})))
    assert data["results"] == [] and data["passed"] is True
    assert emit_report(Report({}), "text")


def test_same_report_serializes_identically():
    rep = run_command(parse_config(["verify", "--group", "Z3", "--cocycle", "1"]))
    assert emit_report(rep) == emit_report(rep)
    assert emit_report(rep, "text") == emit_report(rep, "text")


def test_text_table_fits_the_longest_label():
    rep = run_command(parse_config(["sfc", "--group", "D4", "--cocycle", "1,1,1", "--normal", "e,a2",
                                    "--format", "text"]))
    text = emit_report(rep, "text").decode()
    body = [ln for ln in text.splitlines() if ln.startswith("  ")]
    longest = max(len(s) for s in rep.results[0]["lines"])
    assert body and all(len(ln) == longest + 2 for ln in body)
    assert any("ss̄" in ln for ln in body)


def test_replay_from_echoed_config_reproduces_results(tmp_path):
    first = run_command(parse_config(["gauge", "--group", "S3", "--cocycle", "p1=1,p2=1", "--seed", "7"]))
    path = tmp_path / "echo.json"
    path.write_text(json.dumps(first.config))
    replay = run_command(parse_config(["gauge", "--config", str(path)]))
    assert first.results == replay.results
