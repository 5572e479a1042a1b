"""Config parsing round-trips and the command-line front end."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from lorentz_ops import catalog
from lorentz_ops.config import ConfigError, parse_config, serialize

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "finite_wut.toml"


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "lorentz_ops.cli", *args],
        capture_output=True,
        text=True,
        timeout=120,
    )


# --- round-trips --------------------------------------------------------------


@pytest.mark.parametrize("entry_id", catalog.entry_ids())
def test_catalog_configs_round_trip(entry_id):
    cfg = catalog.entry(entry_id).config
    assert parse_config(serialize(cfg)) == cfg


def test_fixture_round_trips_and_serialize_is_stable():
    cfg = parse_config(FIXTURE.read_text())
    text = serialize(cfg)
    assert parse_config(text) == cfg
    assert serialize(parse_config(text)) == text


def test_parser_collects_every_problem():
    bad = FIXTURE.read_text().replace('b = "2"', 'b = "-2"', 1).replace(
        'p = "2"', 'p = "1"'
    )
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    messages = [m for _, m in exc.value.problems]
    assert len(messages) >= 2
    assert any("positive" in m for m in messages)
    assert any("exceed 1" in m for m in messages)


def test_parser_flags_unknown_operator_kind():
    bad = FIXTURE.read_text().replace('kind = "wut"', 'kind = "frobnicate"')
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert any("operator" in path for path, _ in exc.value.problems)


def test_parser_reports_toml_syntax_errors():
    with pytest.raises(ConfigError) as exc:
        parse_config("[space\nengine =")
    (problem,) = exc.value.problems
    assert problem[0] == "syntax"


# --- command line -------------------------------------------------------------


def test_analyze_text_output():
    res = run_cli("analyze", str(FIXTURE))
    assert res.returncode == 0, res.stderr
    assert "agree" in res.stdout and "disagree\n" not in res.stdout


def test_analyze_json_matches_golden():
    res = run_cli("analyze", str(FIXTURE), "--json")
    assert res.returncode == 0, res.stderr
    got = json.loads(res.stdout)
    got.pop("timings_ms", None)
    golden = json.loads((DATA / "finite_wut.golden.json").read_text())
    assert got == golden


def test_analyze_missing_file_is_a_usage_error():
    res = run_cli("analyze", "/no/such/file.toml")
    assert res.returncode == 1


def test_analyze_invalid_config_lists_problems():
    bad = FIXTURE.read_text().replace('p = "2"', 'p = "1"')
    path = DATA / "_bad.toml"
    path.write_text(bad)
    try:
        res = run_cli("analyze", str(path))
        assert res.returncode == 2
        assert "exceed 1" in res.stderr
    finally:
        path.unlink()


def test_bad_horizon_is_a_validation_error():
    res = run_cli("analyze", str(FIXTURE), "--horizon", "-3")
    assert res.returncode == 2


def test_no_arguments_is_a_usage_error():
    res = run_cli()
    assert res.returncode == 1


def test_replicate_all():
    res = run_cli("replicate", "all")
    assert res.returncode == 0, res.stdout + res.stderr
    for entry_id in catalog.entry_ids():
        assert entry_id in res.stdout


def test_replicate_unknown_id():
    res = run_cli("replicate", "ex-99.9")
    assert res.returncode == 2
    assert "ex-3.2a" in res.stderr  # the error names the known ids


def test_replicate_json_shape():
    res = run_cli("replicate", "ex-5.4", "--json")
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc[0]["id"] == "ex-5.4" and doc[0]["ok"] is True


def test_norms_on_the_fixture():
    res = run_cli("norms", str(FIXTURE), "--function", "2 on {a,c}")
    assert res.returncode == 0, res.stderr
    assert "norm" in res.stdout


def test_norms_rejects_interval_syntax_on_atoms():
    res = run_cli("norms", str(FIXTURE), "--function", "3 on (0,1)")
    assert res.returncode == 2
    assert "interval engine" in res.stderr


# --- exit code 4: genuine mismatches, forced ----------------------------------


def test_analyze_disagreement_exits_four(monkeypatch, capsys):
    import dataclasses

    from lorentz_ops import cli
    from lorentz_ops import report as report_mod

    real_analyze = report_mod.analyze

    def sabotaged(config, horizon=None, tolerance=None):
        rep = real_analyze(config, horizon=horizon, tolerance=tolerance)
        rows = tuple(
            dataclasses.replace(row, status="disagree") for row in rep.cross_checks
        )
        return dataclasses.replace(rep, cross_checks=rows)

    monkeypatch.setattr(cli, "analyze", sabotaged)
    code = cli.main(["analyze", str(FIXTURE)])
    assert code == 4
    assert "disagree" in capsys.readouterr().err


def test_replicate_mismatch_exits_four(monkeypatch, capsys):
    import dataclasses

    from lorentz_ops import cli

    real = catalog.replicate

    def sabotaged(entry):
        res = real(entry)
        return dataclasses.replace(res, mismatches=("forced mismatch",))

    monkeypatch.setattr(cli.catalog, "replicate", sabotaged)
    code = cli.main(["replicate", "ex-3.2a"])
    assert code == 4
    assert "forced mismatch" in capsys.readouterr().out
