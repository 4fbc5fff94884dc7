"""Tests for the experiment command line"""
import sys
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from pydantic import ValidationError

# Add the parent directory to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from cli.experiment_tools import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    load_config,
    render,
    toolkit,
)
from cli.presets import ghz_ish_state, resolve_algebra, resolve_state
from cli.schema import ExperimentConfig
from config.config import settings
from modules.exceptions import ConfigError
from modules.linops import MatrixPayload
from tests.utils import assert_matrix_close


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(toolkit, ["--log-level", "WARNING", *args])


# ---------------------------------------------------------------------------
# Presets and configuration
# ---------------------------------------------------------------------------

def test_resolve_algebra_presets():
    """Preset strings map onto block structures"""
    assert resolve_algebra("diagonal(3)").blocks == [(1, 1)] * 3, "diagonal(3)"
    assert resolve_algebra("factor(2, 3)").blocks == [(3, 2)], "factor(2,3)"
    assert resolve_algebra("trivial(2)").blocks == [(2, 1)], "trivial(2)"
    for bad in ("bogus(2)", "diagonal", "factor(2)", "diagonal(0)"):
        with pytest.raises(ConfigError):
            resolve_algebra(bad)


def test_resolve_algebra_from_file(tmp_path):
    """Structure files restore blocks and basis"""
    path = tmp_path / "algebra.json"
    path.write_text(json.dumps({
        "dim": 2,
        "blocks": [[1, 1], [1, 1]],
        "unitary": MatrixPayload.from_array(np.eye(2)).model_dump(),
    }))
    assert resolve_algebra(str(path)).blocks == [(1, 1), (1, 1)], "blocks from file"
    with pytest.raises(ConfigError):
        resolve_algebra(str(tmp_path / "missing.json"))


def test_resolve_state_presets():
    """plus, ghz-ish and seeded random states"""
    assert_matrix_close(resolve_state("plus", 2, 0), np.full((2, 2), 0.5), 1e-12, "plus")
    ghz = resolve_state("ghz-ish", 4, 0)
    assert abs(np.trace(ghz) - 1) < 1e-12, "ghz-ish is not normalized"
    assert_matrix_close(resolve_state("random(5)", 3, 0), resolve_state("random(5)", 3, 99), 0.0, "random(5)")
    with pytest.raises(ConfigError):
        resolve_state("sunny", 2, 0)
    with pytest.raises(ConfigError):
        ghz_ish_state(3)


def test_experiment_config_defaults():
    """Empty grids fall back to the configured defaults"""
    config = ExperimentConfig(task="duality", eps=[], alpha=[])
    assert config.eps == sorted(settings.EPS_GRID), f"eps {config.eps}"
    assert config.alpha == sorted(settings.ALPHA_GRID), f"alpha {config.alpha}"


def test_experiment_config_validation(tmp_path):
    for bad in ({"eps": [1.0]}, {"alpha": [0.3]}, {"n_max": 0}, {"out": tmp_path / "nowhere" / "r.json"}):
        with pytest.raises(ValidationError):
            ExperimentConfig(task="aep", **bad)


def test_load_config_precedence(tmp_path):
    """Flags override the file, the command fixes the task"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"task": "stein", "algebra": "trivial(2)", "seed": 3, "eps": [0.2]}))
    config = load_config("aep", str(path), {"seed": 11, "eps": (), "state": None})
    assert config.task == "aep", f"task {config.task}"
    assert config.algebra == "trivial(2)", f"algebra {config.algebra}"
    assert config.seed == 11, f"seed {config.seed}"
    assert config.eps == [0.2], f"eps {config.eps}"


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config("duality", str(path), {})


def test_render_csv():
    """CSV output carries the header as comments and the union of row keys"""
    text = render({"task": "stein"}, [{"n": 1, "a": 0.5}, {"n": 2, "b": float("inf")}], True, "csv")
    lines = text.splitlines()
    assert lines[0] == "# task: stein", f"first line {lines[0]}"
    assert lines[2] == "n,a,b", f"columns {lines[2]}"
    assert lines[4] == "2,,", f"infinite value row {lines[4]}"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def test_presets_command(runner):
    result = invoke(runner, "presets")
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    names = [p["name"] for p in json.loads(result.stdout)]
    assert "swap-invariant" in names and "ghz-ish" in names, f"presets {names}"


def test_decompose_command(runner, tmp_path):
    """diagonal(2): λ⁻¹ = 2 and the flat state reaches one bit"""
    out = tmp_path / "decompose.json"
    result = invoke(runner, "decompose", "--algebra", "diagonal(2)", "--alpha", "1", "--alpha", "inf",
                    "--out", str(out))
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    report = json.loads(out.read_text())
    assert report["passed"], "decompose checks failed"
    structure = report["rows"][0]
    assert structure["index_inverse"] == 2, f"index {structure['index_inverse']}"
    assert report["header"]["alpha"] == [1.0, "inf"], f"header alpha {report['header']['alpha']}"


def test_dilution_command(runner, tmp_path):
    """|+⟩ against diagonal(2) costs one bit in both classes"""
    out = tmp_path / "dilution.json"
    result = invoke(runner, "dilution", "--state", "plus", "--algebra", "diagonal(2)", "--eps", "0",
                    "--alpha", "1", "--out", str(out))
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    report = json.loads(out.read_text())
    brackets = [row for row in report["rows"] if row["row"] == "bracket"]
    assert [row["class"] for row in brackets] == ["MIO", "DIO"], "bracket rows missing"
    assert all(row["n"] == 2 for row in brackets), f"source dimensions {[row['n'] for row in brackets]}"


def test_duality_command_csv(runner, tmp_path):
    out = tmp_path / "duality.csv"
    result = invoke(runner, "duality", "--state", "random", "--algebra", "diagonal(2)", "--eps", "0",
                    "--alpha", "1", "--alpha", "inf", "--format", "csv", "--out", str(out))
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    text = out.read_text()
    assert text.startswith("# project:"), "missing header comments"
    assert "# passed: True" in text, "duality check failed"


def test_stein_command(runner, tmp_path):
    out = tmp_path / "stein.json"
    result = invoke(runner, "stein", "--state", "plus", "--algebra", "diagonal(2)", "--eps", "0.1",
                    "--nmax", "2", "--out", str(out))
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    rows = json.loads(out.read_text())["rows"]
    assert [row["n"] for row in rows] == [1, 2], f"rows {rows}"


def test_aep_command_with_and_without_smoothing(runner, tmp_path):
    """ε = 0 runs next to a smoothed column and D_max/n does not rise with ε"""
    out = tmp_path / "aep.json"
    result = invoke(runner, "aep", "--state", "plus", "--algebra", "diagonal(2)", "--eps", "0", "--eps", "0.1",
                    "--nmax", "2", "--out", str(out))
    assert result.exit_code == EXIT_OK, f"exit {result.exit_code}: {result.output}"
    rows = json.loads(out.read_text())["rows"]
    assert sorted({row["epsilon"] for row in rows}) == [0.0, 0.1], f"epsilon column {rows}"
    unsmoothed = [row for row in rows if row["epsilon"] == 0.0]
    assert [row["n"] for row in unsmoothed] == [1, 2], f"unsmoothed rows {unsmoothed}"
    for row in unsmoothed:
        assert abs(row["dmax_eps_per_copy"] - 1.0) < 1e-5, f"n={row['n']}: D_max/n {row['dmax_eps_per_copy']}"


def test_configuration_errors_exit_two(runner):
    """Bad input exits with code 2 before any solver runs"""
    cases = [
        ("duality", "--eps", "1.5"),
        ("duality", "--algebra", "bogus(2)"),
        ("aep", "--eps", "1.0"),
        ("stein", "--algebra", "diagonal(2)", "--nmax", "10", "--eps", "0.1"),
        ("dilution", "--state", "ghz-ish", "--algebra", "diagonal(3)"),
    ]
    for args in cases:
        result = invoke(runner, *args)
        assert result.exit_code == EXIT_CONFIG_ERROR, f"{args}: exit {result.exit_code}"
