"""
Integration tests for the holonomy command-line interface.
"""

import json

import pandas as pd
import pytest

from holonomy.cli import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_WARNING,
    RunConfig,
    build_parser,
    config_from_args,
    main,
)
from holonomy.core.blowup import DENSITY_LIMITS
from holonomy.utils.tolerances import DEFAULT_SEED

pytestmark = pytest.mark.integration


class TestExitCodes:
    """Exit status mapping: 0 ok, 2 advisory warnings, 1 errors."""

    def test_check_figure_eight(self, scene_file, capsys):
        assert main(["check", str(scene_file())]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["scene"] == "fig8_5_1"
        assert report["warnings"] == 0
        assert report["orbits"][0]["parity_ok"] is True

    def test_check_fibered_warns(self, scene_file, capsys):
        assert main(["check", str(scene_file("fibered"))]) == EXIT_WARNING
        report = json.loads(capsys.readouterr().out)
        assert report["warnings"] >= 1

    def test_check_mixed_signs(self, scene_file):
        assert main(["check", str(scene_file("mixed_sign"))]) == EXIT_ERROR

    def test_malformed_scene(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        assert main(["check", str(path)]) == EXIT_ERROR

    def test_missing_scene(self, tmp_path):
        assert main(["check", str(tmp_path / "missing.json")]) == EXIT_ERROR

    def test_unknown_flag(self, scene_file, capsys):
        assert main(["check", str(scene_file()), "--frobnicate"]) == EXIT_ERROR
        assert "unrecognized arguments" in capsys.readouterr().err

    def test_unknown_command(self):
        assert main(["teleport"]) == EXIT_ERROR

    def test_bad_tolerance_override(self, scene_file):
        assert main(["check", str(scene_file()), "--tol", "event_tol"]) == EXIT_ERROR
        assert main(["check", str(scene_file()), "--tol", "nonsense=1"]) == EXIT_ERROR


class TestTreeCommand:
    """The scene-free tree command."""

    def test_gluing_a(self, capsys):
        assert main(["tree", "--gluing", "A", "--depth", "8", "--resolution", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "classes: 33" in out
        assert "total order: true" in out
        assert "shift equivariant: true" in out

    def test_gluing_b_claims(self, capsys):
        code = main(["tree", "--gluing", "B", "--depth", "8", "--resolution", "2", "--pairs", "50"])
        out = capsys.readouterr().out
        assert "total order: false" in out
        assert "disagreements: 0" in out
        assert code == EXIT_OK

    def test_dot_output(self, tmp_path):
        dot = tmp_path / "q.dot"
        assert main(["tree", "--depth", "3", "--resolution", "1", "--dot", str(dot)]) == EXIT_OK
        assert dot.read_text().startswith("digraph")

    def test_report_file(self, tmp_path):
        out = tmp_path / "tree" / "report.txt"
        assert main(["tree", "--depth", "4", "--resolution", "1", "--out", str(out)]) == EXIT_OK
        assert out.read_text().splitlines()[0] == "classes: 9"


class TestSceneCommands:
    """Commands that sweep sections over a scene."""

    def test_trace_csv(self, scene_file, capsys):
        assert main(["trace", str(scene_file()), "--x", "1.0", "--horizon", "20"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "t,value,event_flag,orbit_index,factor"
        assert len(lines) > 2

    def test_trace_deterministic(self, scene_file, tmp_path):
        scene = str(scene_file())
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["trace", scene, "--out", str(first), "-q"]) == EXIT_OK
        assert main(["trace", scene, "--out", str(second), "-q"]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_trace_on_singularity(self, scene_file):
        assert main(["trace", str(scene_file()), "--base", "0", "0"]) == EXIT_ERROR

    def test_tmax_monotone(self, scene_file, tmp_path):
        out = tmp_path / "tmax.csv"
        code = main(["tmax", str(scene_file()), "--x", "0.5", "1", "2", "--rays", "3",
                     "--out", str(out)])
        assert code == EXIT_OK
        df = pd.read_csv(out)
        assert list(df.columns) == ["ray", "base_east", "base_north", "x", "t_max"]
        assert len(df) == 9

    def test_monodromy(self, scene_file, capsys):
        assert main(["monodromy", str(scene_file())]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["wraparound"] == 0
        assert report["orbit"] == 0

    def test_render_blowup(self, scene_file, tmp_path):
        out = tmp_path / "figs" / "blowup.svg"
        code = main(["render", str(scene_file()), "--figure", "blowup", "--horizon", "5",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert out.read_text().startswith("<?xml")

    def test_render_tree_without_scene(self, tmp_path):
        out = tmp_path / "tree.svg"
        assert main(["render", "--figure", "tree", "--out", str(out)]) == EXIT_OK
        assert "<circle" in out.read_text()

    def test_render_needs_scene(self, tmp_path):
        assert main(["render", "--figure", "blowup", "--out", str(tmp_path / "x.svg")]) == EXIT_ERROR

    @pytest.mark.slow
    def test_ergodic_checks_every_placement(self, scene_file, capsys):
        args = ["ergodic", str(scene_file()), "--samples", "200", "--areas", "10", "100", "1000"]
        assert main(args) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["densityViolations"] == []
        assert [row["area"] for row in report["density"]] == [10.0, 100.0, 1000.0]
        assert all("max_deviation" in row for row in report["density"])

    @pytest.mark.slow
    def test_ergodic_fails_on_placement_violation(self, scene_file, capsys, monkeypatch):
        monkeypatch.setitem(DENSITY_LIMITS, 10.0, 0.0)
        args = ["ergodic", str(scene_file()), "--samples", "100", "--areas", "10"]
        assert main(args) == EXIT_ERROR
        assert json.loads(capsys.readouterr().out)["densityViolations"] == [10.0]

    @pytest.mark.slow
    def test_relations(self, scene_file, capsys):
        assert main(["relations", str(scene_file())]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["witness"]["nontrivial"] is True
        assert set(report["residuals"]) == {"filling_0", "torus_e0", "torus_e1"}


class TestRunConfig:
    """Seeds, overrides and validation of one invocation."""

    def test_defaults(self, scene_file):
        args = build_parser().parse_args(["check", str(scene_file())])
        config = config_from_args(args)
        assert config.seed == DEFAULT_SEED
        assert config.out_path is None
        assert config.overrides == {}

    def test_environment_seed(self, scene_file, monkeypatch):
        monkeypatch.setenv("HOLONOMY_SEED", "99")
        args = build_parser().parse_args(["check", str(scene_file()), "--seed", "5"])
        assert config_from_args(args).seed == 99

    def test_overrides_reach_tolerances(self, scene_file):
        args = build_parser().parse_args(
            ["check", str(scene_file()), "--tol", "horizon=25", "--tol", "event_tol=1e-9"]
        )
        config = config_from_args(args)
        assert config.overrides == {"horizon": 25.0, "event_tol": 1e-9}
        assert config.tolerances.horizon == 25.0
        assert config.load_scene().tolerances.event_tol == 1e-9

    def test_options(self, scene_file):
        args = build_parser().parse_args(["trace", str(scene_file()), "--x", "2", "--west"])
        config = config_from_args(args)
        assert config.option("x") == 2.0
        assert config.option("west") is True
        assert config.option("missing", "fallback") == "fallback"

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(command="teleport")
        with pytest.raises(ValueError):
            RunConfig(command="check")
        with pytest.raises(ValueError):
            RunConfig(command="tree", seed=-1)
        assert RunConfig(command="tree").scene_path is None
        assert RunConfig(command="render", options={"figure": "tree"}).scene_path is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
