import json

import jsonschema

from rankeffect import REPORT_SCHEMA
from rankeffect.cli import main

from conftest import DATA_DIR

FIXTURE = str(DATA_DIR / "paired_qol_42subjects.csv")
GOLDEN = DATA_DIR / "golden_analyze_report.json"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyzeCommand:
    def test_fixture_report_is_schema_valid(self, capsys):
        code, out, err = run_cli(capsys, "analyze", FIXTURE)
        assert code == 0 and err == ""
        report = json.loads(out)
        jsonschema.validate(report, REPORT_SCHEMA)
        assert report["n_subjects"] == 42
        assert [t["method"] for t in report["tests"]] == [
            "all", "all", "complete", "complete", "incomplete", "incomplete",
        ]

    def test_identical_groups_fully_observed(self, capsys, tmp_path):
        path = tmp_path / "null.csv"
        path.write_text("g1_var1,g2_var1\n" + "".join(f"{v},{v}\n" for v in (1, 2, 3, 4)))
        code, out, _ = run_cli(capsys, "analyze", str(path))
        assert code == 0
        report = json.loads(out)
        assert report["effects"]["all"]["p_hat"] == [0.5]
        for t in report["tests"]:
            if t["method"] in ("all", "complete"):
                assert t["p_value"] == 1.0
                assert "zero-covariance-null" in t["flags"]

    def test_pattern_mismatch_is_operational_error(self, capsys, tmp_path):
        path = tmp_path / "general.csv"
        path.write_text("1,2,3,4\n5,NA,6,7\nNA,8,9,1\n")
        code, out, err = run_cli(capsys, "analyze", str(path), "--pattern", "simple")
        assert code == 1
        error = json.loads(err)
        assert error["error"]["type"] == "PatternMismatch"
        assert "pattern mismatch" in error["error"]["message"]

    def test_missing_file_is_operational_error(self, capsys):
        code, out, err = run_cli(capsys, "analyze", "/nonexistent.csv")
        assert code == 1
        assert json.loads(err)["error"]["type"] in ("FileNotFoundError", "OSError")

    def test_component_without_group_data_fails_hard(self, capsys, tmp_path):
        # var2 never observed in group 2: the dataset itself is inestimable
        path = tmp_path / "one_sided_var.csv"
        path.write_text(
            "g1_var1,g1_var2,g2_var1,g2_var2\n"
            "1,2,3,NA\n"
            "4,5,6,NA\n"
            "7,8,9,NA\n"
        )
        code, out, err = run_cli(capsys, "analyze", str(path))
        assert code == 1
        error = json.loads(err)["error"]
        assert error["type"] == "InestimableComponent"
        assert "component 1" in error["message"]

    def test_table_rendering(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", FIXTURE, "--table")
        assert code == 0
        assert "component" in out and "p_value" in out
        assert "var1" in out

    def test_methods_subset(self, capsys):
        code, out, _ = run_cli(capsys, "analyze", FIXTURE, "--methods", "all")
        assert code == 0
        report = json.loads(out)
        assert {t["method"] for t in report["tests"]} == {"all"}

    def test_output_file_and_golden(self, capsys, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert main(["analyze", FIXTURE, "--output", str(out_a)]) == 0
        assert main(["analyze", FIXTURE, "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert json.loads(out_a.read_text()) == json.loads(GOLDEN.read_text())

    def test_exit_zero_even_when_rejecting(self, capsys, tmp_path):
        path = tmp_path / "shifted.csv"
        rows = ["g1_var1,g2_var1"] + [f"{k},{k + 5}" for k in range(12)]
        path.write_text("\n".join(rows) + "\n")
        code, out, _ = run_cli(capsys, "analyze", str(path), "--methods", "all")
        assert code == 0
        report = json.loads(out)
        assert any(t["reject"] for t in report["tests"])

    def test_complete_separation_is_reported_not_crashed(self, capsys, tmp_path):
        # separated groups give p_hat = 1 with a zero covariance estimate;
        # the statistic is undefined and the method is flagged, not an error
        path = tmp_path / "separated.csv"
        rows = ["g1_var1,g2_var1"] + [f"{k},{k + 100}" for k in range(12)]
        path.write_text("\n".join(rows) + "\n")
        code, out, _ = run_cli(capsys, "analyze", str(path), "--methods", "all")
        assert code == 0
        report = json.loads(out)
        assert all(
            any("inestimable" in f for f in t["flags"]) for t in report["tests"]
        )


class TestSimulateCommand:
    def test_builtin_dims_slice_row_count(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--builtin", "table3",
            "--dims", "2", "--reps", "5", "--seed", "7", "--json",
        )
        assert code == 0
        doc = json.loads(out[out.index("{"):])
        assert len(doc["results"]) == 16
        for row in doc["results"]:
            for stats in row["methods"].values():
                assert stats["evaluated"] + stats["skipped"] <= 5

    def test_unknown_builtin_lists_valid_names(self, capsys):
        code, out, err = run_cli(capsys, "simulate", "--builtin", "nope")
        assert code == 1
        msg = json.loads(err)["error"]["message"]
        for name in ("table3", "table6", "design1", "design2", "design3"):
            assert name in msg

    def test_config_file_run_and_determinism(self, capsys, tmp_path):
        cfg = tmp_path / "study.ini"
        cfg.write_text(
            "[tiny-null]\n"
            "distribution = normal  ; discretized\n"
            "d = 2\n"
            "rho = 0.1, 0.1, 0.1\n"
            "sigma_sq = 1, 1\n"
            "delta = 0, 0\n"
            "pattern = simple\n"
            "sizes = 10, 4, 4\n"
            "replications = 40\n"
            "methods = all\n"
        )
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        assert main(["simulate", "--config", str(cfg), "--reps", "40",
                     "--seed", "3", "--output", str(out1)]) == 0
        assert main(["simulate", "--config", str(cfg), "--reps", "40",
                     "--seed", "3", "--output", str(out2)]) == 0
        assert (out1.with_suffix(".json").read_bytes()
                == out2.with_suffix(".json").read_bytes())
        assert (out1.with_suffix(".txt").read_bytes()
                == out2.with_suffix(".txt").read_bytes())
        doc = json.loads(out1.with_suffix(".json").read_text())
        assert doc["results"][0]["label"] == "tiny-null"
        table = out1.with_suffix(".txt").read_text()
        assert "tiny-null" in table and "anova:all" in table

    def test_bad_config_points_at_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[broken]\ndistribution = normal\nd = 2\n")
        code, out, err = run_cli(capsys, "simulate", "--config", str(cfg))
        assert code == 1
        assert "broken" in json.loads(err)["error"]["message"]
