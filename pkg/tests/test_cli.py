import json
from pathlib import Path

import pytest

from fmrec import demo
from fmrec.cli import main
from fmrec.store import Store


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    dest = tmp_path_factory.mktemp("demo")
    assert main(["demo-data", str(dest)]) == 0
    return dest


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_translate_json(demo_dir, capsys):
    code, payload = run_json(capsys, ["translate", str(demo_dir / "survey.fm"), "--json"])
    assert code == 0
    assert payload["variables"][0] == "survey"
    assert payload["domains"]["survey"] == [0, 1]
    assert "(survey <-> license)" in payload["modelConstraints"]
    assert payload["requirements"] == []


def test_enumerate_with_requirement(demo_dir, capsys):
    code, payload = run_json(
        capsys, ["enumerate", str(demo_dir / "survey.fm"), "--require", "ABtesting=1", "--json"]
    )
    assert code == 0
    assert len(payload["configurations"]) == 3


def test_solve_infeasible_exits_3(demo_dir, capsys):
    assert main(["solve", str(demo_dir / "survey.fm"), "--require", "survey=0"]) == 3


def test_solve_with_preferences(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        [
            "solve",
            str(demo_dir / "survey.fm"),
            "--prefer",
            "ABtesting=0.9,multimediaQA=0.1,basicQA=0.9,statistics=0.9",
            "--json",
        ],
    )
    assert code == 0
    config = payload["configuration"]
    assert config["ABtesting"] == 1 and config["multimediaQA"] == 0


def test_rank_puts_full_selection_first(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        [
            "rank",
            str(demo_dir / "survey.fm"),
            "--require",
            "ABtesting=1",
            "--utilities",
            str(demo_dir / "utilities.csv"),
            "--profile",
            str(demo_dir / "profile_simplicity.csv"),
            "--json",
        ],
    )
    assert code == 0
    top = payload["ranking"][0]
    assert top["configuration"]["basicQA"] == 1 and top["configuration"]["multimediaQA"] == 1
    assert top["utility"] == pytest.approx(2.76)


def test_recommend_value(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        [
            "recommend-value",
            str(demo_dir / "sessions.csv"),
            "--current",
            "current",
            "--feature",
            "ABtesting",
            "--k",
            "2",
            "--model",
            str(demo_dir / "survey.fm"),
            "--json",
        ],
    )
    assert code == 0
    assert payload == {
        "feature": "ABtesting",
        "value": 0,
        "voteFraction": 1.0,
        "neighbors": ["u1", "u3"],
    }


def test_recommend_next_feature(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        ["recommend-next", str(demo_dir / "sessions.csv"), "--current", "current", "--json"],
    )
    assert code == 0
    assert payload == {"feature": "QA"}


def test_recommend_next_constraint_edits(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        ["recommend-next", str(demo_dir / "edits.csv"), "--current", "current", "--edits", "--json"],
    )
    assert code == 0
    assert payload == {"feature": "c4"}


def test_diagnose(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        [
            "diagnose",
            str(demo_dir / "survey.fm"),
            "-r",
            "advancedlicense=0",
            "-r",
            "basiclicense=1",
            "-r",
            "ABtesting=1",
            "--json",
        ],
    )
    assert code == 0
    assert payload["consistent"] is False
    assert ["advancedlicense=0", "ABtesting=1"] in payload["conflicts"]
    assert ["ABtesting=1"] in payload["diagnoses"]


def test_repairs_ranked(demo_dir, capsys):
    code, payload = run_json(
        capsys,
        [
            "repairs",
            str(demo_dir / "survey.fm"),
            "-r",
            "advancedlicense=0,basiclicense=1,ABtesting=1",
            "--utilities",
            str(demo_dir / "utilities.csv"),
            "--profile",
            str(demo_dir / "profile_simplicity.csv"),
            "--json",
        ],
    )
    assert code == 0
    assert payload["repairs"][0]["changes"] == {"ABtesting": 0}
    assert payload["repairs"][0]["utility"] == pytest.approx(0.82)
    assert payload["repairs"][1]["utility"] == pytest.approx(0.72)


def test_mf_train_and_predict(demo_dir, tmp_path, capsys):
    factors = tmp_path / "factors.npz"
    code, payload = run_json(
        capsys,
        [
            "mf-train",
            str(demo_dir / "interactions.csv"),
            "--k",
            "3",
            "--epochs",
            "1500",
            "--out",
            str(factors),
            "--json",
        ],
    )
    assert code == 0
    assert payload["rmse"] < 0.05
    assert payload["observed"] == 34
    code, payload = run_json(capsys, ["mf-predict", str(factors), "--user", "u2", "--json"])
    assert code == 0
    assert payload["scores"]["share"] > 0.8


def test_import_sessions_builds_journal(demo_dir, tmp_path, capsys):
    journal = tmp_path / "journal.jsonl"
    store = Store(journal)
    store.store_model(demo.survey_source())
    store.close()
    code = main(
        [
            "import-sessions",
            str(demo_dir / "sessions.csv"),
            "--store",
            str(journal),
            "--model-id",
            "m1",
        ]
    )
    assert code == 0
    assert "imported 4 session(s)" in capsys.readouterr().out
    reopened = Store(journal)
    assert {log.session_id for log in reopened.session_logs("m1")} == {"u1", "u2", "u3", "current"}
    reopened.close()


def test_usage_error_exits_1(capsys):
    assert main(["recommend-value"]) == 1  # missing required arguments
    assert main(["no-such-command"]) == 1


def test_data_error_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.fm"
    assert main(["enumerate", str(missing)]) == 2
    bad = tmp_path / "bad.fm"
    bad.write_text("model m { feature m }")
    assert main(["enumerate", str(bad)]) == 2
    assert main(["solve", str(bad)]) == 2


def test_human_output_default(demo_dir, capsys):
    assert main(["enumerate", str(demo_dir / "survey.fm"), "--require", "ABtesting=1"]) == 0
    out = capsys.readouterr().out
    assert "3 configuration(s)" in out


def test_demo_data_lists_files(tmp_path, capsys):
    assert main(["demo-data", str(tmp_path / "out")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(demo.FILES)
    for line in lines:
        assert Path(line).exists()
