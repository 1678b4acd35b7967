from __future__ import annotations

import csv
import io
import json
import shutil
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from helpers import ARBITER_LEMMA, FIXTURES
from lemmamine.checker.engine import check_strengthening
from lemmamine.cli import EXIT_INPUT, EXIT_INTERNAL, EXIT_OK, main
from lemmamine.config import Config, config_from_mapping, load_config
from lemmamine.errors import ConfigError
from lemmamine.report import COLUMNS, GROUP_COLUMNS, VIRTUAL_BEST, SuiteReport, TaskRecord, to_csv, to_json, to_text
from lemmamine.prompting.drivers import MiningTask
from lemmamine.suite import load_manifest, run_suite, run_task

GOLDEN = Path(__file__).parent / "golden"
ARBITER = str(FIXTURES / "arbiter.sv")


# -- configuration -----------------------------------------------------------------

def test_toml_configuration(tmp_path):
    (tmp_path / "cfg.toml").write_text("""
[solver]
timeout_secs = 5
[checker]
bmc_bound = 12
k = 2
[generator]
kind = "mock"
mock_script = "script.json"
sampling = { temperature = 0.3 }
[generator.llm]
url = "http://localhost:1/v1"
model = "m"
api_key_env = "MY_KEY"
[prompting]
mode = "nonagentic"
samples = 3
""")
    cfg = load_config(tmp_path / "cfg.toml")
    assert (cfg.timeout, cfg.bmc_bound, cfg.k, cfg.mode, cfg.samples) == (5, 12, 2, "nonagentic", 3)
    assert cfg.mock_script == str(tmp_path / "script.json")
    assert cfg.sampling == {"temperature": 0.3} and cfg.llm.api_key_env == "MY_KEY"
    assert cfg.budget.k == 2


@pytest.mark.parametrize("data", [
    {"generator": {"llm": {"url": "u", "model": "m", "api_key": "sk-123"}}},
    {"solver": {"token": "x"}},
    {"checker": {"nonsense": 1}},
    {"checker": {"bmc_bound": "ten"}},
    {"checker": {"bmc_bound": True}},
    {"prompting": {"samples": 6}},
    {"prompting": {"mode": "sometimes"}},
    {"generator": {"llm": {"url": "u"}}},
])
def test_bad_configuration_rejected(data):
    with pytest.raises(ConfigError):
        config_from_mapping(data)


def test_invalid_toml(tmp_path):
    (tmp_path / "bad.toml").write_text("[solver\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.toml")


def test_overrides_skip_none():
    cfg = Config().with_overrides(bmc_bound=7, k=None)
    assert cfg.bmc_bound == 7 and cfg.k == 1
    with pytest.raises(ConfigError):
        Config().with_overrides(colour="blue")


# -- reports -----------------------------------------------------------------------

RECORDS = [
    TaskRecord("t1", "g1", "gen", "agentic", 4, 2, 1, True),
    TaskRecord("t2", "g1", "gen", "agentic", 3, 0, 0, False),
    TaskRecord("t1", "g1", "tmpl", "nonagentic", 10, 5, 2, True),
    TaskRecord("t3", "g2", "tmpl", "nonagentic", 6, 1, 1, True),
]


def test_summary_rows_and_virtual_best():
    report = SuiteReport.from_records(RECORDS)
    rows = [r.cells() for r in report.rows()]
    assert rows == [["gen", "agentic", 7, 2, 1, 1], ["tmpl", "nonagentic", 16, 6, 3, 2],
                    [VIRTUAL_BEST, "", None, None, None, 2]]
    assert report.group_rows() == [("g1", 1, 1), ("g2", 1, 0)]


def test_csv_and_json_agree():
    report = SuiteReport.from_records(RECORDS)
    table = list(csv.reader(io.StringIO(to_csv(report))))
    assert tuple(table[0]) == COLUMNS
    data = json.loads(to_json(report))
    assert data["columns"] == list(COLUMNS) and data["group_columns"] == list(GROUP_COLUMNS)
    for row, obj in zip(table[1:], data["rows"]):
        assert row == ["" if obj[c] is None else str(obj[c]) for c in COLUMNS]
    assert [TaskRecord.from_dict(r) for r in data["records"]] == RECORDS


def test_empty_report_is_header_only():
    report = SuiteReport()
    assert to_csv(report) == ",".join(COLUMNS) + "\n"
    assert json.loads(to_json(report))["rows"] == []
    assert to_text(report).splitlines()[0].startswith("Model/Generator")


def test_table_header_names():
    assert to_csv(SuiteReport()).startswith("Model/Generator,setup,Total Lemmas,Correct,1-Inductive,Solved\n")
    assert GROUP_COLUMNS == ("Group Tag", "Solved", "Unsolved")


def test_task_solved_in_one_mode_counts_once_in_virtual_best():
    report = SuiteReport.from_records([
        TaskRecord("a", "g", "gen", "agentic", 2, 1, 1, True),
        TaskRecord("a", "g", "gen", "nonagentic", 2, 0, 0, False),
        TaskRecord("b", "g", "gen", "agentic", 1, 1, 1, True),
        TaskRecord("b", "g", "gen", "nonagentic", 1, 1, 1, True),
    ])
    rows = [r.cells() for r in report.rows()]
    assert len(rows) == 3 and rows[-1][0] == VIRTUAL_BEST and rows[-1][-1] == 2
    assert report.group_rows() == [("g", 2, 0)]


GROUP_OF = {"t1": "g1", "t2": "g1", "t3": "g2", "t4": "g2"}
records = st.builds(lambda task, *rest: TaskRecord(task, GROUP_OF[task], *rest),
                    st.sampled_from(sorted(GROUP_OF)), st.sampled_from(["gen", "tmpl"]),
                    st.sampled_from(["agentic", "nonagentic"]), st.integers(0, 9), st.integers(0, 9),
                    st.integers(0, 9), st.booleans())


@given(st.lists(records, min_size=1, max_size=12, unique_by=lambda r: (r.task, r.generator, r.setup)))
def test_aggregates_are_sums_of_records(recs):
    report = SuiteReport.from_records(recs)
    for row in report.rows()[:-1]:
        mine = [r for r in recs if (r.generator, r.setup) == tuple(row.cells()[:2])]
        assert row.cells()[2:] == [sum(r.total_lemmas for r in mine), sum(r.correct for r in mine),
                                   sum(r.one_inductive for r in mine), sum(r.solved for r in mine)]
    assert report.rows()[-1].cells()[-1] == len({r.task for r in recs if r.solved})
    for group, solved, unsolved in report.group_rows():
        assert solved + unsolved == len({r.task for r in recs if r.group == group})


def test_run_task_with_templates_is_certified():
    task = MiningTask.from_file(ARBITER)
    outcome = run_task(Config(generator="templates", samples=1, fewshot=0), task, mode="nonagentic")
    assert outcome.solved and outcome.as_dict()["solved"] is True
    lemmas = [task.design.compile_text(t) for t in outcome.lemmas]
    assert check_strengthening(task.compiled, lemmas, Config().budget).certified


# -- suites ------------------------------------------------------------------------

def test_manifest_validation(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"tasks": []}))
    with pytest.raises(ConfigError):
        load_manifest(m)
    m.write_text(json.dumps({"tasks": [{"design": "a.sv", "id": "x"}, {"design": "b.sv", "id": "x"}]}))
    with pytest.raises(ConfigError):
        load_manifest(m)
    m.write_text(json.dumps({"tasks": [{"design": "a.sv"}], "settings": [{"flavour": 1}]}))
    with pytest.raises(ConfigError):
        load_manifest(m)


def test_missing_design_becomes_an_error_record(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"tasks": [{"design": "nowhere.sv", "id": "gone"},
                                        {"design": ARBITER, "id": "arb"}],
                             "settings": [{"generator": "templates", "mode": "nonagentic", "samples": 1,
                                           "fewshot": 0}]}))
    report = run_suite(Config(bmc_bound=12), load_manifest(m), workers=1)
    gone, arb = report.records
    assert gone.error.startswith("ConfigError") and not gone.solved
    assert arb.solved


def test_mock_suite_matches_golden(tmp_path):
    out = tmp_path / "out"
    assert main(["suite", "--manifest", str(GOLDEN / "mock_manifest.json"), "--out", str(out),
                 "--workers", "1", "--bound", "12"]) == EXIT_OK
    assert (out / "results.csv").read_text() == (GOLDEN / "mock_results.csv").read_text()
    assert (out / "groups.csv").read_text() == (GOLDEN / "mock_groups.csv").read_text()
    certs = sorted(p.name for p in (out / "certificates").iterdir())
    assert len(certs) == 3
    cert = json.loads((out / "certificates" / certs[0]).read_text())
    assert cert["certificate"]["status"] == "certified" and cert["search_log"]


def test_suite_output_is_deterministic_across_worker_counts(tmp_path):
    outs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        assert main(["suite", "--manifest", str(GOLDEN / "mock_manifest.json"), "--out", str(out),
                     "--workers", workers, "--bound", "12"]) == EXIT_OK
        outs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()})
    assert outs[0] == outs[1]


# -- command line ------------------------------------------------------------------

def test_check_command_certifies(capsys):
    assert main(["check", "--design", ARBITER, "--lemma", ARBITER_LEMMA, "--bound", "12", "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["bmc"]["status"] == "holds_to_bound" and data["certificate"]["status"] == "certified"


def test_check_command_prints_trace(capsys):
    assert main(["check", "--design", str(FIXTURES / "overflow.sv")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "falsified at depth 16" in out and "frame 15:" in out


def test_mine_command_with_mock_script(tmp_path, capsys):
    script = tmp_path / "s.json"
    script.write_text(json.dumps([f"assert property ({ARBITER_LEMMA});"]))
    code = main(["mine", "--design", ARBITER, "--generator", "mock", "--mock-script", str(script),
                 "--mode", "agentic", "--samples", "1", "--fewshot", "0", "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    assert "solved: true" in capsys.readouterr().out
    assert list((tmp_path / "o" / "certificates").iterdir())


@pytest.mark.parametrize("argv", [
    ["mine", "--design", "/nonexistent.sv"],
    ["mine", "--design", ARBITER, "--generator", "mock"],
    ["mine", "--design", ARBITER, "--samples", "9"],
    ["check", "--design", ARBITER, "--property", "nope"],
    ["frobnicate"],
    ["suite", "--manifest", "/nonexistent.json", "--out", "/tmp/x"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_INPUT


def test_bad_design_text_exits_2(tmp_path):
    bad = tmp_path / "bad.sv"
    bad.write_text("module m(input clk); always @(posedge clk) for (;;) ; endmodule")
    assert main(["check", "--design", str(bad)]) == EXIT_INPUT


def test_solver_crash_exits_3(tmp_path):
    shutil.copy(ARBITER, tmp_path / "a.sv")
    assert main(["check", "--design", str(tmp_path / "a.sv"), "--solver", "/nonexistent/solver"]) == EXIT_INTERNAL


def test_help_exits_0(capsys):
    assert main(["--help"]) == EXIT_OK


def test_unsolved_run_still_exits_0(tmp_path, capsys):
    script = tmp_path / "s.json"
    script.write_text(json.dumps(["assert property (!ack0);"]))
    code = main(["mine", "--design", ARBITER, "--generator", "mock", "--mock-script", str(script),
                 "--mode", "nonagentic", "--samples", "1", "--fewshot", "0"])
    assert code == EXIT_OK and "solved: false" in capsys.readouterr().out
