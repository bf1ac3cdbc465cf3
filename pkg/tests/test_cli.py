import json

import pytest

from ittm.cli import _expand_args, enumerate_pairs, main, pair_table


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_move_right(self, capsys):
        code, out, _ = invoke(capsys, "run", "--alpha", "w^(w)", "--program",
                              "catalog:move_right(5)", "--probe", "4,5")
        rec = json.loads(out)
        assert code == 0 and rec["outcome"] == "Halted" and rec["output_head"] == "5"
        assert rec["settings"]["budget_steps"] == 10**6 and rec["probes"] == {"4": 0, "5": 0}

    def test_reach_limit(self, capsys):
        _, out, _ = invoke(capsys, "run", "--alpha", "w^2", "--program", "catalog:reach_limit")
        assert json.loads(out)["output_head"] == "w"

    def test_mult_position_with_marks(self, capsys):
        _, out, _ = invoke(capsys, "run", "--alpha", "w^2", "--program",
                           "catalog:mult_position", "--input", "marks:w,2")
        assert json.loads(out)["output_head"] == "w*2"

    def test_count_through_canonical(self, capsys):
        _, out, _ = invoke(capsys, "run", "--program", "catalog:count_through_code",
                           "--input", "canonical:4")
        assert json.loads(out)["output_head"] == "4"

    def test_program_file_and_trace(self, capsys, tmp_path):
        src = tmp_path / "p.asm"
        src.write_text("MOVE OUT R\nMOVE OUT R\nHALT\n")
        trace = tmp_path / "t.jsonl"
        code, out, _ = invoke(capsys, "run", "--program", str(src), "--trace", str(trace))
        assert code == 0 and json.loads(out)["time"] == "2"
        events = [json.loads(line).get("event") for line in trace.read_text().splitlines()]
        assert events.count("step") == 2

    def test_intervals_input(self, capsys):
        _, out, _ = invoke(capsys, "run", "--alpha", "w^2", "--program", "catalog:busy_loop",
                           "--input", "intervals:0..3,w..w+1")
        assert json.loads(out)["outcome"] == "NonHaltingCertified"

    @pytest.mark.parametrize("argv", [
        ["run", "--alpha", "w^2*2", "--program", "catalog:reach_limit"],
        ["run", "--alpha", "w^", "--program", "catalog:reach_limit"],
        ["run", "--program", "catalog:nope"],
        ["run", "--program", "catalog:move_right(-1)"],
        ["run", "--program", "catalog:busy_loop", "--input", "bogus"],
        ["run", "--program", "/nonexistent.asm"],
        ["pair-table", "--limit", str(10**6 + 1)],
    ])
    def test_validation_errors_exit_2(self, capsys, argv):
        code, _, err = invoke(capsys, *argv)
        assert code == 2 and err.startswith("ittm: error:")


class TestReach:
    def test_move_right_rows(self, capsys):
        _, out, _ = invoke(capsys, "reach", "--alpha", "w", "--program", "move_right(0..19)")
        rows = json.loads(out)["rows"]
        assert [r["outcome"] for r in rows] == ["Reached"] * 20
        assert [r["cell"] for r in rows] == [str(n) for n in range(20)]

    def test_limit_rows(self, capsys):
        _, out, _ = invoke(capsys, "reach", "--alpha", "w^2", "--program",
                           "reach_limit_times(1..3)", "--program", "busy_loop")
        rows = json.loads(out)["rows"]
        assert [r["cell"] for r in rows[:3]] == ["w", "w*2", "w*3"]
        assert rows[3]["outcome"] == "EventuallyStable"
        assert (rows[3]["loop_from"], rows[3]["loop_to"]) == ("0", "1")

    def test_csv_embeds_settings(self, capsys):
        _, out, _ = invoke(capsys, "reach", "--program", "move_right(2)", "--format", "csv",
                           "--budget-steps", "500")
        assert "# budget_steps=500" in out
        assert "move_right(2),Reached,2,2" in out

    def test_reached_rows_reproduce_with_run(self, capsys):
        _, out, _ = invoke(capsys, "reach", "--alpha", "w^2")
        for row in json.loads(out)["rows"]:
            if row["outcome"] == "Reached":
                _, rec, _ = invoke(capsys, "run", "--alpha", "w^2", "--program",
                                   "catalog:" + row["program"])
                assert json.loads(rec)["output_head"] == row["cell"]

    def test_expand_args(self):
        assert _expand_args("move_right(1..3)") == ["move_right(1)", "move_right(2)",
                                                    "move_right(3)"]
        assert _expand_args("busy_loop") == ["busy_loop"]


class TestPairTable:
    def test_first_four(self, capsys):
        _, out, _ = invoke(capsys, "pair-table", "--limit", "4")
        assert out.splitlines()[-4:] == ["0,0,0", "1,0,1", "2,1,0", "3,1,1"]

    def test_empty(self, capsys):
        code, out, _ = invoke(capsys, "pair-table", "--limit", "0", "--format", "json")
        assert code == 0 and json.loads(out)["rows"] == []

    def test_verify(self, capsys):
        assert invoke(capsys, "pair-table", "--limit", "500", "--verify")[0] == 0

    def test_injected_fault_fails(self, capsys):
        assert invoke(capsys, "pair-table", "--limit", "10", "--verify", "--inject-fault")[0] != 0

    def test_table_matches_enumeration(self):
        assert pair_table(2000) == enumerate_pairs(2000)


class TestValidateCode:
    def write(self, tmp_path, obj):
        p = tmp_path / "code.json"
        p.write_text(json.dumps(obj))
        return str(p)

    def test_canonical_five(self, capsys, tmp_path):
        f = self.write(tmp_path, {"alpha": "w", "canonical": "5"})
        rec = json.loads(invoke(capsys, "validate-code", f)[1])
        assert rec["verdict"] == "Valid" and rec["decode"] == "5"

    def test_two_cycle(self, capsys, tmp_path):
        f = self.write(tmp_path, {"alpha": "w", "pairs": [["1", "2"], ["2", "1"]]})
        rec = json.loads(invoke(capsys, "validate-code", f)[1])
        assert rec["verdict"] == "Invalid" and rec["reason"] == "ill-founded"

    def test_small_budget_unknown(self, capsys, tmp_path):
        chain = [[str(i), str(i + 1)] for i in range(1, 400)]
        f = self.write(tmp_path, {"alpha": "w", "pairs": chain})
        rec = json.loads(invoke(capsys, "validate-code", f, "--budget", "20")[1])
        assert rec["verdict"] == "Unknown"

    def test_bad_file(self, capsys, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        assert invoke(capsys, "validate-code", str(p))[0] == 2


class TestReport:
    def test_config_is_echoed(self, capsys, tmp_path):
        conf = tmp_path / "exp.conf"
        conf.write_text("# demo\nalpha = w^2\nprograms = reach_limit; move_right(1..2)\n"
                        "budget_steps = 5000\n")
        out_file = tmp_path / "r.json"
        code, _, _ = invoke(capsys, "report", "--config", str(conf), "--output", str(out_file))
        rep = json.loads(out_file.read_text())
        assert code == 0 and rep["config"]["alpha"] == "w^2"
        assert [r["program"] for r in rep["rows"]] == ["reach_limit", "move_right(1)",
                                                      "move_right(2)"]

    def test_unknown_key(self, capsys, tmp_path):
        conf = tmp_path / "exp.conf"
        conf.write_text("colour = blue\n")
        assert invoke(capsys, "report", "--config", str(conf))[0] == 2


def test_reach_is_byte_identical(capsys, tmp_path):
    files = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for f in files:
        assert invoke(capsys, "reach", "--alpha", "w^2", "--format", "csv",
                      "--output", str(f))[0] == 0
    assert files[0].read_bytes() == files[1].read_bytes()
