import json

from oporder.cli import EXIT_OK, EXIT_USAGE, main
from util import GOLDEN_DIR


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def golden_lines(name):
    out = []
    for raw in (GOLDEN_DIR / name).read_text().splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            out.append(" ".join(stripped.split()))
    return out


class TestExponentCommand:
    def test_two_level_example(self, capsys):
        code, out, _ = run(capsys, "exponent", "--t", "0.5,0.5", "--p", "2,3,2,3")
        assert code == EXIT_OK
        assert "chain_exponent = 29" in out

    def test_all_ones(self, capsys):
        code, out, _ = run(capsys, "exponent", "--t", "1", "--p", "1,1")
        assert code == EXIT_OK
        assert "chain_exponent = 1" in out

    def test_weight_printed_with_r(self, capsys):
        code, out, _ = run(capsys, "exponent", "--t", "1", "--p", "1,1", "--r", "2")
        assert code == EXIT_OK
        assert "necessity_weight = 0.5" in out

    def test_length_mismatch_exits_2(self, capsys):
        code, _, err = run(capsys, "exponent", "--t", "0.5", "--p", "1,1,1")
        assert code == EXIT_USAGE
        assert "error" in err

    def test_malformed_list_exits_2(self, capsys):
        code, _, _ = run(capsys, "exponent", "--t", "0.5;0.5", "--p", "1,1")
        assert code == EXIT_USAGE


class TestPrintChainCommand:
    def test_smallest_chain(self, capsys):
        code, out, _ = run(capsys, "print-chain", "--k", "3",
                           "--family", "asc", "--member", "1")
        assert code == EXIT_OK
        assert out.strip() == (
            "A3^{r-t1} >= "
            "(A3^{r/2} (A2^{-t1/2} A1^{p1} A2^{-t1/2})^{p2} A3^{r/2})^{w1}"
        )

    def test_golden_first_ascending_k5(self, capsys):
        code, out, _ = run(capsys, "print-chain", "--k", "5",
                           "--family", "asc", "--member", "1")
        assert code == EXIT_OK
        assert " ".join(out.split()) == golden_lines("chains_k5.txt")[0]

    def test_golden_first_descending_k4(self, capsys):
        code, out, _ = run(capsys, "print-chain", "--k", "4",
                           "--family", "desc", "--member", "1")
        assert code == EXIT_OK
        assert " ".join(out.split()) == golden_lines("chains_k4.txt")[2]

    def test_all_flag(self, capsys):
        code, out, _ = run(capsys, "print-chain", "--k", "5", "--all")
        assert code == EXIT_OK
        lines = [" ".join(l.split()) for l in out.strip().splitlines()]
        assert lines == golden_lines("chains_k5.txt")

    def test_member_out_of_range(self, capsys):
        code, _, err = run(capsys, "print-chain", "--k", "3",
                           "--family", "desc", "--member", "5")
        assert code == EXIT_USAGE
        assert "member" in err

    def test_k_too_small(self, capsys):
        code, _, _ = run(capsys, "print-chain", "--k", "1")
        assert code == EXIT_USAGE


class TestCheckCommand:
    def test_necessity_small_run(self, capsys, tmp_path):
        report = tmp_path / "rows.csv"
        code, out, _ = run(capsys, "check", "--mode", "necessity", "--k", "3",
                           "--dim", "2", "--seed", "42", "--count", "3",
                           "--report", str(report))
        assert code == EXIT_OK
        assert "all expectations met" in out
        header = report.read_text().splitlines()[0]
        assert header == ("instance_id,k,dim,family,member,p_vector,w,"
                          "relation,margin,verdict,seconds")
        sidecar = json.loads((tmp_path / "rows.csv.json").read_text())
        assert sidecar["master_seed"] == 42

    def test_bad_k_exits_2(self, capsys):
        code, _, _ = run(capsys, "check", "--mode", "necessity", "--k", "1")
        assert code == EXIT_USAGE

    def test_missing_mode_exits_2(self, capsys):
        code, _, err = run(capsys, "check", "--k", "3")
        assert code == EXIT_USAGE
        assert "--mode" in err

    def test_contrapositive_scalar_fixture(self, capsys):
        code, out, _ = run(capsys, "check", "--mode", "contrapositive", "--k", "3",
                           "--scalar-fixture", "2,1,3", "--t", "0.5", "--r", "1",
                           "--weights", "fixed:0.5,0.5", "--p-grid", "1")
        assert code == EXIT_OK
        assert "hypothesis-failure found" in out
        assert "-0.717439" in out

    def test_contrapositive_generated(self, capsys):
        code, out, _ = run(capsys, "check", "--mode", "contrapositive", "--k", "3",
                           "--dim", "2", "--seed", "7", "--count", "4")
        assert code == EXIT_OK
        assert out.count("hypothesis-failure") == 4

    def test_fixture_k_mismatch(self, capsys):
        code, _, _ = run(capsys, "check", "--mode", "contrapositive", "--k", "4",
                         "--scalar-fixture", "2,1,3")
        assert code == EXIT_USAGE

    def test_proof_steps_mode(self, capsys):
        code, out, _ = run(capsys, "check", "--mode", "proof-steps", "--k", "5",
                           "--dim", "2", "--seed", "3", "--count", "2",
                           "--p-grid", "1,2")
        assert code == EXIT_OK
        assert "all expectations met" in out

    def test_limit_mode(self, capsys):
        code, out, _ = run(capsys, "check", "--mode", "limit", "--k", "5",
                           "--dim", "2", "--seed", "3", "--count", "2")
        assert code == EXIT_OK
        assert "consistent=True" in out

    def test_jobs_parallel_matches_serial(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = ["check", "--mode", "necessity", "--k", "3", "--dim", "2",
                "--seed", "11", "--count", "4"]
        assert main(base + ["--report", str(a)]) == EXIT_OK
        assert main(base + ["--jobs", "3", "--report", str(b)]) == EXIT_OK
        capsys.readouterr()
        strip = lambda p: [",".join(l.split(",")[:-1]) for l in p.read_text().splitlines()]
        assert strip(a) == strip(b)

    def test_dump_config_round_trip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "check", "--mode", "necessity", "--k", "3",
                           "--dim", "2", "--seed", "13", "--count", "2",
                           "--dump-config")
        assert code == EXIT_OK
        cfg = json.loads(out)
        assert cfg["mode"] == "necessity" and cfg["seed"] == 13
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(out)

        direct = tmp_path / "direct.csv"
        via_config = tmp_path / "via_config.csv"
        assert main(["check", "--mode", "necessity", "--k", "3", "--dim", "2",
                     "--seed", "13", "--count", "2", "--report", str(direct)]) == EXIT_OK
        assert main(["check", "--config", str(cfg_path),
                     "--report", str(via_config)]) == EXIT_OK
        capsys.readouterr()
        strip = lambda p: [",".join(l.split(",")[:-1]) for l in p.read_text().splitlines()]
        assert strip(direct) == strip(via_config)

    def test_unknown_config_key(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"mode": "necessity", "bogus": 1}))
        code, _, err = run(capsys, "check", "--config", str(bad))
        assert code == EXIT_USAGE
        assert "bogus" in err


class TestSearchCommand:
    def test_zero_budget_empty_findings(self, capsys, tmp_path):
        findings = tmp_path / "findings.json"
        code, out, _ = run(capsys, "search", "--budget", "0",
                           "--findings", str(findings))
        assert code == EXIT_OK
        payload = json.loads(findings.read_text())
        assert payload["findings"] == []
        assert json.loads(out)["findings"] == 0

    def test_default_seed_small_budget(self, capsys):
        code, out, _ = run(capsys, "search", "--budget", "15", "--seed", "0")
        assert code == EXIT_OK
        counters = json.loads(out)["counters"]
        assert counters["instances"] == 15
        assert counters["emitted"] == 0

    def test_emit_stats_histogram(self, capsys, tmp_path):
        findings = tmp_path / "f.json"
        code, _, _ = run(capsys, "search", "--budget", "5", "--seed", "2",
                         "--emit-stats", "--findings", str(findings))
        assert code == EXIT_OK
        payload = json.loads(findings.read_text())
        hist = payload["stats"]["margin_histogram"]
        assert len(hist["edges"]) == len(hist["counts"]) + 1

    def test_stats_omitted_without_flag(self, capsys, tmp_path):
        findings = tmp_path / "f.json"
        code, _, _ = run(capsys, "search", "--budget", "3", "--seed", "2",
                         "--findings", str(findings))
        assert code == EXIT_OK
        assert "margin_histogram" not in json.loads(findings.read_text())["stats"]

    def test_negative_budget_exits_2(self, capsys):
        code, _, _ = run(capsys, "search", "--budget", "-1")
        assert code == EXIT_USAGE

    def test_bad_k_exits_2(self, capsys):
        code, _, _ = run(capsys, "search", "--k", "2", "--budget", "1")
        assert code == EXIT_USAGE


class TestArgparseBehaviour:
    def test_no_command_exits_2(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == EXIT_OK
