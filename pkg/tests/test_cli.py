import json
from fractions import Fraction

import pytest

import agk.cli as cli
import agk.mr_table as mr
from agk.cli import main
from agk.mr_table import MRRow


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    @pytest.mark.parametrize("text, value", [("1/3", Fraction(1, 3)), ("-5", Fraction(-5)),
                                             ("0.01", Fraction(1, 100)), ("2.08", Fraction(52, 25))])
    def test_exact_numbers(self, text, value):
        v = cli.number(text)
        assert isinstance(v, Fraction) and v == value

    def test_negative_fraction_after_flag(self):
        assert cli._normalize_argv(["--b", "-1/2", "--mu", "-5"]) == ["--b=-1/2", "--mu=-5"]
        assert cli._normalize_argv(["--values", "-1,2"]) == ["--values=-1,2"]
        assert cli._normalize_argv(["--scenario", "-x"]) == ["--scenario", "-x"]

    def test_rationals_reach_classify_unconverted(self, capsys, monkeypatch):
        seen = {}
        real = cli.classify

        def spy(p):
            seen.update(mu=p.mu, a=p.a, b=p.b)
            return real(p)

        monkeypatch.setattr(cli, "classify", spy)
        assert run(capsys, "classify", "--mu", "-5", "--a", "3", "--b", "-1/3")[0] == 0
        assert all(isinstance(v, Fraction) for v in seen.values())
        assert seen["b"] == Fraction(-1, 3)


class TestClassify:
    def test_excluded(self, capsys):
        code, out, _ = run(capsys, "classify", "--mu", "-5", "--a", "1", "--b", "1/2")
        assert code == 0 and "meromorphic-excluded" in out

    def test_angular_momentum_json(self, capsys):
        code, out, _ = run(capsys, "classify", "--mu", "-5", "--a", "1", "--b", "0", "--json")
        d = json.loads(out)
        assert code == 0 and d["level"] == "liouville-integrable" and d["rule"] == "angular-momentum"

    def test_harmonic(self, capsys):
        assert "harmonic" in run(capsys, "classify", "--mu", "1", "--a", "0", "--b", "0")[1]

    def test_parse_error(self, capsys):
        code, _, err = run(capsys, "classify", "--mu", "five", "--a", "1", "--b", "0")
        assert code == 2 and "not a number" in err

    def test_json_mirrors_text(self, capsys):
        _, text, _ = run(capsys, "classify", "--mu", "-5", "--a", "1", "--b", "3/10")
        _, js, _ = run(capsys, "classify", "--mu", "-5", "--a", "1", "--b", "3/10", "--json")
        d = json.loads(js)
        assert d["level"] in text and d["rule"] in text
        for key in d["witnesses"]:
            assert key in text


class TestDarboux:
    def test_rotation_invariant(self, capsys):
        code, out, _ = run(capsys, "darboux", "--a", "1", "--b", "0", "--json")
        d = json.loads(out)
        assert code == 0 and d["darboux_points"][0]["spectrum"] == [12, 4]

    def test_b_equals_2a(self, capsys):
        d = json.loads(run(capsys, "darboux", "--a", "1", "--b", "2", "--json")[1])
        got = sorted(tuple(round(v, 9) for v in p["spectrum"]) for p in d["darboux_points"])
        assert got == [(12, 0), (12, 0), (12, 12), (12, 12)]

    def test_excluded_eigenvalue(self, capsys):
        out = run(capsys, "darboux", "--a", "1", "--b", "1")[1]
        assert "lambda=8: excluded (no witness)" in out

    def test_zero_quartic(self, capsys):
        assert run(capsys, "darboux", "--a", "0", "--b", "0")[0] == 2


class TestPoincare:
    FAST = ("--max-time", "40", "--seeds", "4x4")

    def test_scenario_and_explicit_agree(self, capsys, tmp_path):
        assert run(capsys, "poincare", "--scenario", "fig1-top", *self.FAST, "--out", str(tmp_path))[0] == 0
        assert run(capsys, "poincare", "--mu", "-5", "--a", "1", "--b", "0", "--h", "5.7",
                   *self.FAST, "--out", str(tmp_path))[0] == 0
        a = (tmp_path / "fig1-top-events.csv").read_text().splitlines()
        b = (tmp_path / "custom-events.csv").read_text().splitlines()
        assert [l.split(",", 1)[1] for l in a] == [l.split(",", 1)[1] for l in b]

    def test_svg_and_json_formats(self, capsys, tmp_path):
        run(capsys, "poincare", "--scenario", "fig3-top", *self.FAST, "--out", str(tmp_path), "--format", "svg")
        assert (tmp_path / "fig3-top.svg").exists()
        code, out, _ = run(capsys, "poincare", "--scenario", "fig3-top", *self.FAST, "--out", str(tmp_path),
                           "--format", "json", "--json")
        summary = json.loads(out)
        doc = json.loads((tmp_path / "fig3-top.json").read_text())
        assert code == 0 and doc["summary"]["seeds"] == summary["seeds"] == len(doc["metrics"])

    def test_unknown_scenario(self, capsys):
        code, _, err = run(capsys, "poincare", "--scenario", "unknown")
        assert code == 2 and "unknown scenario" in err

    def test_incomplete_params(self, capsys):
        assert run(capsys, "poincare", "--mu", "-5", "--a", "1")[0] == 2

    def test_integration_failure_names_seed(self, capsys, tmp_path):
        code, _, err = run(capsys, "poincare", "--mu", "-5", "--a", "1", "--b", "0", "--h", "5.7",
                           "--dt", "1e30", "--max-time", "1e31", "--seeds", "2x2", "--out", str(tmp_path))
        assert code == 3 and "seed 0" in err

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("scenario = fig4-top\nname = mine\nmax_time = 30\ngrid = 4x4\n")
        assert run(capsys, "poincare", "--config", str(cfg), "--out", str(tmp_path))[0] == 0
        assert (tmp_path / "mine-metrics.csv").exists()

    def test_list(self, capsys):
        assert "fig6-bottom" in run(capsys, "poincare", "--list")[1]


class TestScan:
    def test_rows_and_verdicts(self, capsys):
        code, out, _ = run(capsys, "scan", "--values", "0,1/100,1/2", "--max-time", "100", "--seeds", "6x6")
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == ",".join(cli.SCAN_COLUMNS) and len(lines) == 4
        assert lines[1].endswith("liouville-integrable,angular-momentum")
        assert lines[2].endswith("meromorphic-excluded,legendre-nve")

    def test_single_point_equals_poincare(self, capsys, tmp_path):
        run(capsys, "poincare", "--scenario", "fig2-bottom", "--max-time", "300", "--seeds", "6x6",
            "--out", str(tmp_path), "--json")
        rows = json.loads(run(capsys, "scan", "--scenario", "fig2-bottom", "--values", "1/2", "--max-time", "300",
                              "--seeds", "6x6", "--json")[1])
        _, out, _ = run(capsys, "poincare", "--scenario", "fig2-bottom", "--max-time", "300", "--seeds", "6x6",
                        "--out", str(tmp_path), "--json")
        assert rows[0]["escape_fraction"] == json.loads(out)["escape_fraction"]

    def test_range_values(self):
        assert cli.scan_values("0:1:5") == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]

    def test_lambda_points_integrable(self, capsys):
        rows = json.loads(run(capsys, "scan", "--values", "-1,2", "--max-time", "20", "--seeds", "4x4", "--json")[1])
        assert all(r["verdict"] == "liouville-integrable" for r in rows)


class TestVerify:
    def test_fast_checks_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "1,2,3,4")
        assert code == 0 and out.count("[PASS]") == 4

    def test_corrupted_table_fails(self, capsys, monkeypatch):
        broken = tuple(r for r in mr.TABLE if r.family != "1") + (MRRow("1", None, "generic2"),)
        monkeypatch.setattr(mr, "TABLE", broken)
        code, out, _ = run(capsys, "verify", "--only", "1")
        assert code == 1 and "[FAIL]" in out

    def test_repeatable_report(self, capsys):
        def report():
            d = json.loads(run(capsys, "verify", "--only", "2,4,11", "--json")[1])
            return [{k: v for k, v in c.items() if k != "elapsed"} for c in d["checks"]]
        assert report() == report()
