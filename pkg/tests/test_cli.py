import csv
import os

import pytest

from mimo_secrecy.cli import main

CONFIG = """\
cells = 2
bs_antennas = 24
eve_antennas = 2
users = 4
rho = 0.2
power_db = 10
phi = 0.6
trials = 60
seed = 3
"""

PC_CONFIG = CONFIG + "training = contaminated\npilot_length = 4\n"


@pytest.fixture
def conf(tmp_path):
    p = tmp_path / "scenario.conf"
    p.write_text(CONFIG)
    return str(p)


@pytest.fixture
def pc_conf(tmp_path):
    p = tmp_path / "pc.conf"
    p.write_text(PC_CONFIG)
    return str(p)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSweep:
    def test_row_count_and_schema(self, conf, tmp_path):
        out = str(tmp_path / "out.csv")
        rc = main(["sweep", "--config", conf, "--sweep", "phi=0.01:0.99:99",
                   "--quantities", "secrecy_lb_II", "--out", out])
        assert rc == 0
        rows = read_rows(out)
        assert len(rows) == 99 * 2
        assert list(rows[0].keys()) == ["variable", "value", "quantity",
                                        "an_method", "training", "estimate",
                                        "stderr", "trials", "seed"]
        assert {r["an_method"] for r in rows} == {"null", "random"}
        assert all(r["stderr"] == "" for r in rows)

    def test_byte_identical_rerun(self, conf, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        args = ["sweep", "--config", conf, "--sweep", "rho=0.0:0.5:6",
                "--quantities", "rate_lb,mc_rate", "--out"]
        assert main(args + [a]) == 0
        assert main(args + [b]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_mc_stderr_populated_and_shrinking(self, conf, tmp_path):
        outs = {}
        for trials in (60, 240):
            out = str(tmp_path / f"t{trials}.csv")
            assert main(["sweep", "--config", conf, "--sweep", "Nt=24:24:1",
                         "--quantities", "mc_rate", "--out", out,
                         "--trials", str(trials)]) == 0
            rows = read_rows(out)
            outs[trials] = float(rows[0]["stderr"])
            assert rows[0]["trials"] == str(trials)
        assert 0 < outs[240] < outs[60]

    def test_seed_env_fallback(self, conf, tmp_path, monkeypatch):
        out1, out2 = str(tmp_path / "e1.csv"), str(tmp_path / "e2.csv")
        monkeypatch.setenv("MIMO_SECRECY_SEED", "77")
        assert main(["sweep", "--config", conf, "--sweep", "phi=0.2:0.8:3",
                     "--quantities", "mc_eve_cap", "--out", out1]) == 0
        assert read_rows(out1)[0]["seed"] == "77"
        # explicit flag wins over the environment
        assert main(["sweep", "--config", conf, "--sweep", "phi=0.2:0.8:3",
                     "--quantities", "mc_eve_cap", "--out", out2,
                     "--seed", "5"]) == 0
        assert read_rows(out2)[0]["seed"] == "5"

    def test_tau_sweep_for_contaminated(self, pc_conf, tmp_path):
        out = str(tmp_path / "tau.csv")
        assert main(["sweep", "--config", pc_conf, "--sweep", "tau=4:12:5",
                     "--quantities", "net_secrecy", "--out", out]) == 0
        assert len(read_rows(out)) == 5 * 2


class TestExitCodes:
    def test_config_error(self, tmp_path):
        p = tmp_path / "bad.conf"
        p.write_text(CONFIG.replace("users = 4", "users = 24"))
        assert main(["sweep", "--config", str(p), "--sweep", "phi=0.1:0.9:3",
                     "--quantities", "rate_lb", "--out",
                     str(tmp_path / "x.csv")]) == 1

    def test_unknown_quantity_is_usage_error(self, conf, tmp_path):
        assert main(["sweep", "--config", conf, "--sweep", "phi=0.1:0.9:3",
                     "--quantities", "bogus", "--out",
                     str(tmp_path / "x.csv")]) == 2

    def test_mode_mismatch_is_usage_error(self, conf, tmp_path):
        assert main(["sweep", "--config", conf, "--sweep", "phi=0.1:0.9:3",
                     "--quantities", "net_secrecy", "--out",
                     str(tmp_path / "x.csv")]) == 2
        assert main(["sweep", "--config", conf, "--sweep", "tau=4:10:3",
                     "--quantities", "rate_lb", "--out",
                     str(tmp_path / "x.csv")]) == 2

    def test_bad_sweep_syntax(self, conf, tmp_path):
        assert main(["sweep", "--config", conf, "--sweep", "phi=oops",
                     "--quantities", "rate_lb", "--out",
                     str(tmp_path / "x.csv")]) == 2

    def test_unknown_figure(self, tmp_path):
        assert main(["figure", "--figure", "fig99",
                     "--out", str(tmp_path)]) == 2


class TestCompare:
    def test_report_runs_clean(self, conf, capsys):
        assert main(["compare", "--config", conf, "--trials", "150"]) == 0
        text = capsys.readouterr().out
        assert "rate_lb[null]" in text and "eve_cap" in text
        assert "FAIL" not in text

    def test_no_an_marks_rows(self, tmp_path, capsys):
        p = tmp_path / "noan.conf"
        p.write_text(CONFIG.replace("phi = 0.6", "phi = 1.0"))
        assert main(["compare", "--config", str(p), "--trials", "50"]) == 0
        text = capsys.readouterr().out
        assert "not applicable (no AN)" in text


class TestFigures:
    def test_fig0_outputs(self, tmp_path):
        out = str(tmp_path / "figs")
        assert main(["figure", "--figure", "fig0", "--out", out,
                     "--trials", "10"]) == 0
        files = os.listdir(out)
        assert "fig0.png" in files
        assert "fig0_manifest.txt" in files
        csvs = [f for f in files if f.endswith(".csv")]
        assert len(csvs) == 3
        manifest = open(os.path.join(out, "fig0_manifest.txt")).read()
        for f in csvs:
            assert f in manifest

    def test_fig0_bound_truncated_at_threshold(self, tmp_path):
        out = str(tmp_path / "figs")
        assert main(["figure", "--figure", "fig0", "--out", out,
                     "--trials", "10"]) == 0
        rows = read_rows(os.path.join(out, "fig0_eve_cap_rho0.1_alpha0.3.csv"))
        cap_count = sum(r["quantity"] == "eve_cap" for r in rows)
        ub_count = sum(r["quantity"] == "eve_cap_ub" for r in rows)
        assert 0 < ub_count < cap_count  # bound rows stop at its pole

    def test_figure_rerun_byte_identical(self, tmp_path):
        out1, out2 = str(tmp_path / "f1"), str(tmp_path / "f2")
        for out in (out1, out2):
            assert main(["figure", "--figure", "fig8", "--out", out,
                         "--trials", "10", "--seed", "4"]) == 0
        name = "fig8_net_secrecy_K5_T100.csv"
        assert open(os.path.join(out1, name), "rb").read() == \
            open(os.path.join(out2, name), "rb").read()
