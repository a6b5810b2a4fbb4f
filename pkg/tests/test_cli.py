import csv
import io
import json

import numpy as np
import pytest

from telebounds import cli

DEPOL = '{"family": "depolarizing", "d": 2, "params": {"p": 0.5}}'
THERMAL = '{"family": "thermal_loss", "eta": 0.5, "nbar": 1.0}'
AMP_DAMP = json.dumps({"family": "kraus", "params": {"kraus": [
    [[[1, 0], [0, 0]], [[0, 0], [np.sqrt(0.5), 0]]],
    [[[0, 0], [np.sqrt(0.5), 0]], [[0, 0], [0, 0]]],
]}})


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestParsing:
    def test_grid_range(self):
        name, vals = cli.parse_grid("p=0.1:0.9:0.1")
        assert name == "p" and vals == pytest.approx(np.arange(1, 10) / 10)

    def test_grid_list_and_empty(self):
        assert cli.parse_grid("mu=1,2,4,8") == ("mu", [1, 2, 4, 8])
        assert cli.parse_grid("p=") == ("p", [])

    @pytest.mark.parametrize("bad", ["p", "=1:2:1", "p=a,b", "p=0:1:0"])
    def test_grid_errors(self, bad):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(bad)

    def test_int_list(self):
        assert cli.parse_int_list("1:5") == [1, 2, 3, 4, 5]
        assert cli.parse_int_list("2,4") == [2, 4]

    def test_config_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.json"
        cfg_file.write_text(json.dumps({"dtheta": 1e-3, "trials": 5, "format": "json"}))
        args = cli.build_parser().parse_args(["qfi", "--config", str(cfg_file), "--trials", "9"])
        cfg = cli.resolve_config(args)
        assert cfg.dtheta == 1e-3  # config over default
        assert cfg.trials == 9  # flag over config
        assert cfg.format == "json" and cfg.nmax == 30

    def test_channel_from_file(self, tmp_path, capsys):
        path = tmp_path / "ch.json"
        path.write_text(DEPOL)
        code, out, _ = run(capsys, "qfi", "--channel", f"@{path}")
        assert code == 0 and len(rows_of(out)) == 1


class TestQfi:
    def test_depolarizing_grid(self, capsys):
        code, out, _ = run(capsys, "qfi", "--channel", DEPOL, "--grid", "p=0.1:0.9:0.1", "--n", "100")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 9
        for r in rows:
            p = float(r["theta"])
            assert float(r["B_closed"]) == pytest.approx(1 / (p * (1 - p)), rel=1e-11)
            assert float(r["QCRB"]) == pytest.approx(p * (1 - p) / 100, rel=1e-11)
            assert float(r["relative_gap"]) < 1e-3

    def test_thermal_mu_column(self, capsys):
        code, out, _ = run(capsys, "qfi", "--channel", THERMAL, "--grid", "mu=1,2,4,8")
        b = [float(r["B_closed"]) for r in rows_of(out)]
        assert code == 0 and all(x < y for x, y in zip(b, b[1:])) and b[-1] < 0.5

    def test_empty_grid(self, capsys):
        code, out, _ = run(capsys, "qfi", "--channel", DEPOL, "--grid", "p=")
        assert code == 0 and out.splitlines() == [",".join(cli.QFI_COLUMNS)]

    def test_gap_gate(self, capsys):
        code, _, _ = run(capsys, "qfi", "--channel", DEPOL, "--dtheta", "0.2")
        assert code == cli.EXIT_GAP

    @pytest.mark.parametrize("argv", [
        ["qfi", "--channel", "{bad"],
        ["qfi", "--channel", '{"family": "nope", "p": 0.2}'],
        ["qfi", "--channel", DEPOL, "--grid", "p=0:1:0.5"],
        ["qfi", "--channel", DEPOL, "--grid", "eta=0.1,0.2"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == cli.EXIT_USAGE

    def test_argparse_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["bogus"])
        assert info.value.code == 2

    def test_csv_and_json_agree(self, capsys):
        argv = ["qfi", "--channel", THERMAL, "--grid", "mu=1,4", "--grid", "nbar=0.5,2"]
        _, out_csv, _ = run(capsys, *argv)
        _, out_json, _ = run(capsys, *argv, "--format", "json")
        rows_csv = rows_of(out_csv)
        rows_json = json.loads(out_json)["rows"]
        assert len(rows_csv) == len(rows_json) == 4
        for a, b in zip(rows_csv, rows_json):
            for col in ("theta", "mu", "B_closed", "B_numeric", "relative_gap", "QCRB"):
                assert float(a[col]) == b[col]

    def test_deterministic_and_parallel(self, capsys):
        argv = ["qfi", "--channel", DEPOL, "--grid", "p=0.1:0.5:0.1"]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv, "--workers", "4")
        assert a == b

    def test_sweep_extra_axis(self, capsys):
        code, out, _ = run(capsys, "sweep", "--channel", THERMAL, "--grid", "eta=0.25,0.5",
                           "--grid", "nbar=1,2", "--mu", "2")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 4 and "eta" in rows[0]

    def test_output_file(self, tmp_path, capsys):
        out_path = tmp_path / "t.csv"
        code, out, _ = run(capsys, "qfi", "--channel", DEPOL, "--out", str(out_path))
        assert code == 0 and out == ""
        raw = out_path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")


class TestDiscriminate:
    def test_dephasing_reports(self, capsys):
        code, out, _ = run(capsys, "discriminate",
                           "--channel", '{"family": "dephasing", "p": 0.2}',
                           "--channel2", '{"family": "dephasing", "p": 0.4}', "--n", "1:5")
        rows = rows_of(out)
        assert code == 0 and [int(r["n"]) for r in rows] == [1, 2, 3, 4, 5]
        assert all(r["helstrom"] != "" for r in rows)

    def test_thermal_asymptotic(self, capsys):
        from telebounds.discrimination import thermal_qcb
        code, out, _ = run(capsys, "discriminate", "--channel", THERMAL, "--channel2",
                           '{"family": "thermal_loss", "eta": 0.5, "nbar": 2.0}', "--format", "json")
        rep = json.loads(out)["reports"][0]
        q, s = thermal_qcb(1.0, 2.0)
        assert code == 0 and rep["qcb"] == pytest.approx(q, rel=1e-11)
        assert rep["s_star"] == pytest.approx(s, rel=1e-11) and rep["asymptotic"]

    def test_identical(self, capsys):
        code, out, _ = run(capsys, "discriminate", "--channel", DEPOL, "--channel2", DEPOL,
                           "--format", "json")
        rep = json.loads(out)["reports"][0]
        assert code == 0 and rep["helstrom"] == 0.5 and rep["fidelity_upper"] == 0.5
        assert any("degenerate" in n for n in rep["notes"])

    def test_family_mismatch(self, capsys):
        assert run(capsys, "discriminate", "--channel", DEPOL, "--channel2", THERMAL)[0] == 2

    def test_order_violation_exit(self, capsys, monkeypatch):
        from telebounds import discrimination as disc
        monkeypatch.setattr(disc.BoundReport, "ordering_violations", lambda self, tol=0: ["forced"])
        code, _, _ = run(capsys, "discriminate", "--channel", DEPOL, "--channel2",
                         '{"family": "depolarizing", "p": 0.3}')
        assert code == cli.EXIT_ORDER


class TestStretchVerify:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "stretch-verify", "--channel", DEPOL, "--n", "2",
                           "--trials", "30", "--seed", "7")
        row = rows_of(out)[0]
        assert code == 0 and row["passed"] == "True"
        assert float(row["max_residual"]) < 1e-9 and float(row["max_ratio"]) <= 1 + 1e-4

    def test_non_covariant(self, capsys):
        code, out, err = run(capsys, "stretch-verify", "--channel", AMP_DAMP, "--trials", "3")
        assert code == cli.EXIT_COVARIANCE
        assert rows_of(out)[0]["witness"] == "2" and "witness" in err

    def test_zero_trials_default_seed(self, capsys):
        code, out, err = run(capsys, "stretch-verify", "--channel", DEPOL, "--trials", "0",
                             "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["rows"][0]["max_ratio"] is None
        assert any("default seed 0" in n for n in data["notes"]) and "default seed" in err

    def test_seed_reproducible(self, capsys):
        argv = ["stretch-verify", "--channel", DEPOL, "--n", "2", "--trials", "5", "--seed", "3"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
