import csv
import json

import numpy as np
import pytest

from cavitybus import tomography
from cavitybus.cli import main, parse_config, validate_config
from cavitybus.errors import ConfigInvalid, IntegratorDrift


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config('scenario = "gate-fidelity"\n')
        assert cfg.scenario == "gate-fidelity"
        assert (cfg["n"], cfg["delta"], cfg["j"], cfg["omega"]) == (5, 1.0, 1.0, 0.03)
        assert (cfg["kappa"], cfg["gamma"]) == (0.0, 0.0)
        p = cfg.model_params()
        assert (p.omega1, p.omega2) == (0.03, 0.03)

    def test_comments_and_types(self):
        cfg = parse_config('# run\nscenario = "tomography"\n\nopen = true\nkappa = 1e-3\nn = 7\n')
        assert cfg["open"] is True
        assert cfg["n"] == 7
        assert cfg.model_params().omega2 == -0.03

    def test_negative_kappa_named(self):
        with pytest.raises(ConfigInvalid) as exc:
            parse_config('scenario = "evolve"\nkappa = -0.1\n')
        assert any(msg.startswith("kappa") for msg in exc.value.errors)

    def test_unknown_scenario_lists_valid(self):
        with pytest.raises(ConfigInvalid) as exc:
            parse_config('scenario = "bogus"\n')
        msg = exc.value.errors[0]
        for name in ("spectrum", "identities", "evolve", "gate-fidelity", "tomography"):
            assert name in msg

    def test_collects_all_errors(self):
        text = 'scenario = "evolve"\nkappa = -1\nfoo = 2\nomega = "x"\nsamples = 1.5\nbroken line\n'
        with pytest.raises(ConfigInvalid) as exc:
            parse_config(text)
        fields = {msg.split(":")[0] for msg in exc.value.errors}
        assert {"kappa", "foo", "omega", "samples", "line 6"} <= fields

    def test_overrides_win(self):
        cfg = parse_config('scenario = "evolve"\nn = 3\n', {"n": 9})
        assert cfg["n"] == 9

    def test_identity_deltas(self):
        assert validate_config({"scenario": "identities", "delta": "1,2.5"})["delta"] == [1.0, 2.5]
        assert validate_config({"scenario": "identities", "delta": [3]})["delta"] == [3.0]

    def test_hz_reference(self):
        cfg = validate_config(
            {"scenario": "tomography", "gamma": 1.6e7, "kappa": 4e5, "hz_reference": 2.5e9}
        )
        p = cfg.model_params()
        assert p.gamma == pytest.approx(0.0064)
        assert p.kappa == pytest.approx(1.6e-4)


class TestMain:
    def test_spectrum_strong_impurity(self, tmp_path):
        out = tmp_path / "a"
        args = ["spectrum", "--m", "7", "--delta-min", "-10", "--delta-max", "10", "--steps", "400"]
        assert main(args + ["--out", str(out)]) == 0
        rows = read_csv(out / "spectrum.csv")
        assert rows[0] == ["delta", "E1", "E2", "E3", "E4", "E5", "E6", "E7"]
        assert len(rows) == 402
        middle = [float(x) for x in rows[201]]
        assert middle[0] == 0.0
        assert max(abs(x) for x in middle[1:]) < 2
        manifest = json.loads((out / "run.json").read_text())
        assert manifest["scenario"] == "spectrum"
        assert manifest["config"]["steps"] == 400
        assert "numpy" in manifest["versions"]
        assert "compute_seconds" in manifest["timings"]

    def test_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            assert main(["evolve", "--n", "3", "--samples", "20", "--out", str(tmp_path / name)]) == 0
        for f in ("evolve.csv", "summary.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_identities_table(self, tmp_path):
        assert main(["identities", "--m-max", "21", "--delta", "0.5,1,2", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "identities.csv")
        statuses = {r[-1] for r in rows[1:]}
        assert statuses == {"pass", "skipped"}
        # both signs for every magnitude, m = 3..21
        assert len(rows) - 1 == 19 * 6

    def test_identities_failure_exit_code(self, tmp_path):
        assert main(["identities", "--m-max", "5", "--delta", "1", "--tol", "1e-30", "--out", str(tmp_path)]) == 3

    def test_evolve_outputs(self, tmp_path):
        assert main(["evolve", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "evolve.csv")
        assert rows[0] == ["t_over_T", "t", "fidelity"]
        assert len(rows) == 201
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["fidelity_at_T"] > 0.99
        assert abs(summary["peak_t_over_T"] - 1) < 0.02

    def test_gate_fidelity_closed_default(self, tmp_path):
        assert main(["gate-fidelity", "--samples", "11", "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["avg_fidelity"] == pytest.approx(0.9969, abs=2e-3)
        rows = read_csv(tmp_path / "gate_fidelity.csv")
        assert rows[0] == ["t_over_T", "t", "avg_fidelity", "leakage"]
        assert float(rows[1][2]) == pytest.approx(0.7)

    def test_tomography_outputs(self, tmp_path):
        assert main(["tomography", "--omega", "0.05", "--out", str(tmp_path)]) == 0
        real = read_csv(tmp_path / "chi_real.csv")
        imag = read_csv(tmp_path / "chi_imag.csv")
        assert real[0][:5] == ["basis", "II", "IX", "IYt", "IZ"]
        assert [r[0] for r in real[1:]] == real[0][1:]
        chi = np.array([[float(x) for x in r[1:]] for r in real[1:]])
        chi_i = np.array([[float(x) for x in r[1:]] for r in imag[1:]])
        assert chi.shape == (16, 16)
        np.testing.assert_allclose(chi, chi.T, atol=1e-12)
        np.testing.assert_allclose(chi_i, -chi_i.T, atol=1e-12)
        report = json.loads((tmp_path / "report.json").read_text())
        assert set(report) == {"params", "t", "avg_fidelity", "chi_overlap", "leakage"}

    def test_config_file_and_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text('scenario = "evolve"\nn = 3\nsamples = 10\n')
        assert main(["evolve", "--config", str(cfg), "--n", "7", "--out", str(tmp_path / "o")]) == 0
        manifest = json.loads((tmp_path / "o" / "run.json").read_text())
        assert manifest["config"]["n"] == 7
        assert manifest["config"]["samples"] == 10

    def test_validation_exit_code(self, tmp_path, capsys):
        assert main(["evolve", "--kappa", "-1", "--out", str(tmp_path)]) == 2
        assert "kappa" in capsys.readouterr().err

    def test_scenario_mismatch(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text('scenario = "spectrum"\n')
        assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_missing_config(self, tmp_path):
        assert main(["evolve", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_seedless_rejects_value(self):
        with pytest.raises(SystemExit) as exc:
            main(["spectrum", "--seedless=1"])
        assert exc.value.code == 2

    def test_seedless_flag(self, tmp_path):
        assert main(["spectrum", "--m", "3", "--steps", "2", "--seedless", "--out", str(tmp_path)]) == 0

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        def drift(*args, **kwargs):
            raise IntegratorDrift("trace drifted")

        monkeypatch.setattr(tomography, "channel_trajectory", drift)
        assert main(["tomography", "--open", "--out", str(tmp_path)]) == 3
        assert not (tmp_path / "report.json").exists()
