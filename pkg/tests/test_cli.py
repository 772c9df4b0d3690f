import csv
import io
import json
import math

import pytest

from faraday_ecp import cli
from faraday_ecp.config import ConfigError, build_config, read_config_file, validate
from faraday_ecp.faraday import PhasePair, SingularParametersError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_json_example(self, capsys):
        code, out, _ = run(capsys, "run", "--protocol", "atomic", "--a1", "0.6", "--a2", "0.6", "--ideal-phases", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data["schema_version"] == 1
        assert abs(data["success_probability"] - 0.4608) < 1e-10
        assert len(data["branches"]) == 8

    def test_json_round_trip_is_bit_exact(self, capsys):
        from faraday_ecp.protocols import PairSpec, atomic_ecp

        _, out, _ = run(capsys, "run", "--a1", "0.6", "--a2", "0.75", "--phi", "2.7", "--phi0", "1.4")
        data = json.loads(out)
        ref = atomic_ecp(PairSpec(0.6), PairSpec(0.75), PhasePair(2.7, 1.4))
        assert data["success_probability"] == ref.success_probability
        assert [b["probability"] for b in data["branches"]] == [b.probability for b in ref.branches]
        assert json.loads(json.dumps(data)) == data

    def test_ghz_run(self, capsys):
        code, out, _ = run(capsys, "run", "--protocol", "photonic-ghz", "--N", "2", "--a1", "0.6", "--a2", "0.8")
        assert code == 0
        assert json.loads(out)["success_probability"] == pytest.approx(0.5392, abs=1e-10)

    def test_output_file_and_summary(self, capsys, tmp_path):
        target = tmp_path / "run.json"
        code, out, _ = run(capsys, "run", "--a1", "0.6", "--output", str(target))
        assert code == 0
        assert "0.4608" in out
        assert json.loads(target.read_text())["success_probability"] == pytest.approx(0.4608)

    def test_monte_carlo_deterministic_files(self, capsys, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            assert run(capsys, "run", "--a1", "0.6", "--trials", "2000", "--seed", "5", "--output", str(p))[0] == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert json.loads(paths[0].read_text())["monte_carlo"]["trials"] == 2000

    def test_text_format(self, capsys):
        code, out, _ = run(capsys, "run", "--a1", "0.6", "--format", "text")
        assert code == 0 and "success probability = 0.4608" in out

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, err = run(capsys, "run", "--a1", "0.6", "--output", str(tmp_path / "missing" / "x.json"))
        assert code == 2
        assert "does not exist" in err
        # the path exists but is a directory, so the failure happens at write time
        code, _, err = run(capsys, "run", "--a1", "0.6", "--output", str(tmp_path))
        assert code == 2
        assert "cannot write" in err

    def test_numerical_error_exit_code(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise SingularParametersError("denominator vanishes")

        monkeypatch.setattr(cli, "run_protocol", boom)
        code, _, err = run(capsys, "run", "--a1", "0.6")
        assert code == 3
        assert "numerical" in err

    def test_lossy_reject_is_validation_error(self, capsys):
        code, _, err = run(capsys, "run", "--a1", "0.6", "--gamma", "0.2", "--loss-mode", "reject")
        assert code == 2
        assert "acknowledge" in err.lower() or "lossy" in err.lower()


class TestSweep:
    def test_csv_example(self, capsys):
        code, out, _ = run(capsys, "sweep", "--axis", "a1", "--from", "0.05", "--to", "0.95", "--points", "50", "--format", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 50
        assert list(rows[0])[:10] == list(cli.SWEEP_COLUMNS)[:10]
        best = max(rows, key=lambda r: float(r["P_simulated"]))
        assert float(best["axis_value"]) == pytest.approx(0.7071, abs=0.01)
        assert float(best["P_simulated"]) == pytest.approx(0.5, abs=1e-3)

    def test_detuning_sweep_json(self, capsys):
        code, out, _ = run(capsys, "sweep", "--axis", "detuning", "--to", "0.1", "--points", "4")
        assert code == 0
        data = json.loads(out)
        assert set(data["data"]["convention"]) == {"+/cavity", "-/cavity"}

    def test_missing_axis(self, capsys):
        code, _, err = run(capsys, "sweep", "--a1", "0.6")
        assert code == 2 and "axis" in err


class TestPhases:
    def test_both_conventions(self, capsys):
        code, out, _ = run(capsys, "phases", "--detuning", "0.1", "--both-conventions", "--format", "json")
        assert code == 0
        rows = json.loads(out)["rows"]
        assert [r["convention"] for r in rows] == ["+/cavity", "-/cavity"]
        assert rows[0]["reported_phi"] == 2.75
        assert rows[0]["reported_phi0"] == 1.36
        for r in rows:
            assert r["abs_r_coupled"] == pytest.approx(1, abs=1e-12)

    def test_atom_anchor_table(self, capsys):
        code, out, _ = run(capsys, "phases", "--detuning", "0.1", "--anchor", "both", "--format", "text")
        assert code == 0
        assert "+/atom" in out and "2.746802" in out


class TestValidate:
    def test_normalization(self, capsys):
        code, _, err = run(capsys, "validate", "--a1", "0.6", "--b1", "1.1")
        assert code == 2
        assert "normalization" in err

    def test_ghz_n_zero(self, capsys):
        code, _, err = run(capsys, "validate", "--protocol", "atomic-ghz", "--N", "0")
        assert code == 2 and "N" in err

    def test_valid(self, capsys):
        code, out, _ = run(capsys, "validate", "--protocol", "atomic", "--a1", "0.6")
        assert code == 0 and "valid" in out

    def test_validate_lists_all(self):
        raw = {"a1": ("1.2", "--a1"), "N": ("0", "--N"), "protocol": ("atomic-ghz", "--protocol")}
        fields = {v.field for v in validate(raw)}
        assert {"a1", "N"} <= fields
        assert validate({"a1": ("0.6", "--a1")}) == []

    def test_cavity_and_phases_conflict(self):
        with pytest.raises(ConfigError):
            build_config({"detuning": ("0.1", "x:1"), "phi": ("2.7", "x:2")})


class TestConfigFile:
    def test_line_numbers_in_errors(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("# experiment\nprotocol = atomic\n\na1 = 1.3   # too large\n", encoding="utf-8")
        code, _, err = run(capsys, "validate", "--config", str(cfg))
        assert code == 2
        assert f"{cfg}:4" in err

    def test_syntax_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("a1 0.6\n", encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            read_config_file(cfg)
        assert f"{cfg}:1" in str(info.value)

    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("a1 = 0.3\nformat = csv\n", encoding="utf-8")
        code, out, _ = run(capsys, "run", "--config", str(cfg), "--a1", "0.6", "--format", "json")
        assert code == 0
        assert json.loads(out)["success_probability"] == pytest.approx(0.4608)

    def test_mhz_units(self):
        cfg = build_config(
            {
                "units": ("mhz", "f:1"),
                "kappa_mhz": ("53", "f:2"),
                "g": ("26.5", "f:3"),
                "detuning": ("0", "f:4"),
            }
        )
        assert cfg.cavity is not None
        assert cfg.cavity.g == pytest.approx(0.5)
        assert cfg.phases.phi == pytest.approx(math.pi, abs=1e-12)

    def test_unreadable_config(self, capsys, tmp_path):
        code, _, err = run(capsys, "run", "--config", str(tmp_path / "nope.cfg"))
        assert code == 2 and "cannot read" in err
