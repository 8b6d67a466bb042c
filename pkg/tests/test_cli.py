import json
import math
from pathlib import Path

import jsonschema
import pytest

from stripkit.cli import main

SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def load_schema(name):
    return json.loads((SCHEMAS / name).read_text())


@pytest.fixture()
def chirp_file(tmp_path):
    path = tmp_path / "c7.dict"
    assert main(["build", "--family", "chirp", "--m", "7", "--out", str(path)]) == 0
    return path


@pytest.fixture()
def dg_file(tmp_path):
    path = tmp_path / "dg.dict"
    assert main(["build", "--family", "dg", "--s", "1", "--out", str(path)]) == 0
    return path


class TestBuild:
    def test_build_writes_file(self, chirp_file):
        assert chirp_file.exists() and chirp_file.stat().st_size > 0

    def test_build_with_csv(self, tmp_path):
        out = tmp_path / "g.dict"
        csv = tmp_path / "g.csv"
        code = main(["build", "--family", "gaussian", "--m", "4", "--N", "6",
                     "--seed", "3", "--out", str(out), "--csv", str(csv)])
        assert code == 0
        assert len(csv.read_text().strip().splitlines()) == 4

    def test_missing_parameter_exits_2(self, tmp_path):
        code = main(["build", "--family", "chirp", "--out", str(tmp_path / "x")])
        assert code == 2

    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["build", "--family", "chirp", "--m", "7",
                  "--out", str(tmp_path / "x"), "--bogus", "1"])
        assert err.value.code == 2


class TestAnalyze:
    def test_profile_json(self, chirp_file, tmp_path, capsys):
        out = tmp_path / "profile.json"
        assert main(["analyze", "--dict", str(chirp_file), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        jsonschema.validate(payload, load_schema("coherence_analysis.v1.json"))
        assert payload["profile"]["mu"] == pytest.approx(1 / math.sqrt(7), abs=1e-12)
        assert payload["profile"]["invariant"] is True

    def test_code_flags(self, dg_file, tmp_path):
        out = tmp_path / "dg.json"
        assert main(["analyze", "--dict", str(dg_file), "--pless", "2", "4",
                     "--strength", "3", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        jsonschema.validate(payload, load_schema("coherence_analysis.v1.json"))
        assert abs(payload["pless_residual"]["2"]) < 1e-9
        assert payload["oa_strength"]["exact"] is True

    def test_pless_on_nonbipolar_exits_2(self, tmp_path):
        out = tmp_path / "g.dict"
        main(["build", "--family", "gaussian", "--m", "4", "--N", "6",
              "--seed", "0", "--out", str(out)])
        assert main(["analyze", "--dict", str(out), "--pless", "2"]) == 2


class TestCertify:
    def test_exhaustive_report(self, tmp_path):
        out = tmp_path / "g.dict"
        main(["build", "--family", "gaussian", "--m", "8", "--N", "16",
              "--seed", "7", "--out", str(out)])
        rep_path = tmp_path / "rep.json"
        code = main(["certify", "--dict", str(out), "--property", "strip",
                     "--k", "3", "--delta", "0.6", "--exhaustive",
                     "--out", str(rep_path)])
        assert code == 0
        payload = json.loads(rep_path.read_text())
        jsonschema.validate(payload, load_schema("certification_report.v1.json"))
        assert payload["method"] == "exhaustive"
        assert payload["trials"] == 560

    def test_monte_carlo_deterministic(self, dg_file, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            assert main(["certify", "--dict", str(dg_file), "--property", "sinc",
                         "--k", "2", "--alpha", "0.2", "--trials", "500",
                         "--seed", "11", "--out", str(path)]) == 0
            outs.append(path.read_text())
        assert outs[0] == outs[1]

    def test_wsinc_requires_both_thresholds(self, dg_file):
        with pytest.raises(SystemExit):
            main(["certify", "--dict", str(dg_file), "--property", "wsinc",
                  "--k", "2", "--delta", "0.5"])


class TestCheck:
    def test_oa_condition(self, capsys):
        assert main(["check", "--condition", "strip-oa",
                     "--param", "l", "6", "--param", "k", "4",
                     "--param", "delta", "0.5", "--param", "eps", "0.01",
                     "--param", "m", "2123"]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, load_schema("sufficient_condition.v1.json"))
        assert payload["satisfied"] is True
        assert math.ceil(payload["derived"]["required_m"]) == 2123

    def test_gershgorin(self, capsys):
        assert main(["check", "--condition", "gershgorin",
                     "--param", "mu", "0.25", "--param", "k", "2",
                     "--param", "delta", "0.3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, load_schema("sufficient_condition.v1.json"))
        assert payload["satisfied"] is True

    def test_dg_sparsity(self, capsys):
        assert main(["check", "--condition", "dg-sparsity",
                     "--param", "m", "4096", "--param", "delta", "0.5",
                     "--param", "eps", "0.001", "--param", "k", "4",
                     "--param", "constant", "0.95"]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, load_schema("sufficient_condition.v1.json"))
        assert payload["satisfied"] is True


class TestRecover:
    def test_bp_records(self, dg_file, tmp_path, capsys):
        csv = tmp_path / "rec.csv"
        code = main(["recover", "--dict", str(dg_file), "--k", "2",
                     "--trials", "3", "--seed", "5", "--csv", str(csv)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["records"]) == 3
        assert all(r["recovery_l2"] < 1e-6 for r in payload["records"])
        assert len(csv.read_text().strip().splitlines()) == 4


class TestGv:
    def test_derandomized(self, tmp_path, capsys):
        out = tmp_path / "gv.dict"
        code = main(["gv", "--l", "6", "--mu", "0.5", "--derandomize",
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["success"] is True
        assert payload["coherence"] <= 0.5
        assert out.exists()

    def test_infeasible_exits_1(self, capsys):
        code = main(["gv", "--l", "4", "--mu", "0.25", "--m", "40",
                     "--derandomize"])
        assert code == 1


class TestExperiment:
    def test_config_run(self, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text('family=dg\nfamily_args={"s": 1}\nk=2\neps=0.1\n'
                       'trials=6\nseed=2\n')
        out = tmp_path / "report.json"
        csv = tmp_path / "trials.csv"
        code = main(["experiment", "--config", str(cfg), "--out", str(out),
                     "--csv", str(csv)])
        assert code == 0
        payload = json.loads(out.read_text())
        jsonschema.validate(payload, load_schema("experiment_report.v1.json"))
        assert payload["trials"] == 6
        assert len(csv.read_text().strip().splitlines()) == 7

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("mystery=1\n")
        assert main(["experiment", "--config", str(cfg)]) == 2

    def test_seed_override_reproduces(self, tmp_path):
        cfg = tmp_path / "study.cfg"
        cfg.write_text('family=dg\nfamily_args={"s": 1}\nk=2\neps=0.1\n'
                       'trials=4\nseed=2\n')
        texts = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            assert main(["experiment", "--config", str(cfg), "--seed", "9",
                         "--out", str(out)]) == 0
            payload = json.loads(out.read_text())
            payload.pop("runtime_seconds")
            texts.append(json.dumps(payload, sort_keys=True))
        assert texts[0] == texts[1]
