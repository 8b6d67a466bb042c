
import numpy as np
import pytest

import stripkit as sk
from stripkit.experiments import (ExperimentConfig, parse_config_file,
                                  records_csv, sweep_csv)


def dg_config(**over):
    base = dict(family="dg", family_args={"s": 1}, k=2, eps=0.1, trials=25,
                seed=3)
    base.update(over)
    return ExperimentConfig(**base)


class TestRecoveryFloor:
    def test_identity_dictionary_all_bounds_hold(self, identity8):
        cfg = ExperimentConfig(family="gaussian", family_args={"m": 8, "N": 8, "seed": 0},
                               k=2, eps=0.1, trials=20, seed=1)
        rep = sk.run_recovery_floor(cfg, d=identity8)
        assert rep.aggregate["frac_both"] == 1.0
        assert rep.converged == 20

    def test_dg_guaranteed_regime(self):
        rep = sk.run_recovery_floor(dg_config())
        assert rep.converged == 25
        assert rep.aggregate["frac_both"] == 1.0
        assert rep.aggregate["support_rate"] == 1.0
        assert rep.floor == pytest.approx(0.7)

    def test_floor_asserted_only_with_enough_trials_and_low_k(self):
        rep = sk.run_recovery_floor(dg_config(trials=25))
        assert not rep.floor_asserted          # fewer than 200 trials
        rep2 = sk.run_recovery_floor(dg_config(k=4, trials=25))
        assert not rep2.floor_asserted         # k above the uniform threshold

    def test_k_zero_degenerate(self):
        rep = sk.run_recovery_floor(dg_config(k=0))
        assert rep.aggregate["frac_both"] == 1.0 and rep.trials == 0

    def test_oversparse_k_fails_recovery(self):
        # k = m+1 supports cannot be recovered for generic signs
        cfg = ExperimentConfig(family="gaussian",
                               family_args={"m": 4, "N": 12, "seed": 2},
                               k=5, eps=0.1, trials=15, seed=7)
        rep = sk.run_recovery_floor(cfg)
        assert rep.aggregate["frac_both"] <= 0.2

    def test_reproducible_json(self):
        a = sk.run_recovery_floor(dg_config()).to_json(include_runtime=False)
        b = sk.run_recovery_floor(dg_config()).to_json(include_runtime=False)
        assert a == b
        full = sk.run_recovery_floor(dg_config()).to_json()
        assert "runtime_seconds" in full and "runtime_seconds" not in a

    def test_accounting(self):
        rep = sk.run_recovery_floor(dg_config())
        assert rep.trials == len(rep.records)
        nonconv = sum(1 for r in rep.records if not r["converged"])
        assert rep.converged + nonconv == rep.trials


class TestOffsupportFloor:
    def test_compressible_floor(self):
        cfg = dg_config(magnitudes="compressible", trials=30, eps=0.1)
        rep = sk.run_offsupport_floor(cfg)
        assert rep.floor == pytest.approx(0.6)
        assert rep.aggregate["frac_l1"] >= 0.9

    def test_degenerate_floor_at_large_eps(self):
        cfg = dg_config(eps=0.25, trials=10)
        rep = sk.run_offsupport_floor(cfg)
        assert rep.floor == 0.0
        assert rep.floor_passed


class TestLassoStudy:
    def test_rejects_zero_sigma(self):
        with pytest.raises(ValueError):
            sk.run_lasso_study(dg_config(sigma=0.0, solver="lasso"))

    def test_gaussian_study(self):
        cfg = ExperimentConfig(family="gaussian",
                               family_args={"m": 32, "N": 64, "seed": 5},
                               k=2, eps=0.1, sigma=0.05, trials=10, seed=9,
                               solver="lasso")
        rep = sk.run_lasso_study(cfg)
        assert rep.converged == 10
        assert np.isfinite(rep.aggregate["ratio_max"])
        assert 0.0 <= rep.aggregate["frac_cond_all"] <= 1.0


class TestSweep:
    def test_k_progression(self, tmp_path):
        cfg = ExperimentConfig(family="dg", family_args={"s": 1},
                               k_range=[0, 1, 2, 6, 10], eps=0.1, trials=12,
                               seed=4)
        reports = sk.sweep(cfg)
        rates = [r.aggregate["frac_both"] for r in reports]
        assert rates[0] == 1.0 and rates[1] == 1.0 and rates[2] == 1.0
        assert rates[-1] <= rates[2] + 0.2     # success decays with k
        path = tmp_path / "sweep.csv"
        sweep_csv(reports, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0].startswith("k,") and len(rows) == 6


def test_records_csv(tmp_path):
    rep = sk.run_recovery_floor(dg_config(trials=5))
    path = tmp_path / "records.csv"
    records_csv(rep, path)
    rows = path.read_text().strip().splitlines()
    assert len(rows) == 6


def test_parse_config_file(tmp_path):
    path = tmp_path / "study.cfg"
    path.write_text("""# comment line
family=dg
family_args={"s": 1}
k=2
eps=0.1
trials=7
seed=12
""")
    cfg = parse_config_file(path)
    assert cfg.family == "dg" and cfg.family_args == {"s": 1}
    assert (cfg.k, cfg.trials, cfg.seed) == (2, 7, 12)
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense=1\n")
    with pytest.raises(ValueError):
        parse_config_file(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(family="dg", dictionary_path="x").validate()
    with pytest.raises(ValueError):
        ExperimentConfig(family="dg", trials=0).validate()


def test_jobs_do_not_change_results():
    a = sk.run_recovery_floor(dg_config(trials=8, jobs=1)).to_json(include_runtime=False)
    b = sk.run_recovery_floor(dg_config(trials=8, jobs=2)).to_json(include_runtime=False)
    assert a == b
