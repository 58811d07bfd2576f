import subprocess
import sys

import pytest

from lighttail import checks
from lighttail.cli import main


def test_oracle_command(capsys):
    assert main(["oracle", "--f", "gamma2", "--t", "10"]) == 0
    out = capsys.readouterr().out
    assert "log_tail" in out and "0.01033605067" in out


def test_expand_breakdown(capsys):
    assert main(["expand", "--f", "tilted_cubic", "--g", "c_minus1.5", "--t", "200"]) == 0
    out = capsys.readouterr().out
    for key in ("branch", "leading", "M1.t_c", "M2.t_inverse", "predicted_log", "oracle_log", "error_order"):
        assert key in out


@pytest.mark.parametrize("theorem", ["m1", "m2", "thm1"])
def test_expand_variants(theorem, capsys):
    f = "weibull_root" if theorem == "thm1" else "tilted_cubic"
    g = [] if theorem == "thm1" else ["--g", "gamma2"]
    assert main(["expand", "--f", f, *g, "--t", "300", "--theorem", theorem]) == 0
    assert "rel_err2" in capsys.readouterr().out


def test_hypothesis_rejection_is_usage_error(capsys):
    assert main(["expand", "--f", "weibull_root", "--t", "100", "--theorem", "thm4"]) == 2
    assert "Theorem 4 requires tilted-RV factors" in capsys.readouterr().err


def test_bad_model_is_usage_error(capsys):
    assert main(["oracle", "--f", "gamma:shape=2,rate=x", "--t", "3"]) == 2
    assert "position 19" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["oracle", "--t", "3"])
    assert exc.value.code == 2


def test_sweep_and_rate(tmp_path, capsys):
    csv_path, plot_path = tmp_path / "s.csv", tmp_path / "s.dat"
    rc = main(["sweep", "--f", "gamma2", "--t-min", "20", "--t-max", "160", "--points", "4",
               "--out", str(csv_path), "--plot", str(plot_path), "--jobs", "2"])
    assert rc == 0
    assert csv_path.read_text().splitlines()[0] == "t,oracle_log,pred1_log,pred2_log,rel_err1,rel_err2,branch"
    assert len(plot_path.read_text().splitlines()) == 4
    assert main(["rate", str(csv_path), "--column", "rel_err1", "--expect-slope", "-1"]) == 0
    assert main(["rate", str(csv_path), "--column", "rel_err2", "--expect-slope", "-1"]) == 1
    assert "slope" in capsys.readouterr().out


def test_sweep_config_with_flag_override(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[models]\nf = gamma2\n[grid]\nt_min = 20\nt_max = 160\npoints = 4\n")
    assert main(["sweep", "--config", str(ini), "--points", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[1].startswith("20,") and lines[2].startswith("160,")


def test_selftest_subset_passes(capsys):
    assert main(["selftest", "--only", "A1,A2"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6


def test_selftest_flags_perturbed_leading_constant(capsys):
    assert main(["selftest", "--only", "A3", "--perturb-leading", "0.01"]) == 1
    assert "FAIL  A3.ratio" in capsys.readouterr().out


def test_selftest_flags_loose_oracle(capsys):
    assert main(["selftest", "--only", "A1", "--oracle-rel-tol", "1e-3"]) == 1


def test_a1_detects_a_biased_oracle(monkeypatch):
    real = checks.conv_tail

    def biased(F, G, t, **kw):
        r = real(F, G, t, **kw)
        return r.__class__(r.log_value + 1e-6, r.rel_error_estimate, r.evaluations, r.split_point, r.converged)

    monkeypatch.setattr(checks, "conv_tail", biased)
    assert not any(r.passed for r in checks.check_oracle_exactness())


def test_selftest_rejects_unknown_subset():
    assert main(["selftest", "--only", "A9"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lighttail", "oracle", "--f", "gamma1", "--t", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "log_tail" in proc.stdout
