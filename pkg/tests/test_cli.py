import json

import pytest

from phgradon import cli
from phgradon.coefficients import BoundaryWeight, register_weight


def test_list_names_every_experiment(capsys):
    assert cli.main(["list"]) == cli.EXIT_PASS
    out = capsys.readouterr().out
    for name in cli.EXPERIMENTS:
        assert name in out
    assert "weights:" in out


def test_list_json_includes_registered_weights(capsys):
    register_weight("bump", lambda n, args: BoundaryWeight(n, lambda th: 2 + th[..., 0], name="bump"), "2 + theta_1")
    assert cli.main(["list", "--json"]) == cli.EXIT_PASS
    catalog = json.loads(capsys.readouterr().out)
    assert len(catalog["experiments"]) == 6
    assert catalog["weights"]["bump"] == "2 + theta_1"
    assert catalog["experiments"]["verify-normal"]["defaults"]["t_max"] == 4.2


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-radon", "--colour", "red"],
        ["verify-radon", "--suite", "case-a"],
        ["verify-radon", "--n", "5"],
        ["verify-everything"],
        ["verify-radon", "--gamma"],
        ["verify-radon", "--weight", "linear:3"],
        ["verify-radon", "--tol", "1e-15"],
        ["list", "--n", "2"],
    ],
)
def test_configuration_errors_exit_with_four(argv, capsys):
    assert cli.main(argv) == cli.EXIT_CONFIG
    assert capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# a comment\nn = 3\ngamma = 1/2  # trailing\ngrid-count = 30\n")
    raw = cli.parse_config_text(path.read_text())
    raw.update(cli._split_overrides(["--ell=2", "--seed", "7"]))
    config = cli.build_config("verify-radon", raw)
    assert (config["n"], str(config["gamma"]), config["grid_count"], config["ell"], config["seed"]) == (3, "1/2", 30, 2, 7)


def test_config_lines_need_an_equals_sign():
    with pytest.raises(cli.ConfigError, match="line 2"):
        cli.parse_config_text("n = 2\nn 3\n")


def test_experiment_defaults_override_the_global_ones():
    assert cli.build_config("verify-normal", {})["t_max"] == 4.2
    assert cli.build_config("verify-radon", {})["t_max"] == 3.2


def test_reports_are_byte_identical_across_runs(tmp_path, capsys):
    argv = ["verify-index-calculus", "--random-checks", "20", "--seed", "3"]
    assert cli.main(argv + ["--out", str(tmp_path / "a")]) == cli.EXIT_PASS
    assert cli.main(argv + ["--out", str(tmp_path / "b")]) == cli.EXIT_PASS
    first = (tmp_path / "a" / "report.json").read_bytes()
    assert first == (tmp_path / "b" / "report.json").read_bytes()
    report = json.loads(first)
    assert report["summary"]["verdict"] == "pass"
    assert report["config"]["seed"] == 3
    assert "overall: pass" in capsys.readouterr().out


def test_radon_run_writes_samples_and_timing(tmp_path):
    assert cli.main(["verify-radon", "--gamma", "1/2", "--ell", "1", "--out", str(tmp_path)]) == cli.EXIT_PASS
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["sample_files"]
    for name in report["sample_files"]:
        header = (tmp_path / name).read_text().splitlines()[0]
        assert header == "rho,re_value,im_value,est_error"
    assert json.loads((tmp_path / "timing.json").read_text())["total_seconds"] > 0


def test_tabulated_coefficient_mismatch_exits_with_two(capsys):
    assert cli.main(["verify-backprojection", "--suite", "case-bc"]) == cli.EXIT_FAIL
    failed = [line for line in capsys.readouterr().out.splitlines() if line.startswith("FAIL ")]
    assert failed and all("tabulated" in line for line in failed)


def test_module_errors_become_inconclusive_checks(monkeypatch):
    def broken(cfg, report):
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.EXPERIMENTS, "verify-mellin", cli.Experiment("broken", broken))
    report = cli.run("verify-mellin", cli.build_config("verify-mellin", {}))
    assert report.overall() == "inconclusive"
    assert report.exit_code() == cli.EXIT_INCONCLUSIVE
    assert "traceback" in report.timing


def test_compare_allows_a_documented_sign_flip():
    assert cli.compare(1.0, 1.0 + 1e-9, 1e-6) == "pass"
    assert cli.compare(-1.0, 1.0, 1e-6, allow_sign=True) == "sign-flip"
    assert cli.compare(-1.0, 1.0, 1e-6) == "fail"
