import json
import math

import pytest

from fatoulab import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments_usage(capsys):
    code, _out, err = run([], capsys)
    assert code == 1
    assert "usage" in err.lower()


def test_unknown_subcommand(capsys):
    code, _out, err = run(["frobnicate"], capsys)
    assert code == 1
    assert "usage" in err.lower() or "invalid" in err.lower()


def test_unknown_flag(capsys):
    code, _out, err = run(["tau", "--alpha", "0.4", "--bogus"], capsys)
    assert code == 1


def test_tau_ok(tmp_path, capsys):
    code, out, _err = run(["tau", "--alpha", "0.4", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["residual"] < 1e-12
    assert data["tau"] > 1.0
    manifest = json.loads((tmp_path / "tau-manifest.json").read_text())
    assert manifest["subcommand"] == "tau"
    assert "tau-summary.json" in manifest["outputs"]


def test_tau_out_of_range(tmp_path, capsys):
    code, _out, err = run(["tau", "--alpha", "0.7", "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    assert "(0, 1/2)" in err


def test_verify_semiconj(tmp_path, capsys):
    code, out, _err = run(
        ["verify-semiconj", "--alpha", "0.25", "--samples", "200",
         "--seed", "11", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["passed"] is True
    assert data["max_residual"] < 1e-12
    assert data["seed"] == 11


def test_verify_semiconj_large_alpha_scaled(tmp_path, capsys):
    # absolute residuals at alpha = 0.4 hit the ulp floor of e^{iz} near the
    # strip corners; the scaled residual stays at machine precision
    code, out, _err = run(
        ["verify-semiconj", "--alpha", "0.4", "--samples", "200",
         "--seed", "11", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["passed"] is True
    assert data["max_scaled_residual"] < 1e-12


def test_seed_recorded_when_generated(tmp_path, capsys):
    code, out, _err = run(
        ["verify-semiconj", "--alpha", "0.3", "--samples", "50",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    seed = json.loads(out)["seed"]
    manifest = json.loads((tmp_path / "verify-semiconj-manifest.json").read_text())
    assert manifest["seed"] == seed


def test_blaschke_eval(tmp_path, capsys):
    code, out, _err = run(
        ["blaschke-eval", "--alpha", "0.4", "--theta", "1.5707963267948966",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["angle"] == pytest.approx(math.pi / 2, abs=1e-10)
    assert data["modulus"] == pytest.approx(1.0, abs=1e-10)
    assert data["derivative_at_zero"] == pytest.approx(0.8, abs=1e-10)


def test_blaschke_eval_exclusion(tmp_path, capsys):
    code, _out, err = run(
        ["blaschke-eval", "--alpha", "0.4", "--theta", "1e-5",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 2
    assert "singular" in err.lower()


def test_harmonic_closed_form(tmp_path, capsys):
    code, out, _err = run(
        ["harmonic", "--domain", "annulus", "--method", "closed-form",
         "--R", "2.0", "--rho", "1.4142135623730951",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["outer_mass"] == pytest.approx(0.75)


def test_harmonic_wos_and_reproducibility(tmp_path, capsys):
    args = ["harmonic", "--domain", "annulus", "--method", "wos",
            "--R", "2.0", "--rho", "1.0", "--walks", "4000",
            "--bins", "16", "--seed", "77", "--out-dir", str(tmp_path)]
    code, out1, _ = run(args + ["--prefix", "runA"], capsys)
    assert code == 0
    code, out2, _ = run(args + ["--prefix", "runB"], capsys)
    assert code == 0
    csv_a = (tmp_path / "runA-histogram.csv").read_text()
    csv_b = (tmp_path / "runB-histogram.csv").read_text()
    assert csv_a == csv_b
    data = json.loads(out1)
    assert data["component_masses"][0] == pytest.approx(0.5, abs=0.05)


def test_harmonic_champagne(tmp_path, capsys):
    bubbles = json.dumps([[0.4, 0.0, 0.1], [-0.3, 0.25, 0.1]])
    code, out, _err = run(
        ["harmonic", "--domain", "champagne", "--method", "wos",
         "--bubbles", bubbles, "--walks", "2000", "--seed", "5",
         "--min-bin-mass", "1e-4", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert len(data["component_masses"]) == 3
    assert "support_test" in data


def test_harmonic_champagne_needs_bubbles(tmp_path, capsys):
    code, _out, err = run(
        ["harmonic", "--domain", "champagne", "--method", "wos",
         "--walks", "100", "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    assert "bubbles" in err


def test_harmonic_cross_validate(tmp_path, capsys):
    code, out, _err = run(
        ["harmonic", "--domain", "annulus", "--method", "cross-validate",
         "--R", str(math.e), "--walks", "20000", "--seed", "3",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["passed"] is True


def test_classify_radial(tmp_path, capsys):
    code, out, _err = run(
        ["classify-radial", "--R", str(math.e), "--xi", "0.0",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "bounded"
    code, out, _err = run(
        ["classify-radial", "--R", str(math.e), "--xi", "1.5707963267948966",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "escaping"


def test_circle_stats(tmp_path, capsys):
    code, out, _err = run(
        ["circle-stats", "--map", '{"kind": "power", "d": 2}',
         "--n", "2000", "--seed", "17", "--theta0", "0.7",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["invariance_ks"] < data["ks_critical_1pct"]
    orbit_csv = (tmp_path / "circle-stats-orbit.csv").read_text()
    lines = orbit_csv.strip().splitlines()
    assert lines[0] == "iteration,angle"
    assert len(lines) == 2001
    # every row parses as plain decimal numbers
    for line in lines[1:]:
        i, a = line.split(",")
        assert int(i) >= 1 and 0.0 <= float(a) < 2 * math.pi
    push_csv = (tmp_path / "circle-stats-pushforward.csv").read_text()
    assert push_csv.startswith("component_id,bin_index,bin_start_angle_rad,count\n")


def test_circle_stats_blaschke_truncates_at_exclusion(tmp_path, capsys):
    # the boundary map preserves Lebesgue measure, so a long orbit visits
    # the exclusion zones; the CLI truncates and reports instead of dying
    code, out, _err = run(
        ["circle-stats", "--map", '{"kind": "blaschke", "alpha": 0.4}',
         "--n", "5000", "--seed", "4", "--theta0", "0.1",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["orbit_points"] <= 5000
    if data["orbit_points"] < 5000:
        assert "orbit_truncated" in data


def test_spread(tmp_path, capsys):
    code, out, _err = run(
        ["spread", "--map", '{"kind": "power", "d": 2}',
         "--arc", "1.0,0.006135923151542565", "--n-max", "20",
         "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["first_full_cover"] == 10


def test_render_with_loop(tmp_path, capsys):
    config = tmp_path / "grid.json"
    config.write_text(json.dumps({
        "center": [0.0, 0.0], "width": 8.0, "height": 8.0,
        "nx": 101, "ny": 101, "max_iter": 150,
    }))
    code, out, _err = run(
        ["render", "--map", '{"kind": "exp_baker", "params": {"alpha": 0.4}}',
         "--config", str(config), "--loop", "0,0,1.0",
         "--out-dir", str(tmp_path), "--prefix", "fig"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["certificate"]["verdict"] is True
    ppm = (tmp_path / "fig-image.ppm").read_bytes()
    assert ppm.startswith(b"P6\n101 101\n255\n")
    assert len(ppm) == len(b"P6\n101 101\n255\n") + 3 * 101 * 101
    # byte-identical re-render
    code, _out, _err = run(
        ["render", "--map", '{"kind": "exp_baker", "params": {"alpha": 0.4}}',
         "--config", str(config), "--loop", "0,0,1.0",
         "--out-dir", str(tmp_path), "--prefix", "fig2"], capsys)
    assert code == 0
    assert (tmp_path / "fig2-image.ppm").read_bytes() == ppm
    man1 = json.loads((tmp_path / "fig-manifest.json").read_text())
    assert "fig-image.ppm" in man1["outputs"]


def test_validation_rejects_before_compute(tmp_path, capsys):
    code, _out, err = run(
        ["harmonic", "--domain", "annulus", "--method", "wos", "--R", "-1",
         "--walks", "10", "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    code, _out, err = run(
        ["harmonic", "--domain", "annulus", "--method", "wos", "--R", "2",
         "--walks", "0", "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    code, _out, err = run(
        ["circle-stats", "--map", '{"kind": "power", "d": 2}', "--n", "0",
         "--seed", "1", "--out-dir", str(tmp_path)], capsys)
    assert code == 1


def test_render_bad_config_path(tmp_path, capsys):
    code, _out, err = run(
        ["render", "--map", '{"kind": "exp_baker", "params": {"alpha": 0.4}}',
         "--config", str(tmp_path / "missing.json"),
         "--out-dir", str(tmp_path)], capsys)
    assert code == 2
    assert "missing.json" in err
