"""End-to-end command tests: everything goes through main(argv) in process."""

import json

import pytest

from towerlab.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# exit codes


def test_composite_prime_is_config_error(capsys):
    code, _, err = run(["count", "--tower", "fibonacci", "--levels", "0",
                        "--primes", "4"], capsys)
    assert code == 1
    assert "4 is not prime" in err


def test_domain_refusal_is_exit_two(capsys):
    code, _, err = run(["spectra", "cycle", "--n", "2"], capsys)
    assert code == 2
    assert "n >= 3" in err


def test_enumeration_cap_is_exit_three(capsys):
    code, _, err = run(["count", "--tower", "fibonacci", "--levels", "3",
                        "--primes", "31", "--cap-enum", "100"], capsys)
    assert code == 3
    assert "exceeds cap 100" in err


def test_dimension_cap_is_exit_three(capsys):
    code, _, err = run(["spectra", "cycle", "--n", "40", "--cap-dim", "10"],
                       capsys)
    assert code == 3
    assert "matrix dimension 40 exceeds cap 10" in err


def test_map_and_maps_conflict(capsys):
    code, _, err = run(["dynamics", "preimages", "--map", "x^2",
                        "--maps", "x^2,x^3", "--point", "1", "--depth", "1"],
                       capsys)
    assert code == 1
    assert "mutually exclusive" in err


def test_preimages_needs_some_map(capsys):
    code, _, err = run(["dynamics", "preimages", "--point", "1", "--depth", "1"],
                       capsys)
    assert code == 1
    assert "--map or --maps" in err


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("TOWERLAB_THREADS", "zero")
    code, _, err = run(["count", "--tower", "fibonacci", "--levels", "0",
                        "--primes", "5"], capsys)
    assert code == 1
    assert "TOWERLAB_THREADS" in err


def test_help_exits_via_argparse(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])


# ---------------------------------------------------------------------------
# count


COUNT_CSV = """\
# towerlab schema_version=1 kind=counts
level,prime,count,gonality_bound
0,5,6,1
0,7,8,1
1,5,8,2
1,7,8,1
"""


def test_count_csv_golden(capsys):
    code, out, _ = run(["count", "--tower", "fibonacci", "--levels", "0..1",
                        "--primes", "5,7", "--format", "csv"], capsys)
    assert code == 0
    assert out == COUNT_CSV


def test_count_is_deterministic_across_threads(capsys, monkeypatch):
    argv = ["count", "--tower", "fibonacci", "--levels", "0..2",
            "--primes", "3,5,7", "--format", "json"]
    _, serial, _ = run(argv, capsys)
    monkeypatch.setenv("TOWERLAB_THREADS", "4")
    _, threaded, _ = run(argv, capsys)
    assert threaded == serial
    _, again, _ = run(argv, capsys)
    assert again == serial


CHAIN_TABLE = """\
mod-p image chains down to level 0, complete-intersection tower
prime  source_level  image_size  stabilized_at
-----  ------------  ----------  -------------
    7             0           8
    7             1           4
    7             2           2
    7             3           0              3
"""


def test_count_chain_table_golden(capsys):
    code, out, _ = run(["count", "--tower", "fibonacci", "--levels", "0..3",
                        "--primes", "7", "--chain", "--format", "table"],
                       capsys)
    assert code == 0
    assert out == CHAIN_TABLE


def test_count_points_flag_controls_payload(capsys):
    argv = ["count", "--tower", "fibonacci", "--levels", "1", "--primes", "5",
            "--format", "json"]
    _, bare, _ = run(argv, capsys)
    _, full, _ = run(argv + ["--points"], capsys)
    assert "points" not in json.loads(bare)["results"][0]
    pts = json.loads(full)["results"][0]["points"]
    assert len(pts) == 8


# ---------------------------------------------------------------------------
# bounds


def test_bounds_table_shows_provenance_and_notes(capsys):
    code, out, _ = run(["bounds", "--tower", "fibonacci", "--levels", "0..2",
                        "--primes", "7", "--has-point"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "gonality and genus bounds, complete-intersection tower"
    assert "lazarsfeld=4" in out
    assert "canonical-degree=8" in out
    assert "note: level 2: bounds meet" in out
    # level 2 row: degrees 2x2x2, genus 5, gamma in [4, 4]
    level2 = next(line for line in lines if line.lstrip().startswith("2  "))
    for token in ("2x2x2", "5", "4"):
        assert token in level2


FERMAT2_BOUNDS_CSV = """\
# towerlab schema_version=1 kind=bounds
level,degrees,genus,gamma_lower,gamma_upper,frey_max_degree,provenance
0,2,0,1,2,0,planar-power=1 | upper: planar-projection=2
1,4,3,3,4,1,planar-power=3 | upper: planar-projection=4; canonical-degree=4
2,8,21,7,8,3,planar-power=7 | upper: planar-projection=8; canonical-degree=40
3,16,105,15,16,7,planar-power=15 | upper: planar-projection=16; canonical-degree=208
"""


def test_bounds_csv_golden(capsys):
    code, out, _ = run(["bounds", "--tower", "fermat:2", "--levels", "0..3",
                        "--format", "csv"], capsys)
    assert code == 0
    assert out == FERMAT2_BOUNDS_CSV


# ---------------------------------------------------------------------------
# dynamics


def test_periodic_table_golden(capsys):
    code, out, _ = run(["dynamics", "periodic", "--map", "x^2",
                        "--max-period", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "rational periodic points of (X^2)/(Y^2), period <= 3"
    assert lines[3:] == ["0           1", "∞           1", "1           1"]


def test_height_json_golden(capsys):
    code, out, _ = run(["dynamics", "height", "--map", "x^2", "--point", "2",
                        "--format", "json"], capsys)
    assert code == 0
    assert '"canonical_height": 0.69314718056' in out
    data = json.loads(out)
    assert data["kind"] == "canonical-height"
    assert data["point"] == "2"
    assert data["coords"] == [2, 1]


def test_classify_reports_orbit(capsys):
    code, out, _ = run(["dynamics", "classify", "--map", "x^2-1",
                        "--point", "0", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["tag"] == "periodic"
    assert data["period"] == 2
    assert data["orbit_prefix"] == ["0", "-1"]


def test_preimages_json_golden(capsys):
    code, out, _ = run(["dynamics", "preimages", "--maps", "x^2,x^3",
                        "--point", "1", "--depth", "2", "--format", "json"],
                       capsys)
    assert code == 0
    data = json.loads(out)
    assert data["certified"] is True
    assert data["certified_depth"] == 2
    assert data["maps"] == ["(X^2)/(Y^2)", "(X^3)/(Y^3)"]
    first = [child["point"] for child in data["tree"]["preimages"]]
    assert first == ["-1", "1"]
    # the cube map only pulls back each sign to itself
    for child in data["tree"]["preimages"]:
        assert [g["point"] for g in child["preimages"]] == [child["point"]]


# ---------------------------------------------------------------------------
# spectra


CYCLE4_CSV = """\
# towerlab schema_version=1 kind=spectrum
index,eigenvalue
0,0
1,2
2,2
3,4
"""


def test_cycle_spectrum_csv_golden(capsys):
    code, out, _ = run(["spectra", "cycle", "--n", "4", "--format", "csv"],
                       capsys)
    assert code == 0
    assert out == CYCLE4_CSV


SL2_MOD2_CSV = """\
# towerlab schema_version=1 kind=spectrum
index,eigenvalue
0,0
1,1
2,1
3,3
4,3
5,4
"""


def test_cayley_sl2_csv_golden(capsys):
    code, out, _ = run(["spectra", "cayley-sl2", "--modulus", "2",
                        "--format", "csv"], capsys)
    assert code == 0
    assert out == SL2_MOD2_CSV


def test_schreier_command(capsys):
    code, out, _ = run(["spectra", "schreier", "--perms", "1,0,2;1,2,0",
                        "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["n_vertices"] == 3
    assert data["eigenvalues"] == [0.0, 3.0, 5.0]


def test_trend_verdict_decreasing(capsys):
    code, out, _ = run(["spectra", "trend", "--family", "cycle",
                        "--sizes", "8,16,32", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "decreasing"
    assert data["volumes"] == [8, 16, 32]
    values = data["lambda1_times_volume"]
    assert values == sorted(values, reverse=True)


DSC_CSV = """\
# towerlab schema_version=1 kind=dsc-check
group,n_vertices,s_count,diameter,lambda1,bound,holds
zmod:16,16,2,8,0.152240934977,0.0078125,true
"""


def test_dsc_csv_golden(capsys):
    code, out, _ = run(["spectra", "dsc", "--group", "zmod:16",
                        "--format", "csv"], capsys)
    assert code == 0
    assert out == DSC_CSV


# ---------------------------------------------------------------------------
# output plumbing


def test_out_writes_file_and_keeps_stdout_quiet(capsys, tmp_path):
    target = tmp_path / "report.csv"
    code, out, _ = run(["count", "--tower", "fibonacci", "--levels", "0..1",
                        "--primes", "5,7", "--format", "csv",
                        "--out", str(target)], capsys)
    assert code == 0
    assert out == ""
    assert target.read_text(encoding="utf-8") == COUNT_CSV


def test_figures_renders_png(capsys, tmp_path):
    figdir = tmp_path / "figs"
    code, out, err = run(["count", "--tower", "fibonacci", "--levels", "0..1",
                          "--primes", "5,7", "--format", "csv",
                          "--figures", str(figdir)], capsys)
    assert code == 0
    assert out == COUNT_CSV
    png = figdir / "counts.png"
    assert png.exists() and png.stat().st_size > 0
    assert f"wrote {png}" in err


def test_figures_for_trend(capsys, tmp_path):
    figdir = tmp_path / "figs"
    code, _, err = run(["spectra", "trend", "--family", "cycle",
                        "--sizes", "8,16", "--figures", str(figdir)], capsys)
    assert code == 0
    assert (figdir / "trend.png").exists()
    assert "wrote" in err
