import json
import time

import numpy as np
import pytest

from pdregion.casestudy import reproduce, write_system_files
from pdregion.cli import main
from pdregion.plotting import band_bundle, nichols_bundle, numerical_range_bundle, nyquist_bundle, render, to_svg
from pdregion.bands import pd_band


@pytest.fixture(scope="module")
def sysdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("systems")
    write_system_files(d)
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_examples(capsys, sysdir):
    code, out, _ = run(capsys, "check", sysdir / "g3.json", "--sigma", "0.3333333", "--freq", "5", "--mode", "siso")
    assert code == 0 and json.loads(out)["holds"] is True
    code, out, _ = run(capsys, "check", sysdir / "g2.json", "--sigma", "0", "--freq", "1")
    assert code == 1 and json.loads(out)["holds"] is False
    code, out, _ = run(capsys, "check", sysdir / "g4.json", "--sigma-matrix", "[[0.333,0],[0,0.333]]",
                       "--freq", "5.0119", "--mode", "mimo-estimated")
    assert code == 1


def test_check_error_exit_code(capsys, sysdir, tmp_path):
    code, _, err = run(capsys, "check", sysdir / "g2.json", "--sigma", "0", "--freq", "0")
    assert code == 2 and "error" in json.loads(err)
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "siso", "entries": [["1/(s+"]]}')
    code, _, err = run(capsys, "check", bad, "--sigma", "0", "--freq", "1")
    assert code == 2


def test_band_grid_point_table(capsys, sysdir):
    code, out, _ = run(capsys, "band", sysdir / "g3.json", "--sigma-list", "-0.5,-0.2,0,0.2,0.5", "--ppd", "100",
                       "--report-grid-point")
    assert code == 0
    for v in ("13.1826", "10.9648", "9.3325", "7.0795", "0.0000"):
        assert v in out


def test_passivize_and_waterbed(capsys, sysdir):
    code, out, _ = run(capsys, "passivize", sysdir / "g1.json", "--sigma", "0.3333333")
    assert code == 0 and json.loads(out)["verdict"] == "passive"
    code, out, _ = run(capsys, "passivize", sysdir / "g1.json", "--sigma", "1")
    assert code == 1
    code, out, _ = run(capsys, "waterbed", sysdir / "g1.json", "--a", "1")
    d = json.loads(out)
    assert code == 0 and d["lhs"] == pytest.approx(0.5) and d["rhs_quadrature"] == pytest.approx(0.5, abs=1e-6)


def test_robust_and_range(capsys, sysdir):
    code, out, _ = run(capsys, "robust", sysdir / "g1.json", "--sigma", "0.3333333", "--w-max", "10")
    assert code == 0 and json.loads(out)["d_min"] > 0
    code, out, _ = run(capsys, "range", sysdir / "g4.json", "--sigma-matrix", "[[0.3333333,0],[0,0.3333333]]",
                       "--freq", str(10 ** 0.3))
    assert code == 0


@pytest.mark.parametrize("kind", ["nyquist", "nichols", "range", "band", "generalized"])
@pytest.mark.parametrize("fmt", ["csv", "json", "svg"])
def test_plot_deterministic(capsys, sysdir, tmp_path, kind, fmt):
    name = "g4.json" if kind == "range" else "g3.json"
    extra = ["--sigma-list", "0,0.2"] if kind == "band" else ["--sigma", "0.1"]
    if kind == "range":
        extra = ["--sigma-matrix", "[[0.3333333,0],[0,0.3333333]]"]
    outs = []
    for k in range(2):
        p = tmp_path / f"{kind}{k}.{fmt}"
        code, _, err = run(capsys, "plot", sysdir / name, "--kind", kind, "--format", fmt, "--ppd", "20",
                           "--out", p, *extra)
        assert code == 0, err
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] and outs[0]
    if fmt == "csv":
        assert outs[0].splitlines()[0] == b"name,w,re,im,extra"
    if fmt == "svg":
        assert outs[0].startswith(b"<?xml") and b"</svg>" in outs[0]


def test_svg_emitter_handles_regions(G1, G3):
    b = nyquist_bundle({"G1": G1, "G3": G3}, 1 / 3)
    s1, s2 = to_svg(b), to_svg(b)
    assert s1 == s2 and "<ellipse" in s1
    assert "<polyline" in render(nichols_bundle({"G1": G1}, 0.1), "svg")


def test_bundles_content(G3, G4):
    b = band_bundle({0.2: pd_band(G3, 0.2)})
    assert len(b.curves) == 1
    nr = numerical_range_bundle(G4, np.eye(2) / 3, log_w=[0.0, 0.7], n_angles=32)
    assert len(nr.curves) == 2 and nr.regions[0].kind == "of_disk"
    with pytest.raises(ValueError):
        render(b, "png")


def test_cli_json_is_byte_stable(capsys, sysdir):
    outs = [run(capsys, "band", sysdir / "g3.json", "--sigma", "0.2")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_reproduce_under_a_minute(tmp_path):
    t0 = time.perf_counter()
    s = reproduce(tmp_path)
    assert time.perf_counter() - t0 < 60
    assert (tmp_path / "summary.json").exists() and (tmp_path / "summary.md").exists()
    assert s["G1_passivity"] == {"0.333333": "passive", "0.5": "inconclusive", "1.0": "not_passive"}
    assert [r["reported"] for r in s["critical_frequencies_G3"]][-1] == 0.0


def test_reproduce_flag(capsys, tmp_path):
    code, out, err = run(capsys, "--reproduce-paper", "--out", tmp_path)
    assert code == 0, err
    assert (tmp_path / "nyquist_sigma_one_third.svg").exists()
