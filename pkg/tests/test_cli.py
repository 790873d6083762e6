import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from circcoords import cli
from circcoords.datasets import generate_figure8_2d, load_matrix, save_point_cloud
from circcoords.errors import ObstructionError, ParameterError
from circcoords.pipeline import (PipelineConfig, config_from_manifest, lam_tag, read_config,
                                 rerun_manifest, run_pipeline, stage_seed)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_config_defaults():
    cfg = PipelineConfig()
    assert cfg.prime == 23 and cfg.max_scale is None and cfg.tau == 1.0 and cfg.top_k is None
    assert cfg.lambdas == (0.0, 0.5, 1.0) and cfg.constant_eps == 1e-4
    assert cfg.learning_rate == 1e-4 and cfg.steps == 1000 and cfg.scale_fraction == 1.0


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("source = dupin  # pinched torus\nn = 40\nlambdas = 0, 1\nmax_scale = 2.5\ntop_k = 2\n")
    cfg = read_config(p)
    assert cfg.source == "dupin" and cfg.n == 40 and cfg.lambdas == (0.0, 1.0)
    assert cfg.max_scale == 2.5 and cfg.top_k == 2
    assert cfg.updated(n="12").n == 12
    with pytest.raises(ParameterError, match="bogus"):
        cfg.updated(bogus="1")
    with pytest.raises(ParameterError):
        cfg.updated(lambdas="0,1.5")
    with pytest.raises(FileNotFoundError):
        read_config(tmp_path / "none.cfg")


def test_stage_seeds():
    assert stage_seed(7, "generate") == stage_seed(7, "generate")
    assert stage_seed(7, "generate") != stage_seed(8, "generate")
    assert stage_seed(7, "generate") != stage_seed(7, "smooth/0/0")
    assert 0 <= stage_seed(0, "x") < 2**64


def test_ring_config_layout(tmp_path):
    cfg = read_config(CONFIGS / "ring.cfg").updated(n="150")
    manifest = run_pipeline(cfg, tmp_path)
    svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
    assert len(svgs) == 6
    for lam in cfg.lambdas:
        assert f"scatter_c0_lam{lam_tag(lam)}.svg" in svgs
        assert f"correlation_c0_lam{lam_tag(lam)}.svg" in svgs
        header, rows = read_rows(tmp_path / f"coords_lam{lam_tag(lam)}.csv")
        assert header == ["point_index", "theta_0", "combined"] and len(rows) == 150
        header, _ = read_rows(tmp_path / f"edges_c0_lam{lam_tag(lam)}.csv")
        assert header == ["u", "v", "value", "alpha_bar", "constant_flag"]
        res = json.loads((tmp_path / f"smoothing_c0_lam{lam_tag(lam)}.json").read_text())
        assert set(res) >= {"lambda", "f", "alpha_bar", "objective_final"}
    header, rows = read_rows(tmp_path / "barcode.csv")
    assert header == ["dim", "birth", "death", "cocycle_id"]
    assert any(r[2] == "inf" for r in rows)
    report = json.loads((tmp_path / "report.json").read_text())
    counts = [s["constant_edges"] for s in report["smoothing"]]
    assert counts[0] >= counts[1] >= counts[2]
    assert set(manifest["outputs"]) == {p.name for p in tmp_path.iterdir()} - {"manifest.json"}


def test_figure8_cross_pattern(tmp_path):
    cfg = PipelineConfig(source="figure8_2d", n=50, tau=1.0, lambdas=(1.0,), plots=("coordinate",))
    run_pipeline(cfg, tmp_path)
    header, rows = read_rows(tmp_path / "coords_lam1.csv")
    theta = np.array(rows, dtype=float)[:, 1:3]
    pts = load_matrix(tmp_path / "points.csv").points
    # on each circle one coordinate is nearly constant (mean resultant length near 1)
    # and the other winds around: a vertical and a horizontal band
    held = []
    for side in (pts[:, 0] < -1e-9, pts[:, 0] > 1e-9):
        R = np.abs(np.exp(2j * np.pi * theta[side]).mean(axis=0))
        assert R.max() > 0.98 and R.min() < 0.3
        held.append(int(np.argmax(R)))
    assert held[0] != held[1]
    assert (tmp_path / "coordinate_lam1.svg").exists()


def test_missing_input_names_path(tmp_path, capsys):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text(f"source = file\ninput_path = {tmp_path / 'absent.csv'}\n")
    code, _, err = run(capsys, "--json", "pipeline", cfgfile, "--out-dir", tmp_path / "o")
    assert code != 0
    assert "absent.csv" in json.loads(err)["message"]


def test_manifest_rerun(tmp_path, capsys):
    cfg = PipelineConfig(source="double_ring", n=60, seed=3, top_k=2, tau=None, steps=200,
                         plots=("scatter", "barcode", "coordinate", "density"))
    run_pipeline(cfg, tmp_path / "a")
    same, diff = rerun_manifest(tmp_path / "a" / "manifest.json", tmp_path / "b")
    assert same and diff == {}
    assert config_from_manifest(tmp_path / "a" / "manifest.json") == cfg
    code, out, _ = run(capsys, "pipeline", "--manifest", tmp_path / "a" / "manifest.json", "--out-dir", tmp_path / "c")
    assert code == 0 and "reproduces" in out


def test_tampered_manifest_fails(tmp_path, capsys):
    run_pipeline(PipelineConfig(source="figure8_2d", n=20, tau=0.5, steps=10), tmp_path / "a")
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    m["outputs"]["points.csv"] = "0" * 64
    (tmp_path / "a" / "manifest.json").write_text(json.dumps(m))
    code, _, err = run(capsys, "--json", "pipeline", "--manifest", tmp_path / "a" / "manifest.json",
                       "--out-dir", tmp_path / "b")
    assert code == 1 and "points.csv" in json.loads(err)["message"]


def test_generate(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CIRCCOORDS_OUT", str(tmp_path))
    code, out, _ = run(capsys, "generate", "ring", "--R", 1.5, "--w", 1.5, "--n", 300, "--seed", 7)
    assert code == 0 and "300 points in R^2" in out
    assert load_matrix(tmp_path / "ring.csv").points.shape == (300, 2)
    code, _, _ = run(capsys, "generate", "figure8", "--n", 50)
    assert code == 0 and load_matrix(tmp_path / "figure8_2d.csv").points.shape == (50, 2)
    code, _, err = run(capsys, "--json", "generate", "ring", "--n", 0)
    assert code != 0 and json.loads(err)["error"] == "ParameterError"


def test_persistence_cmd(tmp_path, capsys):
    src = tmp_path / "f8.csv"
    save_point_cloud(src, generate_figure8_2d(50))
    code, _, _ = run(capsys, "persistence", src, "--out-dir", tmp_path / "p")
    assert code == 0
    _, rows = read_rows(tmp_path / "p" / "barcode.csv")
    h1 = sorted((float(r[2]) - float(r[1]) for r in rows if r[0] == "1"), reverse=True) + [0, 0, 0]
    assert h1[1] > 3 * h1[2]
    cocycles = json.loads((tmp_path / "p" / "cocycles.json").read_text())
    assert {"id", "scale", "entries"} <= set(cocycles[0])
    code, _, _ = run(capsys, "persistence", src, "--max-scale", 0.01, "--out-dir", tmp_path / "q")
    _, rows = read_rows(tmp_path / "q" / "barcode.csv")
    assert code == 0 and rows and all(r[0] == "0" for r in rows)
    code, _, err = run(capsys, "--json", "persistence", src, "--prime", 21, "--out-dir", tmp_path / "r")
    assert code != 0 and "prime" in json.loads(err)["message"]


def test_coords_cmd(tmp_path, capsys):
    src = tmp_path / "ring.csv"
    run(capsys, "generate", "ring", "--n", 120, "--seed", 7, "-o", src)
    code, out, _ = run(capsys, "coords", src, "--out-dir", tmp_path / "c")
    assert code == 0
    for lam in ("0", "0.5", "1"):
        assert (tmp_path / "c" / f"coords_lam{lam}.csv").exists()
        assert (tmp_path / "c" / f"trace_c0_lam{lam}.csv").exists()
    code, _, err = run(capsys, "--json", "coords", src, "--tau", 100, "--out-dir", tmp_path / "d")
    assert code != 0
    payload = json.loads(err)
    assert payload["error"] == "ObstructionError" and "no significant 1-cocycle" in payload["message"]
    code, _, err = run(capsys, "--json", "coords", src, "--lambdas", "0,2", "--out-dir", tmp_path / "e")
    assert code == 2 and json.loads(err)["error"] == "ParameterError"


def test_plot_cmd(tmp_path, capsys):
    src = tmp_path / "f8.csv"
    save_point_cloud(src, generate_figure8_2d(40))
    out = tmp_path / "c"
    assert run(capsys, "coords", src, "--lambdas", "1", "--tau", 0.5, "--out-dir", out)[0] == 0
    coords = out / "coords_lam1.csv"
    calls = {
        "colored_scatter": ["--points", src, "--coords", coords, "--edges", out / "edges_c0_lam1.csv"],
        "correlation": ["--points", src, "--coords", coords, "--center", -1, 0],
        "coordinate_plot": ["--coords", coords],
        "barcode": ["--barcode", out / "barcode.csv"],
        "density": ["--coords", coords],
    }
    for kind, extra in calls.items():
        code, _, err = run(capsys, "plot", kind, *extra, "--out-dir", out)
        assert code == 0, err
        assert (out / f"plot_{kind}.svg").exists() and (out / f"plot_{kind}.csv").exists()
    code, _, err = run(capsys, "plot", "pie", "--out-dir", out)
    assert code != 0 and "colored_scatter" in err and "density" in err


def test_corank_cmd(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(25, 4))
    np.savetxt(tmp_path / "x.csv", X, delimiter=",")
    code, out, _ = run(capsys, "corank", tmp_path / "x.csv", tmp_path / "x.csv", "--out-dir", tmp_path / "o")
    assert code == 0
    Q = np.loadtxt(tmp_path / "o" / "coranking.csv", delimiter=",")
    np.testing.assert_array_equal(Q, 25 * np.eye(24))
    assert json.loads(out)["diagonal_fraction"] == 1.0
    np.savetxt(tmp_path / "short.csv", X[:20], delimiter=",")
    code, _, err = run(capsys, "--json", "corank", tmp_path / "x.csv", tmp_path / "short.csv", "--out-dir", tmp_path / "o")
    assert code != 0 and "20" in json.loads(err)["message"]


def test_corank_voting_stand_in(tmp_path, capsys):
    # two parties voting on 40 bills with abstentions, against a torus embedding of made-up coords
    rng = np.random.default_rng(3)
    party = np.repeat([0, 1], 30)
    base = np.where(rng.random((2, 40)) < 0.5, "y", "n")
    votes = base[party].copy()
    flip = rng.random(votes.shape) < 0.1
    votes[flip] = np.where(votes[flip] == "y", "n", "y")
    votes[rng.random(votes.shape) < 0.05] = "?"
    with open(tmp_path / "votes.csv", "w") as fh:
        for i, row in enumerate(votes):
            fh.write(",".join(["rep%d" % i] + list(row)) + "\n")
    theta = np.mod(party * 0.5 + rng.normal(0, 0.05, 60), 1)
    with open(tmp_path / "coords.csv", "w") as fh:
        fh.write("point_index,theta_0,combined\n")
        for i, t in enumerate(theta):
            fh.write(f"{i},{float(t)!r},{float(t)!r}\n")
    np.savetxt(tmp_path / "labels.csv", party, fmt="%d")
    votes_numeric = tmp_path / "votes_numeric.csv"
    vm = {"y": 1.0, "n": -1.0, "?": 0.0}
    save_point_cloud(votes_numeric, load_matrix(tmp_path / "votes.csv", 1, vm))
    code, out, err = run(capsys, "corank", votes_numeric, "--coords", tmp_path / "coords.csv",
                         "--labels", tmp_path / "labels.csv", "--out-dir", tmp_path / "o")
    assert code == 0, err
    report = json.loads((tmp_path / "o" / "corank_report.json").read_text())
    assert report["n"] == 60 and 0.5 < report["block_sharpness"] <= 1.0


def test_env_default_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CIRCCOORDS_OUT", str(tmp_path / "envout"))
    code, _, _ = run(capsys, "generate", "two_circles", "--n", 20)
    assert code == 0 and (tmp_path / "envout" / "two_circles_3d.csv").exists()
