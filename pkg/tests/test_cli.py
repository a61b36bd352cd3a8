import json

import numpy as np
import pytest

from ssimopt import cli, corpus
from ssimopt.core import read_pgm, write_pgm


@pytest.fixture
def small_pgm(tmp_path):
    path = tmp_path / "in.pgm"
    write_pgm(path, corpus.load("portrait")[40:72, 40:72])
    return str(path)


def _records(out):
    with open(out / "results.jsonl") as fh:
        return [json.loads(line) for line in fh]


def test_metrics_identity(tmp_path, capsys):
    out = tmp_path / "o"
    code = cli.main(["metrics", "--input", "corpus:portrait", "--reference", "corpus:portrait",
                     "--output-dir", str(out)], environ={})
    assert code == cli.EXIT_OK
    rec = _records(out)[0]
    assert rec["mssim"] == 1.0 and rec["psnr"] == "inf"
    assert (out / "metrics_map.pgm").exists()
    assert json.loads(capsys.readouterr().out)["mssim"] == 1.0


def test_denoise_run_is_deterministic(tmp_path, small_pgm):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = ["denoise", "--input", small_pgm, "--output-dir", str(out), "--lambda", "0.001",
                "--seed", "7", "--max-iters", "50"]
        assert cli.main(args, environ={}) == 0
        outs.append(out)
    for f in ("denoise_ssim.pgm", "denoise_ssim_map.pgm", "denoise_ssim_trace.csv"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    r0, r1 = _records(outs[0])[0], _records(outs[1])[0]
    r0.pop("runtime"), r1.pop("runtime")
    assert r0 == r1


def test_approx_outputs(tmp_path, small_pgm):
    out = tmp_path / "o"
    assert cli.main(["approx", "--input", small_pgm, "--target-l0", "9", "--method", "l2",
                     "--output-dir", str(out)], environ={}) == 0
    rec = _records(out)[0]
    assert rec["l0"] == 9.0 and rec["lambda"] == "per-block"
    img = read_pgm(out / "approx_l2.pgm")
    assert img.shape == (32, 32)


def test_sweep_csv(tmp_path, small_pgm):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--input", small_pgm, "--task", "approx", "--targets", "3,9,18",
                     "--output-dir", str(out)], environ={}) == 0
    lines = (out / "sweep_approx.csv").read_text().splitlines()
    assert lines[0] == "target,mssim_ssim,mssim_l2,error"
    assert [l.split(",")[0] for l in lines[1:]] == ["3", "9", "18"]


def test_config_and_precedence(tmp_path, small_pgm):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\ninput = {small_pgm}\nmethod = l2\nblock-size = 4\n"
                   f"output_dir = {tmp_path / 'from_cfg'}\n")
    args = cli.build_parser().parse_args(["approx", "--config", str(cfg), "--method", "ssim"])
    r = cli.resolve(args, environ={})
    assert r["method"] == "ssim"  # flag beats config
    assert r["block_size"] == 4 and r["input"] == small_pgm
    assert r["output_dir"] == str(tmp_path / "from_cfg")
    r = cli.resolve(args, environ={"SSIMOPT_OUTPUT_DIR": "envdir"})
    assert r["output_dir"] == "envdir"  # environment beats config
    args = cli.build_parser().parse_args(["approx", "--config", str(cfg), "--output-dir", "flag"])
    assert cli.resolve(args, environ={"SSIMOPT_OUTPUT_DIR": "envdir"})["output_dir"] == "flag"
    assert cli.read_config(cfg)["block_size"] == 4


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config(bad)
    bad.write_text("seed = many\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config(bad)
    bad.write_text("just words\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config(bad)


@pytest.mark.parametrize("argv", [
    ["denoise", "--input", "corpus:portrait", "--method", "l1"],
    ["denoise"],
    ["metrics", "--input", "corpus:portrait"],
    ["bogus"],
    ["denoise", "--input", "corpus:nope"],
    ["zoom", "--input", "corpus:portrait", "--factor", "1"],
])
def test_config_exit_code(tmp_path, argv):
    assert cli.main(argv + ["--output-dir", str(tmp_path)], environ={}) == cli.EXIT_CONFIG


def test_io_exit_code(tmp_path):
    assert cli.main(["denoise", "--input", str(tmp_path / "missing.pgm"),
                     "--output-dir", str(tmp_path)], environ={}) == cli.EXIT_IO
    junk = tmp_path / "junk.pgm"
    junk.write_bytes(b"not an image")
    assert cli.main(["denoise", "--input", str(junk), "--output-dir", str(tmp_path)],
                    environ={}) == cli.EXIT_IO


def test_solver_exit_code(tmp_path, small_pgm, monkeypatch):
    from ssimopt import apps
    from ssimopt.report import SolverError

    def fail(*a, **k):
        raise SolverError("no convergence")

    monkeypatch.setattr(apps, "run_task", fail)
    assert cli.main(["denoise", "--input", small_pgm, "--output-dir", str(tmp_path)],
                    environ={}) == cli.EXIT_SOLVER


def test_results_append(tmp_path, small_pgm):
    out = tmp_path / "o"
    for _ in range(2):
        cli.main(["metrics", "--input", small_pgm, "--reference", small_pgm,
                  "--output-dir", str(out)], environ={})
    assert len(_records(out)) == 2


def test_plain_json():
    assert cli._plain({"a": [np.float64(1.5), float("nan")]}) == {"a": [1.5, "nan"]}
