import json
import subprocess
import sys

import pytest

from isolines.cli import main, parse_args, read_config


@pytest.fixture(scope="module")
def sample_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--family", "logistic", "--param", "0.5", "--margins", "gumbel",
                 "--n", "3000", "--seed", "7", "--out-dir", str(d)]) == 0
    return d / "sample.csv"


def test_simulate_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--family", "indep", "--n", "1000", "--seed", "7",
                     "--out", str(tmp_path / name / "s.csv")]) == 0
    assert (tmp_path / "a/s.csv").read_bytes() == (tmp_path / "b/s.csv").read_bytes()
    man = json.loads((tmp_path / "a/manifest.json").read_text())
    assert man["seed"] == 7 and man["command"] == "simulate"
    assert {"numpy", "scipy", "python"} <= set(man["versions"])


def test_simulate_records_drawn_seed(tmp_path):
    assert main(["simulate", "--n", "50", "--out-dir", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert isinstance(man["seed"], int)


def test_isolines_and_rerun_from_manifest(sample_csv, tmp_path):
    out = tmp_path / "run"
    argv = ["isolines", "-i", str(sample_csv), "--grid", "120", "--p", "0.001,0.0001",
            "--out-dir", str(out), "--svg"]
    assert main(argv) == 0
    for f in ("isolines.csv", "marginals.json", "manifest.json", "isolines.svg"):
        assert (out / f).is_file()
    rows = (out / "isolines.csv").read_text().splitlines()
    assert rows[0] == "level,scale,x,y,provenance"
    assert {r.split(",")[0] for r in rows[1:]} == {"0.01", "0.001", "0.0001"}
    again = tmp_path / "again"
    assert main(["isolines", "--config", str(out / "manifest.json"), "--out-dir", str(again)]) == 0
    assert (again / "isolines.csv").read_bytes() == (out / "isolines.csv").read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# archived run\nmode = ai\nbeta = 100\nq-thold = 0.96\np = 0.001, 0.0005\nsvg = yes\n")
    args = parse_args(["isolines", "--config", str(cfg), "--beta", "50"])
    assert args.mode == "ai" and args.beta == 50.0 and args.q_thold == 0.96
    assert args.p == (0.001, 0.0005) and args.svg is True
    assert read_config(cfg)["q_thold"] == "0.96"


@pytest.mark.parametrize("argv,code,status", [
    (["isolines", "-i", "does-not-exist.csv"], "ingest.missing_file", 1),
    (["isolines", "--pbase", "2"], "cli.usage", 2),
    (["nonsense"], "cli.usage", 2),
    (["isolines"], "cli.missing_input", 1),
    (["simulate", "--family", "clayton"], "synth.bad_family", 1),
])
def test_errors_single_line(argv, code, status, capsys, tmp_path):
    assert main([*argv, "--out-dir", str(tmp_path)] if argv[0] != "nonsense" else argv) == status
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert err[0].startswith(f"error[{code}]: ")


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["chi", "--config", str(cfg)]) == 1
    assert capsys.readouterr().err.startswith("error[cli.unknown_key]")
    cfg.write_text("just words\n")
    assert main(["chi", "--config", str(cfg)]) == 1


def test_other_subcommands(sample_csv, tmp_path):
    d = tmp_path
    assert main(["fit-marginals", "-i", str(sample_csv), "--frechet", "--out-dir", str(d / "m")]) == 0
    margins = d / "m" / "marginals.json"
    assert len(json.loads(margins.read_text())["margins"]) == 2
    assert main(["chi", "-i", str(sample_csv), "--out-dir", str(d / "c"), "--svg"]) == 0
    assert (d / "c" / "chi.csv").read_text().startswith("u,chi,joint_count,marginal_count")
    assert main(["hill", "-i", str(sample_csv), "--marginals", str(margins), "--out-dir", str(d / "h")]) == 0
    man = json.loads((d / "h" / "manifest.json").read_text())
    assert 0.5 < man["eta_hat"] < 1.2 and "sha256" in man["inputs"]["marginals"]
    assert main(["isolines", "-i", str(sample_csv), "--grid", "100", "--out-dir", str(d / "i")]) == 0
    assert main(["diagnose", "-i", str(sample_csv), "--isolines", str(d / "i" / "isolines.csv"),
                 "--level", "0.01", "--out-dir", str(d / "d"), "--svg"]) == 0
    assert (d / "d" / "diagnostic.svg").is_file()
    assert main(["diagnose", "-i", str(sample_csv), "--isolines", str(d / "i" / "isolines.csv"),
                 "--level", "0.02", "--out-dir", str(d / "d2")]) == 1


def test_bootstrap_threads_identical(sample_csv, tmp_path):
    base = ["bootstrap", "-i", str(sample_csv), "--grid", "60", "--reps", "6", "--block", "3", "--seed", "9"]
    assert main([*base, "--threads", "1", "--out-dir", str(tmp_path / "a")]) == 0
    assert main([*base, "--threads", "3", "--out-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a/bootstrap.csv").read_bytes() == (tmp_path / "b/bootstrap.csv").read_bytes()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "isolines.cli", "simulate", "--n", "10", "--seed", "1",
                        "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "sample.csv").read_text().startswith("t,x1,x2")
