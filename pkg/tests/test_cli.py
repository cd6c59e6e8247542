import subprocess
import sys

import pytest

from nwpleak import model_file
from nwpleak.cli import main
from nwpleak.corpus import synthetic_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["make-corpus", "-n", "500", "--out-dir", str(d), "--seed", "2"]) == 0
    assert main(["build-vocab", "--corpus", str(d / "corpus.txt"), "--size", "300", "--out-dir", str(d)]) == 0
    assert main(["pretrain", "--corpus", str(d / "corpus.txt"), "--vocab", str(d / "vocab.txt"),
                 "--epochs", "1", "--dim", "8", "--hidden", "8", "--out-dir", str(d)]) == 0
    (d / "client.txt").write_text("\n".join(synthetic_corpus(8, 99)) + "\n")
    return d


def test_pipeline_files(workdir):
    assert model_file.load(workdir / "theta0.nwpm").dims.D == 8
    assert (workdir / "vocab.txt").read_text().splitlines()[:2] == ["<S>", "<UNK>"]


def test_client_update_and_attack_smoke(workdir, capsys):
    d = str(workdir)
    assert main(["client-update", "--model", f"{d}/theta0.nwpm", "--vocab", f"{d}/vocab.txt",
                 "--data", f"{d}/client.txt", "-E", "3", "-B", "4", "--lr", "0.05", "--out-dir", d]) == 0
    capsys.readouterr()
    code = main(["attack", "--theta0", f"{d}/theta0.nwpm", "--theta1", f"{d}/theta1.nwpm",
                 "--vocab", f"{d}/vocab.txt", "--threshold", "auto", "--scale", "9", "--max-len", "4",
                 "--top", "3", "--out-dir", d])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("recovered ")
    lines = (workdir / "reconstruction.txt").read_text().splitlines()
    assert len(lines) == 3 and all(len(ln.split()) == 4 for ln in lines)


def test_evaluate_identity(workdir, capsys):
    f = str(workdir / "client.txt")
    assert main(["evaluate", "--reconstruction", f, "--truth", f]) == 0
    out = capsys.readouterr().out
    assert "mean_lev_ratio 100.0000" in out and "f1 1.0000" in out


def test_malformed_config_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text('corpus = "x"\nn_k = [16, sixteen]\n')
    assert main(["experiment", "--config", str(bad)]) != 0
    assert "'n_k'" in capsys.readouterr().err
    bad.write_text('corpus = "x"\ntrials = 0\n')
    assert main(["--config", str(bad), "build-vocab", "--corpus", "x"]) != 0
    assert "'trials'" in capsys.readouterr().err


def test_missing_input_file_is_reported(tmp_path, capsys):
    assert main(["build-vocab", "--corpus", str(tmp_path / "nope.txt"), "--out-dir", str(tmp_path)]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_experiment_from_config(tmp_path, capsys):
    cfg = tmp_path / "smoke.cfg"
    cfg.write_text("corpus = synthetic:400\nvocab_size = 200\ndim = 6\nhidden = 8\n"
                   "pretrain_epochs = 0\nn_k = [8]\nE = [1]\ntrials = 1\n")
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / "r"), "--seed", "3"]) == 0
    text = (tmp_path / "r" / "results.csv").read_text().splitlines()
    assert len(text) == 2 and text[0].startswith("run_id,n_k,E,B,")


def test_global_flags_after_subcommand_and_config_defaults(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("corpus = synthetic:50\nvocab_size = 12\n")
    assert main(["build-vocab", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "vocab.txt").read_text().splitlines()) == 12


def test_console_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "nwpleak.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("build-vocab", "pretrain", "client-update", "attack", "evaluate", "experiment"):
        assert sub in res.stdout
