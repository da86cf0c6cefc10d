"""End-to-end training behavior, including the overfit contract.

The toy dataset lives in dataset.jsonl form and the predictions go back
out as predictions.jsonl, so the corpus toolkit's scorer can consume
them over the command line; nothing here imports from that package.
"""

import hashlib
import json
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from seqlab_harness import TrainSpec, predict, read_dataset, train
from seqlab_harness.cli import main as cli_main


@contextmanager
def criterion(name):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL ({time.perf_counter() - t0:.2f}s)")
        raise
    print(f"[acceptance] {name}: PASS ({time.perf_counter() - t0:.2f}s)")


def _sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_acceptance_overfit_toy_dataset(toy_data, base_checkpoint, f1_of,
                                        tmp_path):
    """20 toy sentences reach token F1 >= 0.9 in 10 epochs at lr 1e-5,
    the external scorer accepts the predictions, and the whole run
    stays under five minutes of CPU."""
    with criterion("harness overfit on 20-sentence toy dataset"):
        t0 = time.perf_counter()
        spec = TrainSpec()
        assert spec.epochs == 10
        assert spec.learning_rate == 1e-5

        ckpt = tmp_path / "classifier.pt"
        stats = train(toy_data, ckpt, spec=spec,
                      base_path=base_checkpoint["path"])
        assert stats["sequences"] == 20
        assert stats["epochs"] == 10

        pred_path = tmp_path / "predictions.jsonl"
        predict(ckpt, toy_data, pred_path)
        score = f1_of(pred_path, toy_data)
        assert score >= 0.9, f"token F1 {score:.3f} < 0.9"

        proc = subprocess.run(
            [sys.executable, "-m", "laughkit", "eval-tokens",
             "--pred", str(pred_path), "--gold", str(toy_data)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert proc.stderr == ""
        summary = json.loads(proc.stdout.strip().splitlines()[-1])
        assert abs(summary["f1"] - score) < 1e-9

        elapsed = time.perf_counter() - t0 + base_checkpoint["seconds"]
        assert elapsed < 300.0, f"took {elapsed:.1f}s"


def test_untrained_model_is_chance_level(toy_data, base_checkpoint, f1_of,
                                         tmp_path):
    ckpt = tmp_path / "untrained.pt"
    train(toy_data, ckpt, spec=TrainSpec(epochs=0),
          base_path=base_checkpoint["path"])
    pred_path = tmp_path / "predictions.jsonl"
    predict(ckpt, toy_data, pred_path)
    sequences = read_dataset(pred_path)
    assert [s.video_id for s in sequences] == [f"v{i:02d}" for i in range(20)]
    assert f1_of(pred_path, toy_data) < 0.6


def test_training_from_scratch_also_overfits(toy_data, f1_of, tmp_path):
    ckpt = tmp_path / "scratch.pt"
    train(toy_data, ckpt, spec=TrainSpec())
    pred_path = tmp_path / "predictions.jsonl"
    predict(ckpt, toy_data, pred_path)
    assert f1_of(pred_path, toy_data) >= 0.9


def test_same_seed_reproduces_bytes(toy_data, base_checkpoint, tmp_path):
    losses = []
    shas = []
    for run in ("a", "b"):
        ckpt = tmp_path / f"{run}.pt"
        stats = train(toy_data, ckpt, spec=TrainSpec(seed=0),
                      base_path=base_checkpoint["path"])
        losses.append(stats["final_loss"])
        pred_path = tmp_path / f"{run}.jsonl"
        predict(ckpt, toy_data, pred_path)
        shas.append(_sha(pred_path))
    assert losses[0] == losses[1]
    assert shas[0] == shas[1]


def test_cli_round_trip(toy_data, tmp_path, capsys):
    base = tmp_path / "base.pt"
    assert cli_main(["pretrain", "--out", str(base), "--steps", "20",
                     "--sentences", "70", "--quiet"]) == 0
    ckpt = tmp_path / "clf.pt"
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps({"epochs": 3, "seed": 4}))
    assert cli_main(["train", "--data", str(toy_data), "--out", str(ckpt),
                     "--base", str(base), "--spec", str(spec_file),
                     "--epochs", "1", "--quiet"]) == 0
    out = capsys.readouterr().out
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["command"] == "train"
    assert summary["spec"]["epochs"] == 1, "flag must beat the file value"
    assert summary["spec"]["seed"] == 4
    assert summary["sequences"] == 20

    pred_path = tmp_path / "pred.jsonl"
    assert cli_main(["predict", "--ckpt", str(ckpt), "--data", str(toy_data),
                     "--out", str(pred_path)]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["command"] == "predict"
    assert summary["sequences"] == 20
    gold = read_dataset(toy_data)
    pred = read_dataset(pred_path)
    assert [s.video_id for s in pred] == [s.video_id for s in gold]
    assert all(p.tokens == g.tokens for p, g in zip(pred, gold))


def test_cli_errors(toy_data, tmp_path, capsys):
    assert cli_main(["train", "--data", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "x.pt")]) == 1
    assert "nope.jsonl" in capsys.readouterr().err

    bad_spec = tmp_path / "bad.json"
    bad_spec.write_text("[1, 2]")
    assert cli_main(["train", "--data", str(toy_data),
                     "--out", str(tmp_path / "x.pt"),
                     "--spec", str(bad_spec)]) == 1
    assert "JSON object" in capsys.readouterr().err

    assert cli_main(["train", "--data", str(toy_data),
                     "--out", str(tmp_path / "x.pt"),
                     "--stride", "512"]) == 1
    assert "window_stride" in capsys.readouterr().err

    assert cli_main([]) == 2

    with pytest.raises(SystemExit) as err:
        cli_main(["train", "--data", str(toy_data), "--frobnicate"])
    assert err.value.code == 2


def test_cli_predict_rejects_base_checkpoint(toy_data, base_checkpoint,
                                             tmp_path, capsys):
    code = cli_main(["predict", "--ckpt", str(base_checkpoint["path"]),
                     "--data", str(toy_data),
                     "--out", str(tmp_path / "p.jsonl")])
    assert code == 1
    assert "classifier" in capsys.readouterr().err


def test_console_script_smoke():
    proc = subprocess.run(["seqlab", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert "pretrain" in proc.stdout and "predict" in proc.stdout
