import pytest

from laughkit.cli import main as cli_main
from laughkit.fixtures import build_demo_corpus


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo_corpus")
    return build_demo_corpus(root, seed=7)


@pytest.fixture(scope="session")
def demo_model(demo_corpus, tmp_path_factory):
    """Forest model trained on the demo corpus clips, via the CLI."""
    root = tmp_path_factory.mktemp("demo_model")
    features = root / "train_features.csv"
    model = root / "model.json"
    paths = demo_corpus.paths
    assert cli_main([
        "extract-features",
        "--audio-dir", str(paths["audio_dir"]),
        "--segments", str(paths["train_labels"]),
        "--out", str(features),
    ]) == 0
    assert cli_main([
        "train-rf",
        "--features", str(features),
        "--labels", str(paths["train_labels"]),
        "--out", str(model),
        "--seed", "11",
    ]) == 0
    return {"model": model, "features": features}
