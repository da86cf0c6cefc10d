"""Candidate verification and a from-scratch random forest classifier.

Verification is a plain duration gate: anything under half a second is
auto-labeled non-laughter and kept out of training and evaluation. The
forest is implemented here directly (bootstrap + Gini splits + feature
subsampling) so the trained model is a self-describing JSON artifact
with no library version baked in.

Split search works on class counts only, so any strictly increasing
transform of a feature leaves tree structure and predictions unchanged.
Randomness comes from per-tree generators seeded with (seed, tree_index),
making serial and parallel training agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import ValidationError
from .features import FEATURE_NAMES, FeatureRow
from .records import CandidateLaughter, LaughterSegment, q3

CLASSES = ("laughter", "other")
VERIFY_PASS = "pass"
VERIFY_AUTO_OTHER = "auto_other"
MIN_LAUGH_DUR_S = 0.5


def verify(segment) -> str:
    """Duration gate: under 0.5 s is auto-labeled other; 0.5 s passes."""
    if hasattr(segment, "end_s"):
        duration = segment.end_s - segment.start_s
    else:
        duration = float(segment)
    return VERIFY_PASS if duration >= MIN_LAUGH_DUR_S else VERIFY_AUTO_OTHER


@dataclass
class ForestConfig:
    n_estimators: int = 50
    max_depth: int = 13
    min_samples_split: int = 2
    features_per_split: str | int = "sqrt"
    seed: int = 0
    holdout_fraction: float = 0.15

    def validate(self) -> None:
        if self.n_estimators < 1:
            raise ValidationError("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValidationError("min_samples_split must be >= 2")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValidationError("holdout_fraction must be in (0, 1)")
        if self.features_per_split != "sqrt" and (
            not isinstance(self.features_per_split, int)
            or self.features_per_split < 1
        ):
            raise ValidationError(
                "features_per_split must be 'sqrt' or a positive int"
            )

    def candidates_per_split(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return max(1, int(math.isqrt(n_features)))
        return min(int(self.features_per_split), n_features)

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "holdout_fraction": self.holdout_fraction,
        }


@dataclass
class ForestModel:
    trees: list
    feature_order: list
    config: ForestConfig
    classes: tuple = CLASSES

    @property
    def n_features(self) -> int:
        return len(self.feature_order)


def _as_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("X must be a 2-d matrix")
    labels = np.asarray(list(y))
    if len(labels) != len(X):
        raise ValidationError("X and y lengths differ")
    bad = sorted(set(str(l) for l in labels) - set(CLASSES))
    if bad:
        raise ValidationError(
            f"labels must be in {CLASSES}, got {bad[0]!r}"
        )
    y01 = np.array([0 if str(l) == CLASSES[0] else 1 for l in labels])
    return X, y01


def _gini_pair(n1_left, n_left, n1_right, n_right):
    """Weighted Gini impurity of a split, from class-1 counts."""
    p1l = n1_left / n_left
    p1r = n1_right / n_right
    gl = 2.0 * p1l * (1.0 - p1l)
    gr = 2.0 * p1r * (1.0 - p1r)
    return (n_left * gl + n_right * gr) / (n_left + n_right)


def _best_split(X, y01, feat_ids):
    """Best (feature, threshold, weighted gini) over candidate features.

    Works purely on sorted class counts; first strictly better candidate
    wins, scanning features in the given order and positions left to
    right.
    """
    n = len(y01)
    best = None
    for f in feat_ids:
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y01[order]
        valid = np.nonzero(xs[:-1] < xs[1:])[0]
        if valid.size == 0:
            continue
        cum1 = np.cumsum(ys)
        left_n = valid + 1
        left1 = cum1[valid]
        total1 = cum1[-1]
        right_n = n - left_n
        right1 = total1 - left1
        p1l = left1 / left_n
        p1r = right1 / right_n
        score = (left_n * 2.0 * p1l * (1.0 - p1l)
                 + right_n * 2.0 * p1r * (1.0 - p1r)) / n
        k = int(np.argmin(score))
        if best is None or score[k] < best[2]:
            pos = valid[k]
            threshold = (xs[pos] + xs[pos + 1]) / 2.0
            best = (int(f), float(threshold), float(score[k]))
    return best


def _grow_tree(X, y01, rng, cfg: ForestConfig, n_candidates: int,
               depth: int = 0) -> dict:
    n = len(y01)
    n1 = int(y01.sum())
    counts = [n - n1, n1]
    p1 = n1 / n
    parent_gini = 2.0 * p1 * (1.0 - p1)
    if (
        depth >= cfg.max_depth
        or n < cfg.min_samples_split
        or parent_gini == 0.0
    ):
        return {"leaf": counts}
    feat_ids = np.sort(
        rng.choice(X.shape[1], size=min(n_candidates, X.shape[1]),
                   replace=False)
    )
    best = _best_split(X, y01, feat_ids)
    if best is None or best[2] >= parent_gini:
        return {"leaf": counts}
    f, threshold, _ = best
    mask = X[:, f] <= threshold
    left = _grow_tree(X[mask], y01[mask], rng, cfg, n_candidates, depth + 1)
    right = _grow_tree(X[~mask], y01[~mask], rng, cfg, n_candidates, depth + 1)
    return {"feature": f, "threshold": threshold, "left": left, "right": right}


def train(X, y, cfg: ForestConfig | None = None,
          feature_names: Sequence[str] | None = None) -> ForestModel:
    """Fit the forest. Labels must be 'laughter' or 'other', both present."""
    cfg = cfg or ForestConfig()
    cfg.validate()
    X, y01 = _as_xy(X, y)
    if len(X) < cfg.min_samples_split:
        raise ValidationError(
            f"need at least {cfg.min_samples_split} examples, got {len(X)}"
        )
    if len(np.unique(y01)) < 2:
        raise ValidationError("training data must contain both classes")
    if feature_names is None:
        feature_names = (
            list(FEATURE_NAMES) if X.shape[1] == len(FEATURE_NAMES)
            else [f"f{i}" for i in range(X.shape[1])]
        )
    if len(feature_names) != X.shape[1]:
        raise ValidationError("feature_names length must match X columns")
    n_candidates = cfg.candidates_per_split(X.shape[1])
    trees = []
    for t in range(cfg.n_estimators):
        rng = np.random.default_rng([cfg.seed, t])
        idx = rng.integers(0, len(X), len(X))
        trees.append(
            _grow_tree(X[idx], y01[idx], rng, cfg, n_candidates)
        )
    return ForestModel(trees=trees, feature_order=list(feature_names),
                       config=cfg)


def _leaf_proba(node: dict, row: np.ndarray) -> np.ndarray:
    while "leaf" not in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] \
            else node["right"]
    counts = np.asarray(node["leaf"], dtype=np.float64)
    return counts / counts.sum()


def predict_proba(model: ForestModel, X) -> np.ndarray:
    """[n, 2] probabilities in (laughter, other) column order."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise ValidationError(
            f"feature dimension mismatch: model expects {model.n_features}, "
            f"got {X.shape[1]}"
        )
    out = np.zeros((len(X), 2))
    for tree in model.trees:
        for i, row in enumerate(X):
            out[i] += _leaf_proba(tree, row)
    return out / len(model.trees)


def predict(model: ForestModel, X) -> list:
    """Labels; laughter only when its probability strictly exceeds 0.5."""
    proba = predict_proba(model, X)
    return [
        CLASSES[0] if p[0] > 0.5 else CLASSES[1]
        for p in proba
    ]


# --- serialization -------------------------------------------------------------

_FORMAT = "laughter-forest"
_VERSION = 1


def save_model(model: ForestModel, path) -> None:
    blob = {
        "format": _FORMAT,
        "version": _VERSION,
        "classes": list(model.classes),
        "feature_order": model.feature_order,
        "config": model.config.to_dict(),
        "trees": model.trees,
    }
    Path(path).write_text(
        json.dumps(blob, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_model(path) -> ForestModel:
    path = Path(path)
    try:
        blob = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not a valid model file: {exc}") from exc
    if blob.get("format") != _FORMAT:
        raise ValidationError(f"{path}: unrecognized model format")
    if blob.get("version") != _VERSION:
        raise ValidationError(f"{path}: unsupported model version")
    if tuple(blob.get("classes", ())) != CLASSES:
        raise ValidationError(f"{path}: unexpected class list")
    cfg_d = blob["config"]
    fps = cfg_d["features_per_split"]
    cfg = ForestConfig(
        n_estimators=cfg_d["n_estimators"],
        max_depth=cfg_d["max_depth"],
        min_samples_split=cfg_d["min_samples_split"],
        features_per_split=fps if fps == "sqrt" else int(fps),
        seed=cfg_d["seed"],
        holdout_fraction=cfg_d["holdout_fraction"],
    )
    return ForestModel(trees=blob["trees"],
                       feature_order=list(blob["feature_order"]), config=cfg)


# --- repeated-split evaluation --------------------------------------------------

@dataclass
class MetricCI:
    mean: float
    lo: float
    hi: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "ci_low": self.lo, "ci_high": self.hi}


@dataclass
class CVReport:
    iterations: int
    holdout_fraction: float
    per_class: dict = field(default_factory=dict)
    macro_f1: Optional[MetricCI] = None

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "holdout_fraction": self.holdout_fraction,
            "per_class": {
                cls: {name: ci.to_dict() for name, ci in metrics.items()}
                for cls, metrics in self.per_class.items()
            },
            "macro_f1": self.macro_f1.to_dict() if self.macro_f1 else None,
        }


def _binary_prf(y_true01, y_pred01, positive: int):
    tp = int(np.sum((y_true01 == positive) & (y_pred01 == positive)))
    fp = int(np.sum((y_true01 != positive) & (y_pred01 == positive)))
    fn = int(np.sum((y_true01 == positive) & (y_pred01 != positive)))
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _ci(values: np.ndarray) -> MetricCI:
    return MetricCI(
        mean=float(values.mean()),
        lo=float(np.percentile(values, 2.5)),
        hi=float(np.percentile(values, 97.5)),
    )


def evaluate_cv(X, y, cfg: ForestConfig | None = None,
                iterations: int = 200) -> CVReport:
    """Repeated stratified splits; percentile CIs over iteration metrics.

    Each iteration holds out cfg.holdout_fraction per class (at least one
    example), trains a fresh forest with an iteration-derived seed, and
    scores the holdout.
    """
    cfg = cfg or ForestConfig()
    cfg.validate()
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    X, y01 = _as_xy(X, y)
    class_idx = [np.nonzero(y01 == c)[0] for c in (0, 1)]
    for c, idx in enumerate(class_idx):
        if len(idx) < 2:
            raise ValidationError(
                f"class '{CLASSES[c]}' needs at least 2 examples to split"
            )
    rows = {cls: {"precision": [], "recall": [], "f1": []} for cls in CLASSES}
    macro = []
    for it in range(iterations):
        rng = np.random.default_rng([cfg.seed, 1_000_000 + it])
        test_mask = np.zeros(len(X), dtype=bool)
        for idx in class_idx:
            n_test = max(1, int(round(cfg.holdout_fraction * len(idx))))
            n_test = min(n_test, len(idx) - 1)
            test_mask[rng.permutation(idx)[:n_test]] = True
        it_seed = int(np.random.SeedSequence([cfg.seed, it]).generate_state(1)[0])
        model = train(
            X[~test_mask],
            [CLASSES[v] for v in y01[~test_mask]],
            replace(cfg, seed=it_seed),
        )
        pred = predict(model, X[test_mask])
        pred01 = np.array([0 if p == CLASSES[0] else 1 for p in pred])
        true01 = y01[test_mask]
        f1s = []
        for c, cls in enumerate(CLASSES):
            p, r, f = _binary_prf(true01, pred01, c)
            rows[cls]["precision"].append(p)
            rows[cls]["recall"].append(r)
            rows[cls]["f1"].append(f)
            f1s.append(f)
        macro.append(sum(f1s) / len(f1s))
    per_class = {
        cls: {name: _ci(np.array(vals)) for name, vals in metrics.items()}
        for cls, metrics in rows.items()
    }
    return CVReport(
        iterations=iterations,
        holdout_fraction=cfg.holdout_fraction,
        per_class=per_class,
        macro_f1=_ci(np.array(macro)),
    )


# --- candidate filtering --------------------------------------------------------

def _feature_key(video_id: str, start_s: float, end_s: float) -> tuple:
    return (video_id, q3(start_s), q3(end_s))


def filter_candidates(
    candidates: Iterable[CandidateLaughter],
    features: Iterable[FeatureRow],
    model: ForestModel,
) -> list[LaughterSegment]:
    """Verified, classifier-accepted candidates as laughter segments.

    Sub-0.5 s candidates are dropped by the gate without consulting the
    model. Accepted segments carry source='asr_gap' and the laughter
    probability as score.
    """
    by_key = {
        _feature_key(r.video_id, r.start_s, r.end_s): r for r in features
    }
    accepted: list[LaughterSegment] = []
    for cand in candidates:
        if verify(cand) != VERIFY_PASS:
            continue
        key = _feature_key(cand.video_id, cand.start_s, cand.end_s)
        row = by_key.get(key)
        if row is None:
            raise ValidationError(
                f"no feature row for candidate {cand.video_id} "
                f"[{cand.start_s:.3f}, {cand.end_s:.3f}]"
            )
        p_laughter = float(predict_proba(model, row.values[None, :])[0, 0])
        if p_laughter > 0.5:
            accepted.append(
                LaughterSegment(
                    video_id=cand.video_id,
                    start_s=cand.start_s,
                    end_s=cand.end_s,
                    source="asr_gap",
                    score=p_laughter,
                )
            )
    return accepted


# --- estimator facade -----------------------------------------------------------

class RandomForestLaughterClassifier(BaseEstimator, ClassifierMixin):
    """fit/predict wrapper over the functional forest implementation."""

    def __init__(self, n_estimators=50, max_depth=13, min_samples_split=2,
                 features_per_split="sqrt", seed=0, holdout_fraction=0.15):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.features_per_split = features_per_split
        self.seed = seed
        self.holdout_fraction = holdout_fraction

    def _config(self) -> ForestConfig:
        return ForestConfig(
            n_estimators=self.n_estimators,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            features_per_split=self.features_per_split,
            seed=self.seed,
            holdout_fraction=self.holdout_fraction,
        )

    def fit(self, X, y, feature_names=None):
        self.model_ = train(X, y, self._config(), feature_names)
        self.classes_ = np.asarray(CLASSES)
        self.n_features_in_ = self.model_.n_features
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValidationError("classifier is not fitted")

    def predict(self, X):
        self._check_fitted()
        return np.asarray(predict(self.model_, X))

    def predict_proba(self, X):
        self._check_fitted()
        return predict_proba(self.model_, X)

    def save(self, path):
        self._check_fitted()
        save_model(self.model_, path)

    @classmethod
    def from_file(cls, path):
        model = load_model(path)
        est = cls(**{
            k: getattr(model.config, k)
            for k in ("n_estimators", "max_depth", "min_samples_split",
                      "features_per_split", "seed", "holdout_fraction")
        })
        est.model_ = model
        est.classes_ = np.asarray(CLASSES)
        est.n_features_in_ = model.n_features
        return est
