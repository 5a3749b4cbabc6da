"""The localization adaptor: two dense layers over frozen chunk features.

The adaptor maps a single chunk feature vector to ``m`` per-sentence
probabilities (one per window position) through
``sigmoid(W2 @ dropout(relu(W1 @ f + b1)) + b2)``.  The backbone that
produced the feature is never trained here; only the four parameter
tensors are.  All math is double precision so results do not drift across
platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .types import FEATURE_DIM, Article

LOGIT_EPS = 1e-7


@dataclass
class AdaLocModel:
    """Adaptor parameters.  Treat instances as read-only after training."""

    m: int
    W1: np.ndarray  # (hidden, feature_dim)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (m, hidden)
    b2: np.ndarray  # (m,)
    dropout_rate: float = 0.1

    @property
    def feature_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Inference-mode forward over a batch: (B, feature_dim) -> (B, m)."""
        z1 = features @ self.W1.T + self.b1
        hidden = np.maximum(z1, 0.0)
        z2 = hidden @ self.W2.T + self.b2
        return _bounded(_sigmoid(z2))

    def copy(self) -> "AdaLocModel":
        return AdaLocModel(
            m=self.m,
            W1=self.W1.copy(),
            b1=self.b1.copy(),
            W2=self.W2.copy(),
            b2=self.b2.copy(),
            dropout_rate=self.dropout_rate,
        )


def init_weights(
    m: int,
    seed: int,
    feature_dim: int = FEATURE_DIM,
    hidden_dim: int | None = None,
    dropout_rate: float = 0.1,
) -> AdaLocModel:
    """Uniform Glorot weights, zero biases."""
    if m < 1:
        raise ValueError(f"output width m={m} must be >= 1")
    hidden = feature_dim if hidden_dim is None else hidden_dim
    rng = np.random.default_rng(seed)
    s1 = np.sqrt(6.0 / (feature_dim + hidden))
    s2 = np.sqrt(6.0 / (hidden + m))
    return AdaLocModel(
        m=m,
        W1=rng.uniform(-s1, s1, size=(hidden, feature_dim)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-s2, s2, size=(m, hidden)),
        b2=np.zeros(m),
        dropout_rate=dropout_rate,
    )


def make_oracle_model(m: int, feature_dim: int = FEATURE_DIM, gain: float = 30.0) -> AdaLocModel:
    """A hand-built readout for features whose first ``m`` dims hold labels.

    Pairs with the oracle feature scorer: output ``j`` saturates toward 1
    when feature dim ``j`` is 1 and toward 0 when it is 0, so the adaptor
    inference path can be verified end to end without training.
    """
    model = AdaLocModel(
        m=m,
        W1=np.eye(feature_dim),
        b1=np.zeros(feature_dim),
        W2=np.zeros((m, feature_dim)),
        b2=np.full(m, -gain),
        dropout_rate=0.0,
    )
    for j in range(m):
        model.W2[j, j] = 2.0 * gain
    return model


def adaloc_forward(
    model: AdaLocModel,
    feature: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Forward one feature vector to ``m`` probabilities.

    Training mode applies inverted dropout after the first layer (so
    inference needs no rescaling) and requires a generator.
    """
    feature = np.asarray(feature, dtype=np.float64)
    if feature.shape != (model.feature_dim,):
        raise ValueError(
            f"feature shape {feature.shape} does not match model feature_dim "
            f"{model.feature_dim}"
        )
    if not np.all(np.isfinite(feature)):
        raise ValueError("feature contains non-finite values")

    z1 = model.W1 @ feature + model.b1
    hidden = np.maximum(z1, 0.0)
    if training and model.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-mode forward needs an rng for dropout")
        keep = rng.random(hidden.shape) >= model.dropout_rate
        hidden = hidden * keep / (1.0 - model.dropout_rate)
    z2 = model.W2 @ hidden + model.b2
    return _bounded(_sigmoid(z2))


def bce_loss(
    probs: np.ndarray, targets: np.ndarray, mask: np.ndarray
) -> tuple[float, np.ndarray]:
    """Masked binary cross entropy and its gradient at the logits.

    The loss is the mean over unmasked positions; an all-masked example
    contributes zero loss and zero gradient.
    """
    probs = np.clip(np.asarray(probs, dtype=np.float64), LOGIT_EPS, 1.0 - LOGIT_EPS)
    targets = np.asarray(targets, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    count = mask.sum()
    if count == 0:
        return 0.0, np.zeros_like(probs)
    terms = -(targets * np.log(probs) + (1.0 - targets) * np.log(1.0 - probs)) * mask
    grad = (probs - targets) * mask / count
    return float(terms.sum() / count), grad


@dataclass(frozen=True)
class ChunkExample:
    """One training example: a chunk feature plus per-position targets.

    Positions past the end of a short final chunk are masked out rather
    than dropped, so every sentence still contributes to training.
    """

    feature: tuple[float, ...]
    targets: tuple[int, ...]
    mask: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"feature": list(self.feature), "targets": list(self.targets), "mask": list(self.mask)}

    @classmethod
    def from_dict(cls, d: dict) -> "ChunkExample":
        return cls(
            feature=tuple(float(v) for v in d["feature"]),
            targets=tuple(int(v) for v in d["targets"]),
            mask=tuple(int(v) for v in d["mask"]),
        )


def write_chunk_examples(examples: Iterable[ChunkExample], fp: IO[str]) -> int:
    n = 0
    for ex in examples:
        fp.write(json.dumps(ex.to_dict()))
        fp.write("\n")
        n += 1
    return n


def read_chunk_examples(fp: IO[str]) -> list[ChunkExample]:
    out = []
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(ChunkExample.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed chunk example: {exc}") from exc
    return out


def build_chunk_examples(
    articles: Iterable[Article], feature_scorer, m: int, step: int | None = None
) -> list[ChunkExample]:
    """Extract (feature, targets, mask) chunks from labeled articles.

    Chunks tile each article with step ``m`` by default, mirroring how the
    adaptor is trained; pass ``step=1`` for the overlapping variant.
    """
    from .localizer import _score_windows, plan_windows

    examples = []
    for article in articles:
        if article.labels is None:
            raise ValueError(f"article {article.id}: chunk extraction needs labels")
        plan = plan_windows(len(article.sentences), m, m if step is None else step)
        result = _score_windows(article, feature_scorer, plan, "feature")
        for (start, end), feat in zip(plan.windows, result.features):
            width = end - start + 1
            targets = [0] * m
            mask = [0] * m
            for pos in range(min(width, m)):
                targets[pos] = article.labels[start + pos]
                mask[pos] = 1
            examples.append(ChunkExample(feature=tuple(feat), targets=tuple(targets), mask=tuple(mask)))
    return examples


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    batch_size: int = 16
    max_epochs: int = 3
    patience: int = 1
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dropout_rate: float = 0.1

    def validate(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1 or self.patience < 0:
            raise ValueError("max_epochs must be >= 1 and patience >= 0")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError("dropout_rate must be in [0,1)")


@dataclass
class TrainingLog:
    epoch_loss: list[float] = field(default_factory=list)
    epoch_val_map: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False


class _Adam:
    def __init__(self, shapes: dict[str, tuple], config: TrainConfig):
        self.config = config
        self.t = 0
        self.m = {k: np.zeros(s) for k, s in shapes.items()}
        self.v = {k: np.zeros(s) for k, s in shapes.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        c = self.config
        self.t += 1
        for k, g in grads.items():
            self.m[k] = c.beta1 * self.m[k] + (1.0 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1.0 - c.beta2) * g * g
            m_hat = self.m[k] / (1.0 - c.beta1**self.t)
            v_hat = self.v[k] / (1.0 - c.beta2**self.t)
            params[k] -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)


def loss_and_gradients(
    model: AdaLocModel,
    features: np.ndarray,
    targets: np.ndarray,
    masks: np.ndarray,
    dropout_keep: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Batch loss and analytic gradients for all four parameter tensors.

    ``dropout_keep`` is a precomputed boolean keep-mask of shape
    (batch, hidden); ``None`` disables dropout (inference-style forward).
    """
    z1 = features @ model.W1.T + model.b1
    hidden = np.maximum(z1, 0.0)
    if dropout_keep is not None:
        scale = 1.0 / (1.0 - model.dropout_rate)
        hidden_dropped = hidden * dropout_keep * scale
    else:
        hidden_dropped = hidden
    z2 = hidden_dropped @ model.W2.T + model.b2
    probs = _sigmoid(z2)

    batch = features.shape[0]
    counts = masks.sum(axis=1)
    safe_counts = np.where(counts > 0, counts, 1.0)
    clipped = np.clip(probs, LOGIT_EPS, 1.0 - LOGIT_EPS)
    terms = -(targets * np.log(clipped) + (1.0 - targets) * np.log(1.0 - clipped)) * masks
    loss = float((terms.sum(axis=1) / safe_counts).sum() / batch)

    d_z2 = (clipped - targets) * masks / safe_counts[:, None] / batch
    grads = {
        "W2": d_z2.T @ hidden_dropped,
        "b2": d_z2.sum(axis=0),
    }
    d_hidden = d_z2 @ model.W2
    if dropout_keep is not None:
        d_hidden = d_hidden * dropout_keep / (1.0 - model.dropout_rate)
    d_z1 = d_hidden * (z1 > 0.0)
    grads["W1"] = d_z1.T @ features
    grads["b1"] = d_z1.sum(axis=0)
    return loss, grads


def train(
    dataset: Sequence[ChunkExample],
    val_articles: Sequence[Article],
    val_scorer,
    config: TrainConfig,
) -> tuple[AdaLocModel, TrainingLog]:
    """Mini-batch adaptive-moment training with mAP-based early stopping.

    Validation mAP runs the full vote-aggregation inference path after each
    epoch; the returned model is the best-validation checkpoint.
    """
    from .localizer import localize_adaloc
    from .metrics import localization_map

    config.validate()
    if not dataset:
        raise ValueError("training dataset is empty")
    m = len(dataset[0].targets)
    feature_dim = len(dataset[0].feature)

    features = np.array([ex.feature for ex in dataset], dtype=np.float64)
    targets = np.array([ex.targets for ex in dataset], dtype=np.float64)
    masks = np.array([ex.mask for ex in dataset], dtype=np.float64)
    visible = targets[masks > 0]
    if not (np.any(visible == 1.0) and np.any(visible == 0.0)):
        raise ValueError("training targets must include both classes")

    rng = np.random.default_rng(config.seed)
    model = init_weights(
        m, seed=config.seed, feature_dim=feature_dim, dropout_rate=config.dropout_rate
    )
    params = {"W1": model.W1, "b1": model.b1, "W2": model.W2, "b2": model.b2}
    optimizer = _Adam({k: p.shape for k, p in params.items()}, config)

    log = TrainingLog()
    best = model.copy()
    best_map = -1.0
    stale = 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for lo in range(0, len(dataset), config.batch_size):
            idx = order[lo : lo + config.batch_size]
            keep = None
            if config.dropout_rate > 0.0:
                keep = rng.random((len(idx), model.hidden_dim)) >= config.dropout_rate
            loss, grads = loss_and_gradients(
                model, features[idx], targets[idx], masks[idx], dropout_keep=keep
            )
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, batch {lo // config.batch_size}"
                )
            optimizer.step(params, grads)
            losses.append(loss)

        val_results = [
            localize_adaloc(a, val_scorer, model, m=m, aggregation="vote")
            for a in val_articles
        ]
        val_map = localization_map(val_articles, val_results)
        log.epoch_loss.append(float(np.mean(losses)))
        log.epoch_val_map.append(val_map)

        if val_map > best_map:
            best_map = val_map
            best = model.copy()
            log.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                log.stopped_early = True
                break

    return best, log


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

MODEL_FORMAT_VERSION = 1


def save_model(model: AdaLocModel, path) -> None:
    # Write through a file object so numpy cannot append its own suffix.
    with open(path, "wb") as fp:
        _savez(fp, model)


def _savez(fp, model: AdaLocModel) -> None:
    np.savez(
        fp,
        version=np.int64(MODEL_FORMAT_VERSION),
        feature_dim=np.int64(model.feature_dim),
        m=np.int64(model.m),
        dropout_rate=np.float64(model.dropout_rate),
        W1=model.W1,
        b1=model.b1,
        W2=model.W2,
        b2=model.b2,
    )


def load_model(path, expected_feature_dim: int | None = None) -> AdaLocModel:
    """Load a saved adaptor; fails loudly on version, shape, or corruption."""
    try:
        with np.load(path) as data:
            fields = {k: data[k] for k in data.files}
    except Exception as exc:
        raise ValueError(f"cannot read model file {path}: {exc}") from exc

    required = {"version", "feature_dim", "m", "dropout_rate", "W1", "b1", "W2", "b2"}
    missing = required - set(fields)
    if missing:
        raise ValueError(f"model file {path} missing fields: {sorted(missing)}")
    if int(fields["version"]) != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"model file {path} has version {int(fields['version'])}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )

    m = int(fields["m"])
    feature_dim = int(fields["feature_dim"])
    model = AdaLocModel(
        m=m,
        W1=np.asarray(fields["W1"], dtype=np.float64),
        b1=np.asarray(fields["b1"], dtype=np.float64),
        W2=np.asarray(fields["W2"], dtype=np.float64),
        b2=np.asarray(fields["b2"], dtype=np.float64),
        dropout_rate=float(fields["dropout_rate"]),
    )
    if model.W1.shape[1] != feature_dim or model.W2.shape[0] != m:
        raise ValueError(f"model file {path} has inconsistent parameter shapes")
    if model.W2.shape[1] != model.W1.shape[0] or model.b1.shape != (model.W1.shape[0],):
        raise ValueError(f"model file {path} has inconsistent parameter shapes")
    if expected_feature_dim is not None and feature_dim != expected_feature_dim:
        raise ValueError(
            f"model feature_dim {feature_dim} does not match pipeline "
            f"feature_dim {expected_feature_dim}"
        )
    return model


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bounded(p: np.ndarray) -> np.ndarray:
    # saturated sigmoids round to exactly 0/1 in float64; keep the contract
    # that emitted probabilities are strictly inside (0, 1)
    return np.clip(p, 1e-12, 1.0 - 1e-12)
