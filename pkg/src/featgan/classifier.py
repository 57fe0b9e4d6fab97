"""Single-linear-layer classification head over pooled feature vectors.

Trains with softmax cross-entropy and Adam at a fixed learning rate; when
a CycleGAN model is attached, training inputs pass through its frozen
synthetic-to-real generator first. The epoch with the best validation
accuracy is kept. Real validation/test vectors are evaluated raw by
default (they are already in the generator's target domain); transforming
test inputs is available as an explicit ablation.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from featgan import CLASSES
from featgan.cyclegan import CycleGanModel
from featgan.errors import DimensionError
from featgan.nn import Adam, Mlp, cross_entropy
from featgan.nn.checkpoint import load_model, save_model
from featgan.nn.layers import Linear


@dataclass
class HeadTrainConfig:
    epochs: int = 30
    lr: float = 5e-3
    batch: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


class LinearHead:
    """One linear layer mapping pooled vectors to class logits."""

    def __init__(self, net: Mlp, classes: tuple[str, ...] = CLASSES,
                 config: HeadTrainConfig | None = None):
        self.net = net
        self.classes = tuple(classes)
        self.config = config or HeadTrainConfig()

    @classmethod
    def build(cls, in_dim: int, cfg: HeadTrainConfig,
              rng: np.random.Generator,
              classes: tuple[str, ...] = CLASSES) -> "LinearHead":
        net = Mlp([Linear(in_dim, len(classes), rng)], name="head")
        return cls(net, classes, cfg)

    @property
    def in_dim(self) -> int:
        return self.net.linears()[0].in_dim

    def logits(self, x: np.ndarray) -> np.ndarray:
        out = self.net.forward(np.atleast_2d(x))
        self.net.clear_cache()
        return out

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    def save(self, path) -> None:
        save_model(path, [("head", self.net)],
                   {"kind": "linear_head", "classes": list(self.classes),
                    "config": self.config.to_dict()})

    @classmethod
    def load(cls, path) -> "LinearHead":
        sections, meta = load_model(path)
        if meta.get("kind") != "linear_head":
            raise ValueError(f"{path}: checkpoint kind {meta.get('kind')!r} "
                             f"is not a linear head")
        return cls(dict(sections)["head"], tuple(meta["classes"]),
                   HeadTrainConfig(**meta["config"]))


def labels_to_indices(labels, classes: tuple[str, ...] = CLASSES) -> np.ndarray:
    table = {name: i for i, name in enumerate(classes)}
    try:
        return np.array([table[l] for l in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"unknown label {exc.args[0]!r}") from None


def train_head(train_x: np.ndarray, train_labels, valid_x: np.ndarray,
               valid_labels, cfg: HeadTrainConfig,
               transform: CycleGanModel | None = None,
               classes: tuple[str, ...] = CLASSES,
               ) -> tuple[LinearHead, list[dict]]:
    """Train the head; returns (best-validation-epoch head, per-epoch metrics)."""
    train_x = np.asarray(train_x, dtype=np.float32)
    valid_x = np.asarray(valid_x, dtype=np.float32)
    if transform is not None:
        train_x = transform.transform(train_x)  # frozen generator A, train only
    if train_x.shape[1] != valid_x.shape[1]:
        raise DimensionError(
            f"train dim {train_x.shape} vs valid dim {valid_x.shape}")
    train_y = labels_to_indices(train_labels, classes)
    valid_y = labels_to_indices(valid_labels, classes)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    head = LinearHead.build(train_x.shape[1], cfg, rng, classes)
    opt = Adam.for_layers([head.net], cfg.lr)

    best_params = [p.copy() for p in head.net.parameters()]
    best_acc = -1.0
    metrics: list[dict] = []
    n = len(train_x)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        batches = 0
        for start in range(0, n, cfg.batch):
            take = order[start:start + cfg.batch]
            head.net.zero_grad()
            logits = head.net.forward(train_x[take])
            value, grad = cross_entropy(logits, train_y[take])
            head.net.backward(grad)
            opt.step()
            loss_sum += value
            batches += 1
        val_acc, _ = evaluate(head, valid_x, valid_y)
        metrics.append({"epoch": epoch, "train_loss": loss_sum / max(1, batches),
                        "valid_accuracy": val_acc})
        if val_acc > best_acc:
            best_acc = val_acc
            best_params = [p.copy() for p in head.net.parameters()]
    for p, best in zip(head.net.parameters(), best_params):
        p[...] = best
    return head, metrics


def evaluate(head: LinearHead, test_x: np.ndarray, test_labels,
             transform: CycleGanModel | None = None,
             ) -> tuple[float, np.ndarray]:
    """Accuracy and confusion matrix (rows true, cols predicted).

    transform is the explicit ablation that maps test inputs through the
    frozen generator before classification; default is raw.
    """
    test_x = np.asarray(test_x, dtype=np.float32)
    if len(test_x) == 0:
        raise ValueError("empty test set")
    if transform is not None:
        test_x = transform.transform(test_x)
    if isinstance(test_labels, np.ndarray) and test_labels.dtype.kind in "iu":
        test_y = test_labels.astype(np.int64)
    else:
        test_y = labels_to_indices(test_labels, head.classes)
    pred = head.predict(test_x)
    n_classes = len(head.classes)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (test_y, pred), 1)
    accuracy = float(np.trace(confusion)) / len(test_y)
    return accuracy, confusion


def multi_seed_report(accuracies: list[float]) -> dict:
    """Mean and sample standard deviation over per-seed accuracies."""
    if len(accuracies) < 2:
        raise ValueError("need at least 2 runs for a mean/std report")
    acc = np.asarray(accuracies, dtype=np.float64)
    mean = float(acc.mean())
    std = float(acc.std(ddof=1))
    return {"runs": len(accuracies), "mean": mean, "std": std,
            "formatted": f"{100 * mean:.2f} ± {100 * std:.2f}"}
