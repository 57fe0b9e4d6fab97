"""PCA projection and real-vs-synthetic separability probing.

PCA uses mean-centering, 1/(n-1) covariance and a deflated power
iteration (convergence threshold 1e-10); each component's
largest-magnitude entry is flipped positive so outputs are comparable
across runs. The probe trains a held-out two-class linear head on pooled
vectors and reports balanced accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from featgan.errors import DegenerateDataError, DimensionError
from featgan.nn import Adam, Mlp, cross_entropy
from featgan.nn.layers import Linear

_POWER_TOL = 1e-10
_POWER_MAX_ITER = 10_000


@dataclass
class PcaModel:
    mean: np.ndarray              # D'
    components: np.ndarray        # k x D', rows orthonormal
    explained_ratios: np.ndarray  # k, non-increasing, in [0, 1]

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def state(self) -> dict:
        return {"mean": self.mean.tolist(),
                "components": self.components.tolist(),
                "explained_ratios": self.explained_ratios.tolist()}


def _power_iteration(cov: np.ndarray, found: list[np.ndarray],
                     rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Dominant eigenpair of cov, deflated against already-found components."""
    n = cov.shape[0]
    v = rng.standard_normal(n)
    for prev in found:
        v -= (v @ prev) * prev
    norm = np.linalg.norm(v)
    if norm < 1e-12:  # start vector collapsed onto found span; restart from basis
        v = np.eye(n)[len(found) % n]
        for prev in found:
            v -= (v @ prev) * prev
        norm = np.linalg.norm(v)
    v /= norm
    for _ in range(_POWER_MAX_ITER):
        w = cov @ v
        for prev in found:
            w -= (w @ prev) * prev
        norm = np.linalg.norm(w)
        if norm < 1e-30:
            # Remaining spectrum is numerically zero; keep the current
            # direction with eigenvalue 0.
            return v, 0.0
        w /= norm
        if np.linalg.norm(w - v) < _POWER_TOL:
            v = w
            break
        v = w
    eigenvalue = float(v @ cov @ v)
    return v, eigenvalue


def pca_fit(pool: np.ndarray, k: int, seed: int = 0) -> PcaModel:
    """Top-k principal components of an N x D' pool."""
    pool = np.asarray(pool, dtype=np.float64)
    if pool.ndim != 2 or pool.shape[0] < 2:
        raise ValueError(f"need at least 2 vectors, got shape {pool.shape}")
    n, dims = pool.shape
    if k > dims:
        raise DimensionError(f"k={k} exceeds data dimension {dims}")
    mean = pool.mean(axis=0)
    centered = pool - mean
    cov = centered.T @ centered / (n - 1)
    total_variance = float(np.trace(cov))
    if total_variance <= 0.0:
        raise DegenerateDataError("all pool vectors are identical")

    rng = np.random.Generator(np.random.PCG64(seed))
    components: list[np.ndarray] = []
    eigenvalues: list[float] = []
    for _ in range(k):
        v, lam = _power_iteration(cov, components, rng)
        sign_ref = v[np.argmax(np.abs(v))]
        if sign_ref < 0:
            v = -v
        components.append(v)
        eigenvalues.append(max(lam, 0.0))
        cov = cov - lam * np.outer(v, v)

    return PcaModel(mean=mean,
                    components=np.array(components),
                    explained_ratios=np.array(eigenvalues) / total_variance)


def pca_project(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if vectors.shape[1] != model.mean.shape[0]:
        raise DimensionError(
            f"vector dim {vectors.shape[1]} vs model dim {model.mean.shape[0]}")
    return (vectors - model.mean) @ model.components.T


def pca_reconstruct(model: PcaModel, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return model.mean + points @ model.components


def scatter_table(points: np.ndarray, domains, labels) -> str:
    """2-d projections as a TSV table: x, y, domain, label."""
    points = np.asarray(points)
    if points.shape[1] != 2:
        raise DimensionError(f"scatter table needs 2-d points, got {points.shape}")
    if not (len(points) == len(domains) == len(labels)):
        raise ValueError("points, domains and labels must align")
    rows = ["x\ty\tdomain\tlabel"]
    for (x, y), dom, lab in zip(points, domains, labels):
        rows.append(f"{x:.8g}\t{y:.8g}\t{dom}\t{lab}")
    return "\n".join(rows) + "\n"


def balanced_accuracy(true: np.ndarray, pred: np.ndarray) -> float:
    """Mean of per-class recalls."""
    recalls = []
    for cls in np.unique(true):
        mask = true == cls
        recalls.append(float(np.mean(pred[mask] == cls)))
    return float(np.mean(recalls))


def _train_probe(x: np.ndarray, y: np.ndarray, seed: int,
                 epochs: int = 40, lr: float = 1e-2, batch: int = 64) -> Mlp:
    rng = np.random.Generator(np.random.PCG64(seed))
    net = Mlp([Linear(x.shape[1], 2, rng)], name="probe")
    opt = Adam.for_layers([net], lr)
    n = len(x)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            take = order[start:start + batch]
            net.zero_grad()
            logits = net.forward(x[take])
            _, grad = cross_entropy(logits, y[take])
            net.backward(grad)
            opt.step()
    return net


def separability_probe(real: np.ndarray, synth: np.ndarray,
                       space: str = "raw", seed: int = 0) -> float:
    """Held-out balanced accuracy of a linear real-vs-synthetic probe.

    80/20 split per domain; space "pca2" first projects everything onto the
    top-2 components fitted on the combined training portion.
    """
    real = np.asarray(real, dtype=np.float32)
    synth = np.asarray(synth, dtype=np.float32)
    if len(real) < 20 or len(synth) < 20:
        raise ValueError("need at least 20 points per domain")
    if space not in ("raw", "pca2"):
        raise ValueError(f"unknown probe space {space!r}")

    rng = np.random.Generator(np.random.PCG64(seed))

    def split(data):
        order = rng.permutation(len(data))
        cut = int(round(0.8 * len(data)))
        return data[order[:cut]], data[order[cut:]]

    real_tr, real_te = split(real)
    synth_tr, synth_te = split(synth)
    train_x = np.concatenate([real_tr, synth_tr])
    train_y = np.concatenate([np.zeros(len(real_tr), dtype=np.int64),
                              np.ones(len(synth_tr), dtype=np.int64)])
    test_x = np.concatenate([real_te, synth_te])
    test_y = np.concatenate([np.zeros(len(real_te), dtype=np.int64),
                             np.ones(len(synth_te), dtype=np.int64)])

    if space == "pca2":
        pca = pca_fit(train_x, 2, seed=seed)
        train_x = pca_project(pca, train_x).astype(np.float32)
        test_x = pca_project(pca, test_x).astype(np.float32)

    # Standardize on train statistics so probe training behaves across scales.
    mu = train_x.mean(axis=0)
    sd = train_x.std(axis=0)
    sd[sd == 0] = 1.0
    train_x = ((train_x - mu) / sd).astype(np.float32)
    test_x = ((test_x - mu) / sd).astype(np.float32)

    net = _train_probe(train_x, train_y, seed=seed + 1)
    logits = net.forward(test_x)
    net.clear_cache()
    pred = np.argmax(logits, axis=1)
    return balanced_accuracy(test_y, pred)
