"""Feature-space CycleGAN: two generators, two discriminators, LSGAN labels.

Domains: A = synthetic pooled vectors, B = real pooled vectors. G_A maps
A->B (the transform exposed to callers), G_B maps B->A. D_A judges
real-domain vectors (true real vs G_A outputs), D_B judges
synthetic-domain vectors. Adversarial terms use MSE against labels
(discriminators toward 1 on true inputs, 0 on generated; generators toward
1), cycle and identity terms use L1:

    cyc_a = L1(G_B(G_A(a)), a)    id_a = L1(G_B(a), a)
    cyc_b = L1(G_A(G_B(b)), b)    id_b = L1(G_A(b), b)

    total = gan_a + gan_b + lambda_cyc*(cyc_a + cyc_b)
                          + lambda_id*(id_a + id_b)

Training alternates one discriminator step and one generator step per
iteration; mini-batches are drawn independently at random from each pool.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field

import numpy as np

from featgan.errors import DimensionError, NonFiniteError
from featgan.features import FeatureScaler, fit_scaler
from featgan.nn import Adam, Mlp, l1, mse
from featgan.nn.checkpoint import load_model, save_model
from featgan.nn.layers import mlp


def build_generator(dim: int, hidden: int, rng: np.random.Generator,
                    dtype=np.float32, name: str = "g") -> Mlp:
    """Three linear layers dim->hidden->hidden->dim, relu/relu/tanh."""
    return mlp([dim, hidden, hidden, dim], ["relu", "relu", "tanh"], rng,
               dtype=dtype, name=name)


def build_discriminator(dim: int, hidden: int, rng: np.random.Generator,
                        dtype=np.float32, name: str = "d") -> Mlp:
    """Three linear layers dim->hidden->hidden->1, relu/relu/sigmoid."""
    return mlp([dim, hidden, hidden, 1], ["relu", "relu", "sigmoid"], rng,
               dtype=dtype, name=name)


@dataclass
class CycleGanTrainConfig:
    epochs: int = 200
    batch: int = 128
    lr: float = 1e-5
    lambda_cyc: float = 10.0
    lambda_id: float = 0.5
    seed: int = 0
    hidden: int = 512
    scaler_margin: float = 0.05

    def __post_init__(self):
        if self.lambda_cyc < 0 or self.lambda_id < 0:
            raise ValueError("lambda weights must be >= 0")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CycleLossTerms:
    gan_a: float
    gan_b: float
    cyc_a: float
    cyc_b: float
    id_a: float
    id_b: float
    total: float

    def as_dict(self) -> dict:
        return asdict(self)

    def check_finite(self) -> None:
        for name, value in self.as_dict().items():
            if not np.isfinite(value):
                raise NonFiniteError(f"loss term {name} is not finite: {value}")


class CycleGanModel:
    """Trained networks plus the feature scaler that brackets them."""

    def __init__(self, g_a: Mlp, g_b: Mlp, d_a: Mlp, d_b: Mlp,
                 scaler: FeatureScaler, config: CycleGanTrainConfig):
        self.g_a = g_a
        self.g_b = g_b
        self.d_a = d_a
        self.d_b = d_b
        self.scaler = scaler
        self.config = config

    @classmethod
    def build(cls, dim: int, cfg: CycleGanTrainConfig, scaler: FeatureScaler,
              rng: np.random.Generator, dtype=np.float32) -> "CycleGanModel":
        return cls(
            build_generator(dim, cfg.hidden, rng, dtype, name="g_a"),
            build_generator(dim, cfg.hidden, rng, dtype, name="g_b"),
            build_discriminator(dim, cfg.hidden, rng, dtype, name="d_a"),
            build_discriminator(dim, cfg.hidden, rng, dtype, name="d_b"),
            scaler, cfg)

    def networks(self) -> list[Mlp]:
        return [self.g_a, self.g_b, self.d_a, self.d_b]

    def transform(self, vectors: np.ndarray) -> np.ndarray:
        """synthetic -> real mapping in raw feature space: unscale(G_A(scale(v)))."""
        if self.scaler is None:
            raise ValueError("model has no fitted feature scaler")
        vectors = np.atleast_2d(np.asarray(vectors))
        out = self.g_a.forward(self.scaler.scale(vectors))
        self.g_a.clear_cache()
        return self.scaler.unscale(out)

    def save(self, path) -> None:
        save_model(path, [("g_a", self.g_a), ("g_b", self.g_b),
                          ("d_a", self.d_a), ("d_b", self.d_b)],
                   {"kind": "cyclegan", "config": self.config.to_dict(),
                    "scaler": self.scaler.state()})

    @classmethod
    def load(cls, path) -> "CycleGanModel":
        sections, meta = load_model(path)
        nets = dict(sections)
        if meta.get("kind") != "cyclegan":
            raise ValueError(f"{path}: checkpoint kind {meta.get('kind')!r} "
                             f"is not a cyclegan model")
        return cls(nets["g_a"], nets["g_b"], nets["d_a"], nets["d_b"],
                   FeatureScaler.from_state(meta["scaler"]),
                   CycleGanTrainConfig(**meta["config"]))


def composite_loss(model: CycleGanModel, batch_a: np.ndarray,
                   batch_b: np.ndarray, lambda_cyc: float | None = None,
                   lambda_id: float | None = None) -> CycleLossTerms:
    """Generator-side loss terms on scaled batches (forward only)."""
    if batch_a.size == 0 or batch_b.size == 0:
        raise ValueError("both batches must be non-empty")
    if batch_a.shape[1] != batch_b.shape[1]:
        raise DimensionError(f"batch dims differ: {batch_a.shape} vs {batch_b.shape}")
    lc = model.config.lambda_cyc if lambda_cyc is None else lambda_cyc
    li = model.config.lambda_id if lambda_id is None else lambda_id

    fake_b = model.g_a.forward(batch_a)
    fake_a = model.g_b.forward(batch_b)
    rec_a = model.g_b.forward(fake_b)
    rec_b = model.g_a.forward(fake_a)
    ident_a = model.g_b.forward(batch_a)
    ident_b = model.g_a.forward(batch_b)
    p_a = model.d_a.forward(fake_b)
    p_b = model.d_b.forward(fake_a)
    for net in model.networks():
        net.clear_cache()

    gan_a, _ = mse(p_a, np.ones_like(p_a))
    gan_b, _ = mse(p_b, np.ones_like(p_b))
    cyc_a, _ = l1(rec_a, batch_a)
    cyc_b, _ = l1(rec_b, batch_b)
    id_a, _ = l1(ident_a, batch_a)
    id_b, _ = l1(ident_b, batch_b)
    total = gan_a + gan_b + lc * (cyc_a + cyc_b) + li * (id_a + id_b)
    terms = CycleLossTerms(gan_a, gan_b, cyc_a, cyc_b, id_a, id_b, total)
    terms.check_finite()
    return terms


def generator_step(model: CycleGanModel, batch_a: np.ndarray,
                   batch_b: np.ndarray, opt: Adam | None = None
                   ) -> CycleLossTerms:
    """One composite-loss evaluation plus backprop into both generators.

    Backward calls run in exact reverse forward order so each layer's
    cache stack pops correctly; the two gradient paths into fake_a/fake_b
    (adversarial and cycle) are summed before entering the generator that
    produced them. Discriminator parameter gradients picked up along the
    adversarial path are discarded by the next discriminator_step zero_grad.
    """
    cfg = model.config
    g_a, g_b, d_a, d_b = model.g_a, model.g_b, model.d_a, model.d_b
    g_a.zero_grad()
    g_b.zero_grad()

    fake_b = g_a.forward(batch_a)      # g_a #1
    fake_a = g_b.forward(batch_b)      # g_b #1
    rec_a = g_b.forward(fake_b)        # g_b #2
    rec_b = g_a.forward(fake_a)        # g_a #2
    ident_a = g_b.forward(batch_a)     # g_b #3
    ident_b = g_a.forward(batch_b)     # g_a #3
    p_a = d_a.forward(fake_b)
    p_b = d_b.forward(fake_a)

    gan_a, g_gan_a = mse(p_a, np.ones_like(p_a))
    gan_b, g_gan_b = mse(p_b, np.ones_like(p_b))
    cyc_a, g_cyc_a = l1(rec_a, batch_a)
    cyc_b, g_cyc_b = l1(rec_b, batch_b)
    id_a, g_id_a = l1(ident_a, batch_a)
    id_b, g_id_b = l1(ident_b, batch_b)
    total = (gan_a + gan_b + cfg.lambda_cyc * (cyc_a + cyc_b)
             + cfg.lambda_id * (id_a + id_b))
    terms = CycleLossTerms(gan_a, gan_b, cyc_a, cyc_b, id_a, id_b, total)
    terms.check_finite()

    grad_fake_a = d_b.backward(g_gan_b)
    grad_fake_b = d_a.backward(g_gan_a)
    g_a.backward(cfg.lambda_id * g_id_b)                                # pops g_a #3
    g_b.backward(cfg.lambda_id * g_id_a)                                # pops g_b #3
    grad_fake_a = grad_fake_a + g_a.backward(cfg.lambda_cyc * g_cyc_b)  # pops g_a #2
    grad_fake_b = grad_fake_b + g_b.backward(cfg.lambda_cyc * g_cyc_a)  # pops g_b #2
    g_b.backward(grad_fake_a)                                           # pops g_b #1
    g_a.backward(grad_fake_b)                                           # pops g_a #1

    if opt is not None:
        opt.step()
    return terms


def discriminator_step(model: CycleGanModel, batch_a: np.ndarray,
                       batch_b: np.ndarray, opt: Adam | None = None
                       ) -> tuple[float, float]:
    """LSGAN discriminator update: true inputs toward 1, generated toward 0."""
    g_a, g_b, d_a, d_b = model.g_a, model.g_b, model.d_a, model.d_b
    d_a.zero_grad()
    d_b.zero_grad()

    fake_b = g_a.forward(batch_a)
    g_a.clear_cache()
    fake_a = g_b.forward(batch_b)
    g_b.clear_cache()

    p_real_a = d_a.forward(batch_b)
    p_fake_a = d_a.forward(fake_b)
    p_real_b = d_b.forward(batch_a)
    p_fake_b = d_b.forward(fake_a)

    loss_real_a, grad_real_a = mse(p_real_a, np.ones_like(p_real_a))
    loss_fake_a, grad_fake_a = mse(p_fake_a, np.zeros_like(p_fake_a))
    loss_real_b, grad_real_b = mse(p_real_b, np.ones_like(p_real_b))
    loss_fake_b, grad_fake_b = mse(p_fake_b, np.zeros_like(p_fake_b))

    # LIFO pops: fake contexts first, then real.
    d_b.backward(grad_fake_b)
    d_b.backward(grad_real_b)
    d_a.backward(grad_fake_a)
    d_a.backward(grad_real_a)

    loss_a = loss_real_a + loss_fake_a
    loss_b = loss_real_b + loss_fake_b
    if not (np.isfinite(loss_a) and np.isfinite(loss_b)):
        raise NonFiniteError(f"discriminator loss not finite: {loss_a}, {loss_b}")
    if opt is not None:
        opt.step()
    return loss_a, loss_b


def _snapshot(model: CycleGanModel) -> list[np.ndarray]:
    return [p.copy() for net in model.networks() for p in net.parameters()]


def _restore(model: CycleGanModel, snap: list[np.ndarray]) -> None:
    params = [p for net in model.networks() for p in net.parameters()]
    for p, s in zip(params, snap):
        p[...] = s


def train(pool_a: np.ndarray, pool_b: np.ndarray, cfg: CycleGanTrainConfig,
          rng: np.random.Generator | None = None,
          scaler: FeatureScaler | None = None,
          ) -> tuple[CycleGanModel, list[dict]]:
    """Train on raw pooled vectors; the scaler is fitted on pool_a u pool_b.

    Returns the model and a per-epoch history of mean loss terms. A
    non-finite loss aborts with parameters rolled back to the end of the
    last completed epoch.
    """
    pool_a = np.asarray(pool_a, dtype=np.float32)
    pool_b = np.asarray(pool_b, dtype=np.float32)
    if pool_a.ndim != 2 or pool_b.ndim != 2 or not len(pool_a) or not len(pool_b):
        raise ValueError("both pools must be non-empty N x D matrices")
    if pool_a.shape[1] != pool_b.shape[1]:
        raise DimensionError(f"pool dims differ: {pool_a.shape} vs {pool_b.shape}")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if scaler is None:
        scaler = fit_scaler(np.concatenate([pool_a, pool_b]), cfg.scaler_margin)

    dim = pool_a.shape[1]
    model = CycleGanModel.build(dim, cfg, scaler, rng)
    scaled_a = scaler.scale(pool_a)
    scaled_b = scaler.scale(pool_b)

    opt_g = Adam.for_layers([model.g_a, model.g_b], cfg.lr)
    opt_d = Adam.for_layers([model.d_a, model.d_b], cfg.lr)
    iterations = max(1, -(-max(len(pool_a), len(pool_b)) // cfg.batch))

    history: list[dict] = []
    last_good = _snapshot(model)
    for epoch in range(cfg.epochs):
        sums = {k: 0.0 for k in ("gan_a", "gan_b", "cyc_a", "cyc_b", "id_a",
                                 "id_b", "total", "d_a", "d_b")}
        try:
            for _ in range(iterations):
                idx_a = rng.integers(0, len(scaled_a), cfg.batch)
                idx_b = rng.integers(0, len(scaled_b), cfg.batch)
                batch_a = scaled_a[idx_a]
                batch_b = scaled_b[idx_b]
                loss_d_a, loss_d_b = discriminator_step(model, batch_a, batch_b,
                                                        opt_d)
                terms = generator_step(model, batch_a, batch_b, opt_g)
                for key, value in terms.as_dict().items():
                    sums[key] += value
                sums["d_a"] += loss_d_a
                sums["d_b"] += loss_d_b
        except NonFiniteError:
            _restore(model, last_good)
            raise
        entry = {"epoch": epoch}
        entry.update({k: v / iterations for k, v in sums.items()})
        history.append(entry)
        last_good = _snapshot(model)
    return model, history
