"""Mini-batch Adam training, evaluation, and training history.

One seed fixes the whole run: it is split into independent streams for
parameter initialisation, per-epoch shuffling and dropout masks.
"""

from __future__ import annotations

import io
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyDataset, ShapeMismatch
from .features import FeatureStore, collate
from .model import Model, ModelConfig, Variant, mse_loss
from .tensor import no_grad

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    variant: Variant = Variant.PGRAPHDTA
    epochs: int = 1500
    batch_size: int = 128
    learning_rate: float = 5e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    eval_every: int = 1
    early_stop_patience: int = None

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        if self.epochs < 1 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("epochs, batch_size and eval_every must be positive")
        if not self.learning_rate > 0 or not self.adam_eps > 0:
            raise ValueError("learning_rate and adam_eps must be positive")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be positive")


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params, grads, state, lr=5e-4, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, in place on ``params`` and ``state``."""
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ShapeMismatch("params, grads and Adam state differ in length")
    state.step += 1
    t = state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if not p.shape == g.shape == m.shape == v.shape:
            raise ShapeMismatch(f"Adam shapes disagree: {p.shape}, {g.shape}, {m.shape}")
        m *= beta1
        m += (1 - beta1) * g
        v *= beta2
        v += (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    val_mse: float = None
    seconds: float = 0.0


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)

    def append(self, record):
        expected = len(self.records) + 1
        if record.epoch != expected:
            raise ValueError(f"epoch {record.epoch} recorded out of order (expected {expected})")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def to_csv(self, include_seconds=False):
        """CSV text. ``seconds`` is left blank unless asked for, so that
        identical runs produce identical files."""
        buf = io.StringIO()
        buf.write("epoch,train_mse,val_mse,seconds\n")
        for r in self.records:
            val = "" if r.val_mse is None else f"{r.val_mse:.17g}"
            secs = f"{r.seconds:.3f}" if include_seconds else ""
            buf.write(f"{r.epoch},{r.train_mse:.17g},{val},{secs}\n")
        return buf.getvalue()


def _streams(seed):
    init, shuffle, drop = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init), np.random.default_rng(shuffle),
            np.random.default_rng(drop))


def predict(model, prepared, batch_size=256):
    """Dropout-free predictions for prepared samples, in order."""
    out = []
    with no_grad():
        for lo in range(0, len(prepared), batch_size):
            batch = collate(prepared[lo:lo + batch_size])
            out.append(model.forward_batch(batch, training=False).data)
    return np.concatenate(out) if out else np.zeros(0)


def evaluate(model, prepared, variant=None, batch_size=256):
    """Mean squared error over ``prepared`` with dropout disabled."""
    if variant is not None and Variant.parse(variant) is not model.variant:
        raise ValueError(f"model is {model.variant.value}, not {Variant.parse(variant).value}")
    if len(prepared) == 0:
        raise EmptyDataset("cannot evaluate an empty dataset")
    preds = predict(model, prepared, batch_size)
    targets = np.array([s.target for s in prepared])
    return float(mse_loss(preds, targets).item())


def train(train_samples, config, model_config=None, val_samples=None, model=None, progress=None):
    """Fit a model on prepared samples.

    Returns ``(model, history)``. With validation samples, the returned
    parameters are those of the best validation epoch.
    """
    if len(train_samples) == 0:
        raise EmptyDataset("training split is empty")
    model_config = model_config or ModelConfig()
    init_rng, shuffle_rng, drop_rng = _streams(config.seed)
    if model is None:
        model = Model.init(config.variant, model_config, init_rng)
    params = model.parameters()
    state = AdamState.zeros_like([p.data for p in params])
    history = TrainingHistory()
    best_val, best_params, stale = None, None, 0
    n = len(train_samples)

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = shuffle_rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            batch = collate([train_samples[i] for i in order[lo:lo + config.batch_size]])
            model.zero_grad()
            loss = mse_loss(model.forward_batch(batch, training=True, rng=drop_rng), batch.targets)
            loss.backward()
            adam_step([p.data for p in params], [p.grad for p in params], state,
                      config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
            total += loss.item() * len(batch)
        record = EpochRecord(epoch, total / n)
        if val_samples and (epoch % config.eval_every == 0 or epoch == config.epochs):
            record.val_mse = evaluate(model, val_samples)
            if best_val is None or record.val_mse < best_val:
                best_val, stale = record.val_mse, 0
                best_params = [p.data.copy() for p in params]
            else:
                stale += 1
        record.seconds = time.perf_counter() - started
        history.append(record)
        if progress is not None:
            progress(record)
        if config.early_stop_patience is not None and stale >= config.early_stop_patience:
            log.info("early stop at epoch %d", epoch)
            break

    if best_params is not None:
        for p, saved in zip(params, best_params):
            p.data = saved
    model.zero_grad()
    return model, history


def prepare_and_train(train_bundle, config, model_config=None, val_bundle=None, **store_kw):
    """Featurise bundles (failing before epoch 1 on any bad sample) and train."""
    model_config = model_config or ModelConfig()
    store = FeatureStore(config.variant, model_config, **store_kw)
    train_samples = store.prepare(train_bundle)
    val_samples = store.prepare(val_bundle) if val_bundle is not None else None
    if config.variant.uses_plm and store.plm_dim != model_config.plm_dim:
        model_config = replace(model_config, plm_dim=store.plm_dim)
    model, history = train(train_samples, config, model_config, val_samples)
    return model, history, store
