"""The four architecture variants, the loss, and the checkpoint format.

Every variant encodes the drug graph to a 128-vector. The protein is
encoded by the token CNN (``BaselineCnn``) or by projecting a pooled
language-model embedding (the other three). The contact variants add a
third 128-vector from a pooled contact map. The concatenation goes
through dense 1024 -> dense 512 -> dense 1, with relu and dropout on the
hidden layers.

Checkpoint layout (little-endian)::

    b"PGDTA1\\0\\0" | u8 variant tag | u32 n | n x u32 config values |
    u32 tensor count | per tensor: u32 rank, rank x u32 dims, float64 data

Tensors are stored in :meth:`Model.parameters` order: drug graph layers,
drug dense, protein branch, contact dense (contact variants only), then
the three head layers.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .contact import DEFAULT_GRID
from .errors import CheckpointError, EmptyBatch, LengthMismatch, MissingInput
from .gnn import DrugEncoderParams, GraphBatch, encode_drug_batch
from .layers import Dense
from .protein import DEFAULT_MAX_LEN, CnnEncoderParams, cnn_encode_batch
from .tensor import Tensor, concat, dropout, mean, relu, reshape, square, sub

CHECKPOINT_MAGIC = b"PGDTA1\0\0"


class Variant(enum.Enum):
    BASELINE_CNN = "BaselineCnn"
    PGRAPHDTA = "PGraphDta"
    PGRAPHDTA_CM1 = "PGraphDtaCm1"
    PGRAPHDTA_CM2 = "PGraphDtaCm2"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for v in cls:
            if v.value.lower() == str(value).lower():
                return v
        raise ValueError(f"unknown variant {value!r}; choose from {[v.value for v in cls]}")

    @property
    def tag(self):
        return list(Variant).index(self)

    @property
    def uses_cnn(self):
        return self is Variant.BASELINE_CNN

    @property
    def uses_plm(self):
        return self is not Variant.BASELINE_CNN

    @property
    def uses_contact(self):
        return self in (Variant.PGRAPHDTA_CM1, Variant.PGRAPHDTA_CM2)


_GNN_CODES = ("gat", "gcn")
_POOL_CODES = ("mean", "max")


@dataclass(frozen=True)
class ModelConfig:
    gnn: str = "gat"
    gat_heads: tuple = (4, 4, 1)
    gat_widths: tuple = (32, 32, 128)
    gcn_widths: tuple = (78, 156, 312)
    drug_dim: int = 128
    embed_dim: int = 128
    cnn_filters: tuple = (32, 64, 96)
    kernel: int = 8
    max_len: int = DEFAULT_MAX_LEN
    protein_dim: int = 128
    plm_dim: int = 1024
    plm_pool: str = "mean"
    grid: int = DEFAULT_GRID
    contact_dim: int = 128
    head: tuple = (1024, 512)
    dropout: float = 0.2
    leaky_slope: float = 0.2

    def to_u32(self):
        out = [_GNN_CODES.index(self.gnn)]
        for name in ("gat_heads", "gat_widths", "gcn_widths"):
            seq = getattr(self, name)
            out += [len(seq), *seq]
        out += [self.drug_dim, self.embed_dim, len(self.cnn_filters), *self.cnn_filters,
                self.kernel, self.max_len, self.protein_dim, self.plm_dim,
                _POOL_CODES.index(self.plm_pool), self.grid, self.contact_dim,
                len(self.head), *self.head,
                round(self.dropout * 1e6), round(self.leaky_slope * 1e6)]
        return out

    @classmethod
    def from_u32(cls, values):
        it = iter(values)

        def take(n=None):
            if n is None:
                return next(it)
            return tuple(next(it) for _ in range(n))

        kw = {"gnn": _GNN_CODES[take()]}
        for name in ("gat_heads", "gat_widths", "gcn_widths"):
            kw[name] = take(take())
        kw["drug_dim"] = take()
        kw["embed_dim"] = take()
        kw["cnn_filters"] = take(take())
        for name in ("kernel", "max_len", "protein_dim", "plm_dim"):
            kw[name] = take()
        kw["plm_pool"] = _POOL_CODES[take()]
        kw["grid"] = take()
        kw["contact_dim"] = take()
        kw["head"] = take(take())
        kw["dropout"] = take() / 1e6
        kw["leaky_slope"] = take() / 1e6
        return cls(**kw)

    def with_overrides(self, **kw):
        return replace(self, **kw)


@dataclass
class Batch:
    """Model inputs for a group of samples, already featurised."""

    graphs: GraphBatch
    tokens: np.ndarray = None
    plm: np.ndarray = None
    contact: np.ndarray = None
    targets: np.ndarray = None

    def __len__(self):
        return self.graphs.n_graphs


@dataclass
class Model:
    variant: Variant
    config: ModelConfig
    drug: DrugEncoderParams
    protein: object
    contact: Dense = None
    head: list = field(default_factory=list)

    @classmethod
    def init(cls, variant, config, rng):
        variant = Variant.parse(variant)
        c = config
        drug = DrugEncoderParams.init(rng, c.gnn, 78, c.gat_heads, c.gat_widths,
                                      c.gcn_widths, c.drug_dim, c.leaky_slope)
        if variant.uses_cnn:
            protein = CnnEncoderParams.init(rng, c.embed_dim, c.cnn_filters, c.kernel, c.protein_dim)
        else:
            protein = Dense.init(rng, c.plm_dim, c.protein_dim, "protein.projection")
        contact = None
        width = c.drug_dim + c.protein_dim
        if variant.uses_contact:
            contact = Dense.init(rng, c.grid * c.grid, c.contact_dim, "contact.dense")
            width += c.contact_dim
        head = []
        for k, w in enumerate(c.head):
            head.append(Dense.init(rng, width, w, f"head.fc{k}"))
            width = w
        head.append(Dense.init(rng, width, 1, "head.out"))
        return cls(variant, config, drug, protein, contact, head)

    def parameters(self):
        out = self.drug.tensors() + self.protein.tensors()
        if self.contact is not None:
            out += self.contact.tensors()
        for layer in self.head:
            out += layer.tensors()
        return out

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def forward_batch(self, batch, training=False, rng=None):
        """Predicted affinities, a (batch,) tensor."""
        v = self.variant
        if v.uses_cnn and batch.tokens is None:
            raise MissingInput(f"{v.value} needs token ids")
        if v.uses_plm and batch.plm is None:
            raise MissingInput(f"{v.value} needs language-model embeddings")
        if v.uses_contact and batch.contact is None:
            raise MissingInput(f"{v.value} needs a contact map")
        parts = [encode_drug_batch(batch.graphs, self.drug)]
        if v.uses_cnn:
            parts.append(cnn_encode_batch(batch.tokens, self.protein))
        else:
            parts.append(relu(self.protein(Tensor(batch.plm))))
        if v.uses_contact:
            parts.append(relu(self.contact(Tensor(batch.contact))))
        x = concat(parts, axis=1)
        p = self.config.dropout
        for layer in self.head[:-1]:
            x = dropout(relu(layer(x)), p, rng, training)
        out = self.head[-1](x)
        return reshape(out, (len(batch),))


def forward(batch, variant, model, training=False, rng=None):
    """Run ``model`` on ``batch``; ``variant`` must match the model's."""
    if Variant.parse(variant) is not model.variant:
        raise MissingInput(f"model is {model.variant.value}, asked for {Variant.parse(variant).value}")
    return model.forward_batch(batch, training, rng)


def mse_loss(predictions, targets):
    """Mean of squared differences; differentiable in ``predictions``."""
    predictions = predictions if isinstance(predictions, Tensor) else Tensor(predictions)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if predictions.size != targets.size:
        raise LengthMismatch(f"{predictions.size} predictions vs {targets.size} targets")
    if targets.size == 0:
        raise EmptyBatch("mse_loss of an empty batch")
    return mean(square(sub(reshape(predictions, (targets.size,)), targets)))


# -- checkpoints ----------------------------------------------------------------------

def checkpoint_bytes(model):
    cfg = model.config.to_u32()
    parts = [CHECKPOINT_MAGIC, struct.pack("<B", model.variant.tag),
             struct.pack(f"<I{len(cfg)}I", len(cfg), *cfg)]
    params = model.parameters()
    parts.append(struct.pack("<I", len(params)))
    for p in params:
        parts.append(struct.pack(f"<I{p.ndim}I", p.ndim, *p.shape))
        parts.append(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(blob):
    if blob[:8] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a model checkpoint (bad magic)")
    try:
        variant = list(Variant)[blob[8]]
        pos = 9
        (n,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        cfg = struct.unpack_from(f"<{n}I", blob, pos)
        pos += 4 * n
        config = ModelConfig.from_u32(cfg)
        (count,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        arrays = []
        for _ in range(count):
            (rank,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            shape = struct.unpack_from(f"<{rank}I", blob, pos)
            pos += 4 * rank
            size = int(np.prod(shape))
            if pos + 8 * size > len(blob):
                raise struct.error("tensor data cut short")
            arrays.append(np.frombuffer(blob, "<f8", size, pos).reshape(shape).astype(np.float64))
            pos += 8 * size
    except (struct.error, IndexError, StopIteration) as exc:
        raise CheckpointError(f"truncated or corrupt checkpoint: {exc}") from None
    if pos != len(blob):
        raise CheckpointError(f"{len(blob) - pos} trailing bytes after the last tensor")
    model = Model.init(variant, config, np.random.default_rng(0))
    params = model.parameters()
    if len(params) != len(arrays):
        raise CheckpointError(f"checkpoint holds {len(arrays)} tensors, "
                              f"{variant.value} needs {len(params)}")
    for p, a in zip(params, arrays):
        if p.shape != a.shape:
            raise CheckpointError(f"tensor {p.name} has shape {a.shape}, expected {p.shape}")
        p.data = a
    return model


def model_config_fields():
    return [f.name for f in fields(ModelConfig)]
