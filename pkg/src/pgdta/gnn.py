"""Graph convolution / graph attention layers and the drug encoder.

Layers run on edge lists so a batch of molecules is just their disjoint
union (:class:`GraphBatch`). The dense-adjacency entry points
:func:`gcn_forward` and :func:`gat_forward` wrap the same edge code.
Self-loops are always added inside the layers; input adjacency must not
carry them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraph, ShapeMismatch
from .layers import Dense, uniform
from .tensor import (
    Tensor,
    add,
    elu,
    leaky_relu,
    matmul,
    mul,
    reduce,
    relu,
    reshape,
    segment_reduce,
    segment_softmax,
    segment_sum,
    take_rows,
)


@dataclass
class GcnLayerParams:
    weight: Tensor
    bias: Tensor

    @classmethod
    def init(cls, rng, d_in, d_out, name="gcn"):
        return cls(uniform(rng, (d_in, d_out), d_in, f"{name}.weight"),
                   uniform(rng, (d_out,), d_in, f"{name}.bias"))

    def tensors(self):
        return [self.weight, self.bias]


@dataclass
class GatLayerParams:
    weight: Tensor
    attention_src: Tensor
    attention_dst: Tensor
    bias: Tensor
    heads: int
    leaky_slope: float = 0.2

    @classmethod
    def init(cls, rng, d_in, heads, d_head, leaky_slope=0.2, name="gat"):
        width = heads * d_head
        return cls(
            uniform(rng, (d_in, width), d_in, f"{name}.weight"),
            uniform(rng, (heads, d_head), d_head, f"{name}.attention_src"),
            uniform(rng, (heads, d_head), d_head, f"{name}.attention_dst"),
            uniform(rng, (width,), d_in, f"{name}.bias"),
            heads,
            leaky_slope,
        )

    @property
    def d_head(self):
        return self.attention_src.shape[1]

    def tensors(self):
        return [self.weight, self.attention_src, self.attention_dst, self.bias]


@dataclass
class GraphBatch:
    """Disjoint union of molecular graphs.

    ``src``/``dst`` hold both directions of every bond (no self-loops);
    nodes of graph ``k`` occupy rows ``offsets[k]:offsets[k+1]``.
    """

    features: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    offsets: np.ndarray

    @property
    def n_nodes(self):
        return self.features.shape[0]

    @property
    def n_graphs(self):
        return len(self.offsets) - 1

    @classmethod
    def from_graphs(cls, graphs):
        """``graphs`` is a sequence of (features, src, dst) triples."""
        feats, srcs, dsts, offsets = [], [], [], [0]
        for features, src, dst in graphs:
            if len(features) == 0:
                raise EmptyGraph("molecular graph with no atoms")
            base = offsets[-1]
            feats.append(features)
            srcs.append(np.asarray(src, dtype=np.intp) + base)
            dsts.append(np.asarray(dst, dtype=np.intp) + base)
            offsets.append(base + len(features))
        return cls(np.concatenate(feats), np.concatenate(srcs),
                   np.concatenate(dsts), np.asarray(offsets, dtype=np.intp))

    @classmethod
    def from_dense(cls, features, adjacency):
        adjacency = np.asarray(adjacency, dtype=bool)
        n = len(features)
        if adjacency.shape != (n, n):
            raise ShapeMismatch(f"adjacency {adjacency.shape} for {n} nodes")
        src, dst = np.nonzero(adjacency)
        return cls.from_graphs([(np.asarray(features, dtype=np.float64), src, dst)])


def _self_looped(src, dst, n):
    loops = np.arange(n, dtype=np.intp)
    return np.concatenate([src, loops]), np.concatenate([dst, loops])


def gcn_layer(x, src, dst, n, params):
    """out = D^-1/2 (A+I) D^-1/2 x W + b on an edge list."""
    if x.shape[1] != params.weight.shape[0]:
        raise ShapeMismatch(f"gcn: features {x.shape} vs weight {params.weight.shape}")
    src, dst = _self_looped(src, dst, n)
    deg = np.bincount(dst, minlength=n).astype(np.float64)
    norm = 1.0 / np.sqrt(deg[src] * deg[dst])
    xw = matmul(x, params.weight)
    messages = mul(take_rows(xw, src), norm[:, None])
    return add(segment_sum(messages, dst, n), params.bias)


def gat_layer(x, src, dst, n, params, return_attention=False):
    """Multi-head attention over each node's closed neighbourhood.

    For centre node i and neighbour j (including i itself):
    e_ij = leaky_relu(a_src . W h_i + a_dst . W h_j), alpha = softmax over j,
    out_i = sum_j alpha_ij W h_j, heads concatenated then bias added.
    """
    heads, d_head = params.heads, params.d_head
    if x.shape[1] != params.weight.shape[0] or params.weight.shape[1] != heads * d_head:
        raise ShapeMismatch(f"gat: features {x.shape} vs weight {params.weight.shape}")
    src, dst = _self_looped(src, dst, n)
    wh = reshape(matmul(x, params.weight), (n, heads, d_head))
    score_centre = reduce(mul(wh, params.attention_src), "sum", axis=2)
    score_neigh = reduce(mul(wh, params.attention_dst), "sum", axis=2)
    logits = leaky_relu(add(take_rows(score_centre, dst), take_rows(score_neigh, src)),
                        params.leaky_slope)
    alpha = segment_softmax(logits, dst, n)
    messages = mul(take_rows(wh, src), reshape(alpha, (len(src), heads, 1)))
    out = add(reshape(segment_sum(messages, dst, n), (n, heads * d_head)), params.bias)
    if return_attention:
        return out, (src, dst, alpha.data)
    return out


def _check_features(features, adjacency):
    features = features if isinstance(features, Tensor) else Tensor(features)
    adjacency = np.asarray(adjacency, dtype=bool)
    n = features.shape[0]
    if adjacency.shape != (n, n):
        raise ShapeMismatch(f"adjacency {adjacency.shape} for {n} nodes")
    src, dst = np.nonzero(adjacency)
    return features, src, dst, n


def gcn_forward(features, adjacency, params):
    features, src, dst, n = _check_features(features, adjacency)
    return gcn_layer(features, src, dst, n, params)


def gat_forward(features, adjacency, params):
    features, src, dst, n = _check_features(features, adjacency)
    return gat_layer(features, src, dst, n, params)


def attention_matrix(features, adjacency, params):
    """Dense (heads, N, N) attention weights; row i is node i's distribution."""
    features, src, dst, n = _check_features(features, adjacency)
    _, (src, dst, alpha) = gat_layer(features, src, dst, n, params, return_attention=True)
    dense = np.zeros((params.heads, n, n))
    dense[:, dst, src] = alpha.T
    return dense


def global_pool(features, mode="max"):
    """Column-wise readout of an (N, d) node matrix into a (d,) vector."""
    features = features if isinstance(features, Tensor) else Tensor(features)
    if features.shape[0] == 0:
        raise EmptyGraph("cannot pool an empty graph")
    if mode not in ("mean", "max"):
        raise ValueError(f"unknown pooling mode {mode!r}")
    return reduce(features, mode, axis=0)


@dataclass
class DrugEncoderParams:
    kind: str
    layers: list
    dense: Dense

    @classmethod
    def init(cls, rng, kind="gat", in_dim=78, gat_heads=(4, 4, 1),
             gat_widths=(32, 32, 128), gcn_widths=(78, 156, 312), out_dim=128,
             leaky_slope=0.2):
        layers = []
        d = in_dim
        if kind == "gat":
            if len(gat_heads) != len(gat_widths):
                raise ShapeMismatch("gat_heads and gat_widths differ in length")
            for k, (h, w) in enumerate(zip(gat_heads, gat_widths)):
                layers.append(GatLayerParams.init(rng, d, h, w, leaky_slope, f"drug.gat{k}"))
                d = h * w
        elif kind == "gcn":
            for k, w in enumerate(gcn_widths):
                layers.append(GcnLayerParams.init(rng, d, w, f"drug.gcn{k}"))
                d = w
        else:
            raise ValueError(f"unknown graph layer kind {kind!r}")
        return cls(kind, layers, Dense.init(rng, d, out_dim, "drug.dense"))

    def tensors(self):
        out = []
        for layer in self.layers:
            out.extend(layer.tensors())
        return out + self.dense.tensors()


def encode_drug_batch(batch, params):
    """(n_graphs, d_drug) drug vectors: graph layers + elu, max pool, dense + relu."""
    x = Tensor(batch.features)
    n = batch.n_nodes
    for layer in params.layers:
        if params.kind == "gat":
            x = gat_layer(x, batch.src, batch.dst, n, layer)
        else:
            x = gcn_layer(x, batch.src, batch.dst, n, layer)
        x = elu(x)
    pooled = segment_reduce(x, batch.offsets, "max")
    return relu(params.dense(pooled))


def drug_encoder(features, adjacency, params):
    """Encode one molecule given its feature matrix and bond adjacency."""
    batch = GraphBatch.from_dense(features, adjacency)
    return reshape(encode_drug_batch(batch, params), (params.dense.d_out,))
