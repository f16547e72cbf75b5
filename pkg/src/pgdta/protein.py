"""Protein sequence encoders.

Two routes into the fusion head: a token CNN over padded sequences, and
frozen language-model embeddings read from disk, pooled, then projected.

Binary embedding file (little-endian)::

    b"PLMEMB1\\0" | u32 record_count |
    per record: u16 id_len | id (UTF-8) | u32 n_rows | u32 dim | n_rows*dim float32

The plain-text variant holds one pre-pooled record per line:
``id<TAB>dim<TAB>v1,v2,...``.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (BadMagic, DimMismatch, DuplicateId, EmbeddingFormatError, InvalidResidue,
                     ShapeMismatch, TruncatedFile)
from .layers import Dense, uniform
from .tensor import Tensor, conv1d, embedding, reduce, relu, reshape

ALPHABET = "ABCDEFGHIKLMNOPQRSTUVWXYZ"
TOKEN_ID = {aa: k for k, aa in enumerate(ALPHABET, start=1)}
PAD_ID = 0
DEFAULT_MAX_LEN = 1000

EMBEDDING_MAGIC = b"PLMEMB1\0"
TEXT_SUFFIXES = (".txt", ".tsv")


@dataclass(frozen=True)
class ProteinSequence:
    id: str
    residues: str

    def __post_init__(self):
        if not self.residues:
            raise InvalidResidue(f"protein {self.id!r} has an empty sequence")
        for pos, aa in enumerate(self.residues):
            if aa not in TOKEN_ID:
                raise InvalidResidue(f"protein {self.id!r}: invalid residue {aa!r} at {pos}")


@dataclass
class TokenizedSequence:
    ids: np.ndarray
    length: int


def tokenize(seq, max_len=DEFAULT_MAX_LEN):
    """Map residues to ids 1..25, keep the prefix, right-pad with 0."""
    residues = seq.residues if isinstance(seq, ProteinSequence) else ProteinSequence("?", seq).residues
    ids = np.zeros(max_len, dtype=np.int64)
    kept = residues[:max_len]
    ids[:len(kept)] = [TOKEN_ID[aa] for aa in kept]
    return TokenizedSequence(ids, len(residues))


def detokenize(ids):
    return "".join(ALPHABET[i - 1] for i in ids if i != PAD_ID)


# -- CNN branch -----------------------------------------------------------------

@dataclass
class CnnEncoderParams:
    table: Tensor
    conv_weights: list
    conv_biases: list
    dense: Dense

    @classmethod
    def init(cls, rng, embed_dim=128, filters=(32, 64, 96), kernel=8, out_dim=128):
        table = uniform(rng, (len(ALPHABET) + 1, embed_dim), embed_dim, "protein.embedding")
        table.data[PAD_ID] = 0.0
        weights, biases = [], []
        c_in = embed_dim
        for k, f in enumerate(filters):
            fan_in = c_in * kernel
            weights.append(uniform(rng, (kernel, c_in, f), fan_in, f"protein.conv{k}.weight"))
            biases.append(uniform(rng, (f,), fan_in, f"protein.conv{k}.bias"))
            c_in = f
        return cls(table, weights, biases, Dense.init(rng, c_in, out_dim, "protein.dense"))

    @property
    def receptive_field(self):
        return sum(w.shape[0] - 1 for w in self.conv_weights) + 1

    def tensors(self):
        out = [self.table]
        for w, b in zip(self.conv_weights, self.conv_biases):
            out.extend([w, b])
        return out + self.dense.tensors()


def cnn_encode_batch(ids, params):
    """(batch, L) token ids -> (batch, d_prot)."""
    ids = np.atleast_2d(ids)
    if ids.shape[1] < params.receptive_field:
        raise ShapeMismatch(f"sequence length {ids.shape[1]} below receptive field "
                            f"{params.receptive_field}")
    x = embedding(params.table, ids, frozen_rows=(PAD_ID,))
    for w, b in zip(params.conv_weights, params.conv_biases):
        x = relu(conv1d(x, w, b))
    return relu(params.dense(reduce(x, "max", axis=1)))


def cnn_encoder(tokens, params):
    ids = tokens.ids if isinstance(tokens, TokenizedSequence) else np.asarray(tokens)
    return reshape(cnn_encode_batch(ids[None, :], params), (params.dense.d_out,))


# -- language-model embeddings ---------------------------------------------------

@dataclass
class EmbeddingMatrix:
    protein_id: str
    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float32))
        if self.rows.shape[1] == 0 or self.rows.shape[0] == 0:
            raise DimMismatch(f"embedding {self.protein_id!r} is empty")
        if not np.isfinite(self.rows).all():
            raise DimMismatch(f"embedding {self.protein_id!r} has non-finite entries")

    @property
    def dim(self):
        return self.rows.shape[1]


def write_embeddings(path, matrices):
    """Write matrices in the binary format (the companion of load_embeddings)."""
    parts = [EMBEDDING_MAGIC, struct.pack("<I", len(matrices))]
    for m in matrices:
        key = m.protein_id.encode("utf-8")
        rows = np.ascontiguousarray(m.rows, dtype="<f4")
        parts.append(struct.pack("<H", len(key)) + key)
        parts.append(struct.pack("<II", rows.shape[0], rows.shape[1]))
        parts.append(rows.tobytes())
    Path(path).write_bytes(b"".join(parts))


def write_embeddings_text(path, matrices):
    lines = []
    for m in matrices:
        if m.rows.shape[0] != 1:
            raise DimMismatch("the text format only holds pre-pooled (1-row) embeddings")
        values = ",".join(repr(float(v)) for v in m.rows[0])
        lines.append(f"{m.protein_id}\t{m.dim}\t{values}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_binary(blob, source):
    if blob[:8] != EMBEDDING_MAGIC:
        raise BadMagic(f"{source}: not an embedding file (bad magic)")
    if len(blob) < 12:
        raise TruncatedFile(f"{source}: header cut short")
    (count,) = struct.unpack_from("<I", blob, 8)
    pos = 12
    out = []
    for k in range(count):
        try:
            (id_len,) = struct.unpack_from("<H", blob, pos)
            pos += 2
            key = blob[pos:pos + id_len]
            if len(key) != id_len:
                raise struct.error
            pos += id_len
            n_rows, dim = struct.unpack_from("<II", blob, pos)
            pos += 8
        except struct.error:
            raise TruncatedFile(f"{source}: header declares {count} records, "
                                f"data ends inside record {k + 1}") from None
        nbytes = 4 * n_rows * dim
        if pos + nbytes > len(blob):
            raise TruncatedFile(f"{source}: record {k + 1} of {count} is cut short")
        rows = np.frombuffer(blob, dtype="<f4", count=n_rows * dim, offset=pos)
        pos += nbytes
        out.append(EmbeddingMatrix(key.decode("utf-8"), rows.reshape(n_rows, dim)))
    if pos != len(blob):
        raise EmbeddingFormatError(f"{source}: {len(blob) - pos} bytes after the last declared record")
    return out


def _parse_text(text, source):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 3:
            raise DimMismatch(f"{source}:{lineno}: expected id, dim and values")
        key, dim, values = fields
        vec = np.array([float(v) for v in values.split(",")], dtype=np.float32)
        if len(vec) != int(dim):
            raise DimMismatch(f"{source}:{lineno}: declared dim {dim}, found {len(vec)} values")
        out.append(EmbeddingMatrix(key, vec[None, :]))
    return out


def load_embeddings(path):
    """Read an embedding file into ``{protein_id: EmbeddingMatrix}``."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != EMBEDDING_MAGIC and path.suffix in TEXT_SUFFIXES:
        records = _parse_text(blob.decode("utf-8"), path)
    else:
        records = _parse_binary(blob, path)
    out = {}
    dim = None
    for m in records:
        if m.protein_id in out:
            raise DuplicateId(f"{path}: protein id {m.protein_id!r} appears twice")
        if dim is not None and m.dim != dim:
            raise DimMismatch(f"{path}: record {m.protein_id!r} has dim {m.dim}, expected {dim}")
        dim = m.dim
        out[m.protein_id] = m
    return out


def pool_embedding(m, mode="mean"):
    """Per-dimension reduction over residues; 1-row inputs pass through."""
    rows = m.rows if isinstance(m, EmbeddingMatrix) else np.atleast_2d(m)
    rows = rows.astype(np.float64)
    if rows.shape[0] == 1:
        return Tensor(rows[0])
    if mode == "mean":
        return Tensor(rows.mean(axis=0))
    if mode == "max":
        return Tensor(rows.max(axis=0))
    raise ValueError(f"unknown pooling mode {mode!r}")


def project_embedding(v, params):
    """Dense + relu from the language-model width to d_prot."""
    v = v if isinstance(v, Tensor) else Tensor(v)
    if v.shape[-1] != params.d_in:
        raise ShapeMismatch(f"embedding dim {v.shape[-1]} vs projection input {params.d_in}")
    if v.ndim == 1:
        return reshape(relu(params(reshape(v, (1, v.shape[0])))), (params.d_out,))
    return relu(params(v))


def pseudo_embedding(sequence, dim, per_residue=False):
    """Deterministic stand-in for a language-model embedding.

    The sequence hash seeds a Gaussian generator, so identical sequences get
    identical matrices across runs and machines.
    """
    residues = sequence.residues if isinstance(sequence, ProteinSequence) else sequence
    seed = int.from_bytes(hashlib.sha256(residues.encode("ascii")).digest()[:8], "little")
    rng = np.random.default_rng(seed)
    n_rows = len(residues) if per_residue else 1
    return rng.standard_normal((n_rows, dim)).astype(np.float32)
