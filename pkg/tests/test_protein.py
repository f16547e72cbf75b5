import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgdta import protein as P
from pgdta.errors import (BadMagic, DimMismatch, DuplicateId, EmbeddingFormatError, InvalidResidue,
                          ShapeMismatch, TruncatedFile)
from pgdta.layers import Dense
from pgdta.tensor import Tensor


def test_tokenize_pad_and_truncate():
    t = P.tokenize(P.ProteinSequence("p", "ACD"), 5)
    assert list(t.ids) == [1, P.TOKEN_ID["C"], P.TOKEN_ID["D"], 0, 0] and t.length == 3
    long = P.ProteinSequence("q", "ACDEFGHIKL" * 120)
    t = P.tokenize(long, 1000)
    assert len(t.ids) == 1000 and t.length == 1200
    assert P.detokenize(t.ids) == long.residues[:1000]


def test_alphabet_and_invalid_residues():
    assert len(P.ALPHABET) == 25 and set(P.TOKEN_ID.values()) == set(range(1, 26))
    P.ProteinSequence("ok", "AXB")
    for bad in ("", "AJ", "ac", "A C"):
        with pytest.raises(InvalidResidue):
            P.ProteinSequence("bad", bad)


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet=P.ALPHABET, min_size=1, max_size=40), st.integers(1, 50))
def test_tokenize_round_trip(residues, max_len):
    t = P.tokenize(P.ProteinSequence("x", residues), max_len)
    assert len(t.ids) == max_len and t.length == len(residues)
    assert P.detokenize(t.ids) == residues[:max_len]


def test_cnn_encoder_shapes_and_all_pad():
    rng = np.random.default_rng(0)
    params = P.CnnEncoderParams.init(rng)
    assert params.receptive_field == 22
    assert (params.table.data[P.PAD_ID] == 0).all()
    tokens = P.tokenize(P.ProteinSequence("p", "MKTAYIAKQR" * 5), 100)
    out = P.cnn_encoder(tokens, params)
    assert out.shape == (128,) and np.isfinite(out.data).all()
    pad = P.cnn_encoder(np.zeros(100, dtype=np.int64), params)
    assert np.isfinite(pad.data).all()
    with pytest.raises(ShapeMismatch):
        P.cnn_encoder(np.zeros(10, dtype=np.int64), params)


def test_cnn_batch_equals_single():
    rng = np.random.default_rng(1)
    params = P.CnnEncoderParams.init(rng, 8, (4, 4, 4), 3, 6)
    seqs = ["MKTAYIAKQRQISFVKSHFS", "GSHMLEDP", "ACDEFGHIKLMNPQRSTVWY"]
    ids = np.stack([P.tokenize(P.ProteinSequence(str(k), s), 30).ids for k, s in enumerate(seqs)])
    batched = P.cnn_encode_batch(ids, params).data
    for k in range(3):
        np.testing.assert_allclose(batched[k], P.cnn_encoder(ids[k], params).data, atol=1e-12)


# -- embedding files -------------------------------------------------------------------

def test_single_record_file(tmp_path):
    path = tmp_path / "one.plm"
    P.write_embeddings(path, [P.EmbeddingMatrix("P1", [[1, 2, 3, 4]])])
    m = P.load_embeddings(path)
    assert list(m) == ["P1"]
    np.testing.assert_array_equal(m["P1"].rows, [[1, 2, 3, 4]])


def test_binary_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    mats = [P.EmbeddingMatrix(f"id{k}", rng.standard_normal((k + 1, 5)).astype(np.float32))
            for k in range(4)]
    mats.append(P.EmbeddingMatrix("nan-free-extremes", np.array(
        [[np.float32(1e-45), -0.0, np.finfo(np.float32).max, np.finfo(np.float32).tiny, 1.0]])))
    path = tmp_path / "e.plm"
    P.write_embeddings(path, mats)
    back = P.load_embeddings(path)
    for m in mats:
        assert back[m.protein_id].rows.tobytes() == m.rows.tobytes()
    again = tmp_path / "again.plm"
    P.write_embeddings(again, list(back.values()))
    assert again.read_bytes() == path.read_bytes()


def test_text_format_round_trip(tmp_path):
    mats = [P.EmbeddingMatrix("A", [[0.5, -1.25, 3.0]]), P.EmbeddingMatrix("B", [[1, 2, 3]])]
    path = tmp_path / "e.tsv"
    P.write_embeddings_text(path, mats)
    back = P.load_embeddings(path)
    for m in mats:
        assert back[m.protein_id].rows.tobytes() == m.rows.tobytes()


def test_truncated_by_record_count(tmp_path):
    path = tmp_path / "t.plm"
    P.write_embeddings(path, [P.EmbeddingMatrix(f"p{k}", [[float(k)] * 3]) for k in range(7)])
    blob = bytearray(path.read_bytes())
    blob[8:12] = struct.pack("<I", 8)
    path.write_bytes(bytes(blob))
    with pytest.raises(TruncatedFile):
        P.load_embeddings(path)


@pytest.mark.parametrize("cut", [9, 12, 13, 16, 25, -1])
def test_truncated_anywhere(tmp_path, cut):
    path = tmp_path / "t.plm"
    P.write_embeddings(path, [P.EmbeddingMatrix("prot", np.ones((2, 3)))])
    path.write_bytes(path.read_bytes()[:cut])
    with pytest.raises(TruncatedFile):
        P.load_embeddings(path)


def test_bad_magic_duplicate_dim_trailing(tmp_path):
    bad = tmp_path / "bad.plm"
    bad.write_bytes(b"NOTMAGIC" + b"\0" * 8)
    with pytest.raises(BadMagic):
        P.load_embeddings(bad)
    dup = tmp_path / "dup.plm"
    P.write_embeddings(dup, [P.EmbeddingMatrix("x", [[1.0]]), P.EmbeddingMatrix("x", [[2.0]])])
    with pytest.raises(DuplicateId):
        P.load_embeddings(dup)
    mixed = tmp_path / "mixed.plm"
    P.write_embeddings(mixed, [P.EmbeddingMatrix("a", [[1.0, 2.0]]), P.EmbeddingMatrix("b", [[1.0]])])
    with pytest.raises(DimMismatch):
        P.load_embeddings(mixed)
    text = tmp_path / "bad.tsv"
    text.write_text("a\t3\t1,2\n")
    with pytest.raises(DimMismatch):
        P.load_embeddings(text)
    tail = tmp_path / "tail.plm"
    P.write_embeddings(tail, [P.EmbeddingMatrix("a", [[1.0]])])
    tail.write_bytes(tail.read_bytes() + b"\0")
    with pytest.raises(EmbeddingFormatError):
        P.load_embeddings(tail)


def test_pooling_and_projection():
    np.testing.assert_array_equal(P.pool_embedding(P.EmbeddingMatrix("a", [[3, 4]])).data, [3, 4])
    np.testing.assert_array_equal(P.pool_embedding(P.EmbeddingMatrix("a", [[0, 2], [4, 0]])).data,
                                  [2, 1])
    np.testing.assert_array_equal(
        P.pool_embedding(P.EmbeddingMatrix("a", [[0, 2], [4, 0]]), "max").data, [4, 2])
    rng = np.random.default_rng(3)
    dense = Dense.init(rng, 6, 4)
    dense.bias.data[:] = 0
    np.testing.assert_array_equal(P.project_embedding(Tensor(np.zeros(6)), dense).data, 0)
    with pytest.raises(ShapeMismatch):
        P.project_embedding(Tensor(np.zeros(5)), dense)


def test_pseudo_embedding_is_deterministic():
    s = P.ProteinSequence("p", "MKTAYIAKQR")
    a = P.pseudo_embedding(s, 16)
    assert a.shape == (1, 16) and a.dtype == np.float32
    assert a.tobytes() == P.pseudo_embedding("MKTAYIAKQR", 16).tobytes()
    assert P.pseudo_embedding(s, 16, per_residue=True).shape == (10, 16)
    assert not np.array_equal(a, P.pseudo_embedding("MKTAYIAKQK", 16))
