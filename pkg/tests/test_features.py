import numpy as np
import pytest

from pgdta.contact import contact_features, contact_from_probabilities, parse_matrix
from pgdta.data import load_dataset
from pgdta.errors import UnresolvableSample
from pgdta.features import FeatureStore, collate
from pgdta.protein import load_embeddings, pool_embedding, pseudo_embedding
from pgdta.synthetic import write_dataset

from conftest import TOY


@pytest.fixture
def dataset(tmp_path):
    paths = write_dataset(tmp_path, n_samples=6, n_proteins=2, seed=3, kind="kiba")
    return tmp_path, load_dataset(*paths, kind="kiba")


def test_every_variant_prepares(dataset):
    root, bundle = dataset
    for variant, field in (("BaselineCnn", "tokens"), ("PGraphDta", "plm"),
                           ("PGraphDtaCm1", "contact"), ("PGraphDtaCm2", "contact")):
        store = FeatureStore(variant, TOY, sidecar_dir=root)
        prepared = store.prepare(bundle)
        assert len(prepared) == len(bundle)
        assert all(getattr(p, field) is not None for p in prepared)
        batch = collate(prepared)
        assert batch.targets.tolist() == [s.affinity for s in bundle.samples]


def test_plm_reads_each_protein_once(dataset):
    root, bundle = dataset
    store = FeatureStore("PGraphDta", TOY, sidecar_dir=root)
    prepared = store.prepare(bundle)
    assert store.embedding_reads == len(bundle.proteins)
    pid = bundle.samples[0].protein_id
    expected = pool_embedding(load_embeddings(root / f"{pid}.plm")[pid], "mean").data
    np.testing.assert_array_equal(prepared[0].plm, expected)
    assert store.plm_dim == expected.shape[0]


def test_cnn_never_reads_embeddings(dataset):
    root, bundle = dataset
    store = FeatureStore("BaselineCnn", TOY, sidecar_dir=root)
    store.prepare(bundle)
    assert store.embedding_reads == 0


def test_missing_embedding_names_protein(dataset):
    root, bundle = dataset
    pid = bundle.samples[0].protein_id
    (root / f"{pid}.plm").unlink()
    with pytest.raises(UnresolvableSample) as info:
        FeatureStore("PGraphDta", TOY, sidecar_dir=root).prepare(bundle)
    assert info.value.sample_id == pid and pid in str(info.value)
    # pseudo embeddings need no side files and are stable across runs
    store = FeatureStore("PGraphDta", TOY, sidecar_dir=root, pseudo_embeddings=True, pseudo_dim=12)
    prepared = store.prepare(bundle)
    protein = bundle.proteins[pid]
    np.testing.assert_array_equal(prepared[0].plm, pseudo_embedding(protein, 12)[0])
    assert store.embedding_reads == 0


def test_missing_contact_inputs(dataset):
    root, bundle = dataset
    s = bundle.samples[0]
    (root / f"{s.drug_id}__{s.protein_id}.dist").unlink()
    with pytest.raises(UnresolvableSample) as info:
        FeatureStore("PGraphDtaCm1", TOY, sidecar_dir=root).prepare(bundle)
    assert s.drug_id in str(info.value) and s.protein_id in str(info.value)
    (root / f"{s.protein_id}.cmap").unlink()
    (root / f"{s.protein_id}.pdb").unlink()
    with pytest.raises(UnresolvableSample):
        FeatureStore("PGraphDtaCm2", TOY, sidecar_dir=root).prepare(bundle)


def test_cm2_prefers_cmap_and_falls_back_to_pdb(dataset):
    root, bundle = dataset
    pid = bundle.samples[0].protein_id
    store = FeatureStore("PGraphDtaCm2", TOY, sidecar_dir=root)
    m = contact_from_probabilities(parse_matrix((root / f"{pid}.cmap").read_text()))
    np.testing.assert_array_equal(store.protein_contact(pid), contact_features(m, TOY.grid))
    (root / f"{pid}.cmap").unlink()
    fallback = FeatureStore("PGraphDtaCm2", TOY, sidecar_dir=root).protein_contact(pid)
    assert fallback.shape == (TOY.grid ** 2,) and np.isfinite(fallback).all()


def test_bad_smiles_becomes_unresolvable_sample(tmp_path):
    (tmp_path / "i.csv").write_text("drug_id,smiles,protein_id,affinity\nD1,C(,P1,7\n")
    (tmp_path / "p.fasta").write_text(">P1\nMKTAY\n")
    bundle = load_dataset(tmp_path / "i.csv", tmp_path / "p.fasta")
    with pytest.raises(UnresolvableSample) as info:
        FeatureStore("BaselineCnn", TOY).prepare(bundle)
    assert "UnbalancedParentheses" in str(info.value)
