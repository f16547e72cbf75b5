import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgdta import data as D
from pgdta.errors import (DegenerateSplit, EmptyDataset, InvalidResidue, MalformedRow, MissingProtein,
                          NonPositiveKd)
from pgdta.protein import ProteinSequence


FASTA = ">P1\nMKTAYIAKQR\n>P2 kinase\nGSHM\nLEDP\n"


def write(tmp_path, rows, fasta=FASTA, header="drug_id,smiles,protein_id,affinity"):
    csv_path = tmp_path / "i.csv"
    csv_path.write_text("\n".join([header, *rows]) + "\n")
    fa = tmp_path / "s.fasta"
    fa.write_text(fasta)
    return csv_path, fa


def test_three_row_fixture(tmp_path):
    paths = write(tmp_path, ["D1,CCO,P1,7.0", "D2,c1ccccc1,P2,6.5", "D1,CCO,P2,5.25"])
    bundle = D.load_dataset(*paths)
    assert len(bundle) == 3
    assert bundle.stats.as_tuple() == (2, 2, 3)
    assert bundle.proteins["P2"].residues == "GSHMLEDP"
    assert [s.affinity for s in bundle.samples] == [7.0, 6.5, 5.25]


def test_davis_kind_log_transforms(tmp_path):
    paths = write(tmp_path, ["D1,CCO,P1,10000", "D2,CCN,P1,1"])
    bundle = D.load_dataset(*paths, kind="davis")
    assert [s.affinity for s in bundle.samples] == [5.0, 9.0]
    assert all(s.dataset_kind == "davis" for s in bundle.samples)


def test_log_transform_examples_and_errors():
    assert abs(D.davis_log_transform(10000) - 5.0) < 1e-12
    assert abs(D.davis_log_transform(1) - 9.0) < 1e-12
    for bad in (0, -1.0, float("nan")):
        with pytest.raises(NonPositiveKd):
            D.davis_log_transform(bad)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e9), st.floats(1e-6, 1e9))
def test_log_transform_strictly_decreasing(a, b):
    if a < b:
        assert D.davis_log_transform(a) > D.davis_log_transform(b)


@pytest.mark.parametrize("rows,line", [
    (["D1,CCO,P1,abc"], 2),
    (["D1,CCO,P1,7", "D2,,P1,7"], 3),
    (["D1,CCO,P1,7", "D2,CC"], 3),
    (["D1,CCO,P1,inf"], 2),
])
def test_malformed_rows_report_line(tmp_path, rows, line):
    with pytest.raises(MalformedRow) as info:
        D.load_dataset(*write(tmp_path, rows))
    assert info.value.line == line


def test_davis_non_positive_kd_is_malformed_row(tmp_path):
    with pytest.raises(MalformedRow) as info:
        D.load_dataset(*write(tmp_path, ["D1,CCO,P1,0"]), kind="davis")
    assert info.value.line == 2


def test_missing_header_column_and_missing_protein_and_empty(tmp_path):
    with pytest.raises(MalformedRow):
        D.load_dataset(*write(tmp_path, ["D1,CCO,P1"], header="drug_id,smiles,protein_id"))
    with pytest.raises(MissingProtein):
        D.load_dataset(*write(tmp_path, ["D1,CCO,P9,7"]))
    with pytest.raises(EmptyDataset):
        D.load_dataset(*write(tmp_path, []))


def test_fasta_errors(tmp_path):
    with pytest.raises(MalformedRow):
        D.load_dataset(*write(tmp_path, ["D1,CCO,P1,7"], fasta="MKT\n>P1\nMKT\n"))
    with pytest.raises(InvalidResidue):
        D.load_dataset(*write(tmp_path, ["D1,CCO,P1,7"], fasta=">P1\nMK1T\n"))


def test_duplicates_preserved_and_reingest_identical(tmp_path):
    paths = write(tmp_path, ["D1,CCO,P1,7", "D1,CCO,P1,7"])
    a, b = D.load_dataset(*paths), D.load_dataset(*paths)
    assert len(a) == 2 and a.samples == b.samples


def make_bundle(n):
    samples = [D.InteractionSample(f"D{k}", "C", "P", float(k)) for k in range(n)]
    return D.DatasetBundle(samples, {"P": ProteinSequence("P", "MK")})


def test_split_examples():
    bundle = make_bundle(10)
    train, test = D.split(bundle, 0.8, 3)
    assert (len(train), len(test)) == (8, 2)
    again = D.split(bundle, 0.8, 3)
    assert again[0].samples == train.samples and again[1].samples == test.samples
    assert Counter(train.samples + test.samples) == Counter(bundle.samples)
    assert train.proteins is bundle.proteins


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.floats(0.01, 0.99), st.integers(0, 2**32 - 1))
def test_split_sizes_and_disjointness(n, f, seed):
    bundle = make_bundle(n)
    k = math.floor(f * n)
    if k in (0, n):
        with pytest.raises(DegenerateSplit):
            D.split(bundle, f, seed)
        return
    train, test = D.split(bundle, f, seed)
    assert (len(train), len(test)) == (k, n - k)
    assert not set(train.samples) & set(test.samples)
    assert train.stats.entries == k


@pytest.mark.parametrize("f", [0.0, 1.0, -0.5, 1.5])
def test_split_rejects_degenerate_fraction(f):
    with pytest.raises(DegenerateSplit):
        D.split(make_bundle(10), f, 0)


def test_writers_round_trip(tmp_path):
    bundle = D.load_dataset(*write(tmp_path, ["D1,CCO,P1,7.125", "D2,CCN,P2,6"]))
    D.write_interactions(tmp_path / "o.csv", bundle.samples)
    D.write_fasta(tmp_path / "o.fasta", bundle.proteins, width=3)
    back = D.load_dataset(tmp_path / "o.csv", tmp_path / "o.fasta")
    assert back.samples == bundle.samples and back.proteins == bundle.proteins
