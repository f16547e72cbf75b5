import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgdta import errors
from pgdta.smiles import (FEATURE_SYMBOLS, N_FEATURES, Atom, Bond, MolecularGraph,
                          featurize_atoms, parse_smiles, perceive_rings)

from conftest import golden_smiles

PTK787 = "Clc1ccc(Nc2nnc(Cc3ccncc3)c3ccccc23)cc1"
AT7519 = "O=C(NC1CCNCC1)c1[nH]ncc1NC(=O)c1c(Cl)cccc1Cl"

GOLDEN = golden_smiles()


def test_golden_corpus_size_and_verbatim_pair():
    assert len(GOLDEN) >= 50
    strings = {g["smiles"] for g in GOLDEN}
    assert PTK787 in strings and AT7519 in strings


@pytest.mark.parametrize("rec", GOLDEN, ids=[g["name"] for g in GOLDEN])
def test_matches_reference_toolkit(rec):
    g = parse_smiles(rec["smiles"])
    assert g.n_atoms == rec["atoms"]
    assert len(g.bonds) == rec["bonds"]
    assert sum(a.aromatic for a in g.atoms) == rec["aromatic_atoms"]
    assert "".join("1" if a.aromatic else "0" for a in g.atoms) == rec["aromatic_flags"]
    assert [a.total_h for a in g.atoms] == rec["total_h"]
    assert [g.degree(i) for i in range(g.n_atoms)] == rec["degree"]


def test_methane():
    g = parse_smiles("C")
    assert g.n_atoms == 1 and g.bonds == []
    assert g.atoms[0].implicit_h == 4
    f = featurize_atoms(g)[0]
    assert f[44 + 0] == 1  # degree 0
    assert f[55 + 4] == 1  # 4 hydrogens
    assert f[-1] == 0


def test_benzene():
    g = parse_smiles("c1ccccc1")
    assert g.n_atoms == 6 and len(g.bonds) == 6
    assert all(a.aromatic and a.ring_member for a in g.atoms)
    assert all(b.order == "aromatic" and b.ring_member for b in g.bonds)
    f = featurize_atoms(g)[0]
    assert f[44 + 2] == 1 and f[55 + 1] == 1 and f[-1] == 1


def test_ring_perception_examples():
    assert not any(a.ring_member for a in parse_smiles("CC").atoms)
    g = parse_smiles("C1CC1C")
    assert [a.ring_member for a in g.atoms] == [True, True, True, False]
    assert sum(b.ring_member for b in g.bonds) == 3


def test_perceive_rings_is_idempotent_on_built_graph():
    atoms = [Atom("C", 6) for _ in range(4)]
    bonds = [Bond(0, 1, "single"), Bond(1, 2, "single"), Bond(2, 0, "single"),
             Bond(2, 3, "single")]
    g = perceive_rings(MolecularGraph(atoms, bonds))
    assert [a.ring_member for a in g.atoms] == [True, True, True, False]
    assert [b.ring_member for b in g.bonds] == [True, True, True, False]


@pytest.mark.parametrize("text,err", [
    ("", errors.EmptyInput),
    ("   ", errors.EmptyInput),
    ("C(", errors.UnbalancedParentheses),
    ("C)C", errors.UnbalancedParentheses),
    ("C1CC", errors.UnmatchedRingClosure),
    ("C%12CC", errors.UnmatchedRingClosure),
    ("CXC", errors.UnknownElement),
    ("[Xx]", errors.UnknownElement),
    ("C[C", errors.MalformedBracketAtom),
    ("[C+A]", errors.MalformedBracketAtom),
    ("CC.O", errors.DisconnectedMolecule),
    ("cc", errors.NonRingAromatic),
    ("C=", errors.MisplacedBond),
    ("C=(C)", errors.MisplacedBond),
])
def test_errors(text, err):
    with pytest.raises(err) as info:
        parse_smiles(text)
    assert isinstance(info.value, errors.SmilesError)


def test_error_carries_offset():
    with pytest.raises(errors.UnbalancedParentheses) as info:
        parse_smiles("CC(C")
    assert info.value.position == 2


@pytest.mark.parametrize("text,atoms,bonds,hs", [
    ("C[C@@H](N)C(=O)O", 6, 5, [3, 1, 2, 0, 0, 1]),
    ("F/C=C/F", 4, 3, [0, 1, 1, 0]),
    ("C%10CC%10", 3, 3, [2, 2, 2]),
    ("C=1CC1", 3, 3, [1, 2, 1]),
    ("[NH4+]", 1, 0, [4]),
    ("[13CH3]O", 2, 1, [3, 1]),
    ("[O-]C(=O)C", 4, 3, [0, 0, 0, 3]),
    ("c1cc[nH]c1", 5, 5, [1, 1, 1, 1, 1]),
    ("C#N", 2, 1, [1, 0]),
    ("OS(=O)(=O)O", 5, 4, [1, 0, 0, 0, 1]),
    ("ClP(Cl)(Cl)(Cl)Cl", 6, 5, [0, 0, 0, 0, 0, 0]),
    ("B(O)O", 3, 2, [1, 1, 1]),
    ("[se]1cccc1", 5, 5, [0, 1, 1, 1, 1]),
])
def test_grammar_cases(text, atoms, bonds, hs):
    g = parse_smiles(text)
    assert (g.n_atoms, len(g.bonds)) == (atoms, bonds)
    assert [a.total_h for a in g.atoms] == hs


def test_bracket_fields():
    g = parse_smiles("[15NH2+:3]C")
    a = g.atoms[0]
    assert (a.element, a.explicit_h, a.implicit_h, a.formal_charge, a.bracket) == ("N", 2, 0, 1, True)
    assert parse_smiles("[Fe++]").atoms[0].formal_charge == 2
    assert parse_smiles("[O--]").atoms[0].formal_charge == -2
    assert parse_smiles("[Co-3]").atoms[0].formal_charge == -3


def test_unknown_symbol_maps_to_other():
    f = featurize_atoms(parse_smiles("[U]"))[0]
    assert f[len(FEATURE_SYMBOLS) - 1] == 1


def test_whitespace_trimmed():
    assert parse_smiles("  CCO\n").n_atoms == 3


# -- invariants ---------------------------------------------------------------------

@pytest.mark.parametrize("rec", GOLDEN[::5], ids=[g["name"] for g in GOLDEN[::5]])
def test_feature_blocks_and_adjacency(rec):
    g = parse_smiles(rec["smiles"])
    f = featurize_atoms(g)
    assert f.shape == (g.n_atoms, N_FEATURES) == (g.n_atoms, 78)
    for lo, hi in ((0, 44), (44, 55), (55, 66), (66, 77)):
        np.testing.assert_array_equal(f[:, lo:hi].sum(axis=1), 1.0)
    assert set(np.unique(f[:, 77])) <= {0.0, 1.0}
    assert g.adjacency.sum() == 2 * len(g.bonds)
    assert (g.adjacency == g.adjacency.T).all() and not g.adjacency.diagonal().any()


def test_round_trip_stability():
    for rec in GOLDEN[:10]:
        a = featurize_atoms(parse_smiles(rec["smiles"]))
        b = featurize_atoms(parse_smiles(rec["smiles"]))
        assert a.tobytes() == b.tobytes()


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(GOLDEN), st.randoms(use_true_random=False))
def test_featurization_is_permutation_consistent(rec, rnd):
    g = parse_smiles(rec["smiles"])
    perm = list(range(g.n_atoms))
    rnd.shuffle(perm)
    inv = {old: new for new, old in enumerate(perm)}
    atoms = [g.atoms[old] for old in perm]
    bonds = [Bond(inv[b.a], inv[b.b], b.order) for b in g.bonds]
    h = perceive_rings(MolecularGraph(atoms, bonds))
    np.testing.assert_array_equal(featurize_atoms(h), featurize_atoms(g)[perm])
