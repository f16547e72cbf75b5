"""Seeded synthetic datasets in the on-disk formats the engine reads.

Used for tests and desk runs where the real benchmark files, structures
and language-model embeddings are not at hand. Everything written here is
a deterministic function of the seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .contact import format_matrix, pairwise_distances
from .data import InteractionSample, write_fasta, write_interactions
from .protein import ALPHABET, EmbeddingMatrix, ProteinSequence, pseudo_embedding, write_embeddings
from .smiles import featurize_atoms, parse_smiles

STANDARD_AA = ALPHABET.replace("B", "").replace("O", "").replace("U", "").replace("X", "").replace("Z", "")
THREE_LETTER = {
    "A": "ALA", "C": "CYS", "D": "ASP", "E": "GLU", "F": "PHE", "G": "GLY", "H": "HIS",
    "I": "ILE", "K": "LYS", "L": "LEU", "M": "MET", "N": "ASN", "P": "PRO", "Q": "GLN",
    "R": "ARG", "S": "SER", "T": "THR", "V": "VAL", "W": "TRP", "Y": "TYR",
}

KINASE_SMILES = (
    "Clc1ccc(Nc2nnc(Cc3ccncc3)c3ccccc23)cc1",
    "O=C(NC1CCNCC1)c1[nH]ncc1NC(=O)c1c(Cl)cccc1Cl",
    "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1",
    "COc1cc2ncnc(Nc3ccc(F)c(Cl)c3)c2cc1OCCCN1CCOCC1",
    "COCCOc1cc2ncnc(Nc3cccc(C#C)c3)c2cc1OCCOC",
    "Cc1nc(Nc2ncc(C(=O)Nc3c(C)cccc3Cl)s2)cc(N2CCN(CCO)CC2)n1",
    "CNC(=O)c1cc(Oc2ccc(NC(=O)Nc3ccc(Cl)c(C(F)(F)F)c3)cc2)ccn1",
    "CCN(CC)CCNC(=O)c1c(C)[nH]c(/C=C2\\C(=O)Nc3ccc(F)cc32)c1C",
    "Oc1cccc(-c2nc(N3CCOCC3)c3oc4ncccc4c3n2)c1",
    "CS(=O)c1ccc(-c2nc(-c3ccc(F)cc3)c(-c3ccncc3)[nH]2)cc1",
    "Cc1ccc2nc(NCCN)c3ncc(C)n3c2c1",
    "N#CC[C@H](C1CCCC1)n1cc(-c2ncnc3[nH]ccc23)cn1",
)


def random_protein(pid, length, rng):
    return ProteinSequence(pid, "".join(rng.choice(list(STANDARD_AA), size=length)))


def chain_coordinates(n, rng, step=3.8):
    """Self-avoiding-ish random walk standing in for a Cα trace."""
    pts = np.zeros((n, 3))
    direction = rng.standard_normal(3)
    for i in range(1, n):
        direction = 0.6 * direction / np.linalg.norm(direction) + 0.8 * rng.standard_normal(3)
        pts[i] = pts[i - 1] + step * direction / np.linalg.norm(direction)
    return pts


def format_pdb(sequence, ca, rng):
    """ATOM records with CA for every residue and CB for all but glycine."""
    lines = []
    serial = 1
    for k, (aa, xyz) in enumerate(zip(sequence.residues, ca), start=1):
        resname = THREE_LETTER.get(aa, "UNK")
        atoms = [("CA", xyz)]
        if aa != "G":
            atoms.append(("CB", xyz + 1.53 * rng.standard_normal(3) / np.sqrt(3)))
        for name, (x, y, z) in atoms:
            lines.append(f"ATOM  {serial:5d}  {name:<3s} {resname:3s} A{k:4d}    "
                         f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C")
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def hidden_affinity(smiles, protein):
    """Smooth, deterministic pKd-like score in roughly [5, 9]."""
    feats = featurize_atoms(parse_smiles(smiles))
    drug = np.array([feats.shape[0] / 40.0, feats[:, -1].mean(), feats[:, 1].mean(),
                     feats[:, 2].mean(), feats[:, 7].mean() + feats[:, 4].mean()])
    comp = np.array([protein.residues.count(a) for a in "DEKRHFWYLIVAGST"], dtype=float)
    comp = comp / len(protein.residues)
    prot = np.array([comp[:5].sum(), comp[5:8].sum(), comp[8:11].sum(), comp[11:13].sum(),
                     comp[13:].sum()]) * 4.0
    return 7.0 + 1.5 * np.tanh(drug @ prot - 1.5) + 0.5 * np.sin(3.0 * drug[0] + prot[0])


def write_dataset(directory, n_samples=10, n_proteins=3, seed=0, kind="davis",
                  smiles=KINASE_SMILES, length_range=(40, 80), plm_dim=16,
                  per_residue=False, sidecars=True, noise=0.0):
    """Write interactions.csv, proteins.fasta and per-id sidecars.

    Returns ``(interactions_path, fasta_path)``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    proteins = {}
    for k in range(n_proteins):
        pid = f"P{k:04d}"
        proteins[pid] = random_protein(pid, int(rng.integers(*length_range, endpoint=True)), rng)
    pids = list(proteins)
    drugs = [(f"D{k:04d}", s) for k, s in enumerate(smiles)]

    pairs = [(d, p) for d in range(len(drugs)) for p in range(n_proteins)]
    if n_samples <= len(pairs):
        chosen = rng.choice(len(pairs), size=n_samples, replace=False)
    else:
        chosen = rng.integers(len(pairs), size=n_samples)
    samples, raw = [], []
    for idx in sorted(int(c) for c in chosen) if n_samples <= len(pairs) else chosen:
        d, p = pairs[int(idx)]
        drug_id, smi = drugs[d]
        pkd = float(hidden_affinity(smi, proteins[pids[p]]) + noise * rng.standard_normal())
        samples.append(InteractionSample(drug_id, smi, pids[p], pkd, kind))
        raw.append(10 ** (9.0 - pkd) if kind == "davis" else pkd)

    interactions = directory / "interactions.csv"
    fasta = directory / "proteins.fasta"
    write_interactions(interactions, samples, raw)
    write_fasta(fasta, proteins)
    if not sidecars:
        return interactions, fasta

    for pid, seq in proteins.items():
        rows = pseudo_embedding(seq, plm_dim, per_residue)
        write_embeddings(directory / f"{pid}.plm", [EmbeddingMatrix(pid, rows)])
        ca = chain_coordinates(len(seq.residues), rng)
        (directory / f"{pid}.pdb").write_text(format_pdb(seq, ca, rng))
        dist = pairwise_distances(ca)
        probs = 1.0 / (1.0 + np.exp(dist - 8.0))
        (directory / f"{pid}.cmap").write_text(format_matrix(np.round(probs, 4)))
    for drug_id, smi in drugs:
        n_atoms = parse_smiles(smi).n_atoms
        for pid in pids:
            pts = chain_coordinates(n_atoms, rng, step=1.5)
            d = np.round(pairwise_distances(pts), 3)
            d = np.maximum(d, d.T)
            (directory / f"{drug_id}__{pid}.dist").write_text(format_matrix(d))
    return interactions, fasta
