"""Convert a DeepDTA-style dataset folder into interactions.csv + proteins.fasta.

The source folder holds ``ligands_can.txt`` and ``proteins.txt`` (JSON
objects mapping id to SMILES / sequence, in matrix order) and ``Y``, a
pickled drugs x proteins affinity matrix with NaN for unmeasured pairs.

    python tools/convert_deepdta.py data/davis out/davis --kind davis
    PGDTA_DAVIS_DIR=out/davis pytest tests/test_acceptance.py -k criterion_7

DAVIS values are written as raw Kd (nM); the loader applies the log
transform when ``kind = davis``.
"""

import argparse
import json
import pickle
from collections import OrderedDict
from pathlib import Path

import numpy as np

from pgdta.data import InteractionSample, write_fasta, write_interactions
from pgdta.protein import ProteinSequence


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("source")
    p.add_argument("dest")
    p.add_argument("--kind", choices=("davis", "kiba"), required=True)
    args = p.parse_args()
    src, dest = Path(args.source), Path(args.dest)

    ligands = json.loads((src / "ligands_can.txt").read_text(), object_pairs_hook=OrderedDict)
    proteins = json.loads((src / "proteins.txt").read_text(), object_pairs_hook=OrderedDict)
    with open(src / "Y", "rb") as fh:
        y = np.asarray(pickle.load(fh, encoding="latin1"), dtype=np.float64)
    drug_ids, protein_ids = list(ligands), list(proteins)
    if y.shape != (len(drug_ids), len(protein_ids)):
        raise SystemExit(f"Y has shape {y.shape}, expected {(len(drug_ids), len(protein_ids))}")

    samples = [InteractionSample(drug_ids[i], ligands[drug_ids[i]], protein_ids[j], float(y[i, j]))
               for i, j in zip(*np.nonzero(~np.isnan(y)))]
    dest.mkdir(parents=True, exist_ok=True)
    write_interactions(dest / "interactions.csv", samples)
    write_fasta(dest / "proteins.fasta",
                {pid: ProteinSequence(pid, seq.upper()) for pid, seq in proteins.items()})
    print(f"{len(samples)} interactions, {len(drug_ids)} drugs, {len(protein_ids)} proteins")


if __name__ == "__main__":
    main()
