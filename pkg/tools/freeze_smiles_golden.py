"""Regenerate tests/data/davis_smiles_golden.json with RDKit.

RDKit is only needed here, never at runtime:

    PYTHONPATH=/path/to/rdkit python tools/freeze_smiles_golden.py

The two VERBATIM strings are kept exactly as written; every other entry is stored in
RDKit's canonical aromatic form so lowercase notation agrees with RDKit's
own aromaticity perception.
"""

import json
from pathlib import Path

from rdkit import Chem

VERBATIM = {
    "PTK-787": "Clc1ccc(Nc2nnc(Cc3ccncc3)c3ccccc23)cc1",
    "AT-7519": "O=C(NC1CCNCC1)c1[nH]ncc1NC(=O)c1c(Cl)cccc1Cl",
}

KINASE_INHIBITORS = {
    "Imatinib": "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1",
    "Gefitinib": "COc1cc2ncnc(Nc3ccc(F)c(Cl)c3)c2cc1OCCCN1CCOCC1",
    "Erlotinib": "COCCOc1cc2ncnc(Nc3cccc(C#C)c3)c2cc1OCCOC",
    "Lapatinib": "CS(=O)(=O)CCNCc1ccc(-c2ccc3ncnc(Nc4ccc(OCc5cccc(F)c5)c(Cl)c4)c3c2)o1",
    "Dasatinib": "Cc1nc(Nc2ncc(C(=O)Nc3c(C)cccc3Cl)s2)cc(N2CCN(CCO)CC2)n1",
    "Nilotinib": "Cc1cn(-c2cc(NC(=O)c3ccc(C)c(Nc4nccc(-c5cccnc5)n4)c3)cc(C(F)(F)F)c2)cn1",
    "Sorafenib": "CNC(=O)c1cc(Oc2ccc(NC(=O)Nc3ccc(Cl)c(C(F)(F)F)c3)cc2)ccn1",
    "Sunitinib": "CCN(CC)CCNC(=O)c1c(C)[nH]c(/C=C2\\C(=O)Nc3ccc(F)cc32)c1C",
    "Pazopanib": "Cc1ccc(Nc2nccc(N(C)c3ccc4c(C)n(C)nc4c3)n2)cc1S(N)(=O)=O",
    "Vandetanib": "COc1cc2c(Nc3ccc(Br)cc3F)ncnc2cc1OCC1CCN(C)CC1",
    "CI-1033": "C=CC(=O)Nc1cc2c(Nc3ccc(F)c(Cl)c3)ncnc2cc1OCCCN1CCOCC1",
    "BIBW-2992": "CN(C)C/C=C/C(=O)Nc1cc2c(Nc3ccc(F)c(Cl)c3)ncnc2cc1O[C@H]1CCOC1",
    "EKB-569": "CCOc1cc2ncc(C#N)c(Nc3ccc(F)c(Cl)c3)c2cc1NC(=O)/C=C/CN(C)C",
    "CP-690550": "C[C@@H]1CCN(C(=O)CC#N)C[C@@H]1N(C)c1ncnc2[nH]ccc12",
    "INCB-018424": "N#CC[C@H](C1CCCC1)n1cc(-c2ncnc3[nH]ccc23)cn1",
    "Staurosporine": "CN[C@@H]1C[C@H]2O[C@@](C)([C@@H]1OC)n1c3ccccc3c3c4CNC(=O)c4c4c5ccccc5n2c4c31",
    "VX-680": "Cc1cc(Nc2cc(N3CCN(C)CC3)nc(Sc3ccc(NC(=O)C4CC4)cc3)n2)n[nH]1",
    "PI-103": "Oc1cccc(-c2nc(N3CCOCC3)c3oc4ncccc4c3n2)c1",
    "SB-203580": "CS(=O)c1ccc(-c2nc(-c3ccc(F)cc3)c(-c3ccncc3)[nH]2)cc1",
    "SB-431542": "NC(=O)c1ccc(-c2nc(-c3ccc4c(c3)OCO4)c(-c3ccccn3)[nH]2)cc1",
    "AZD-6244": "Cn1cnc2c(F)c(Nc3ccc(Br)cc3Cl)c(C(=O)NOCCO)cc21",
    "CI-1040": "O=C(NOCC1CC1)c1ccc(F)c(F)c1Nc1ccc(I)cc1Cl",
    "CHIR-258": "CN1CCN(c2ccc3nc(-c4c(N)c5c(F)cccc5[nH]c4=O)[nH]c3c2)CC1",
    "ABT-869": "Cc1ccc(F)c(NC(=O)Nc2ccc(-c3cccc4[nH]nc(N)c34)cc2)c1",
    "AMG-706": "CC1(C)CNc2cc(NC(=O)c3cccnc3NCc3ccncc3)ccc21",
    "AC220": "CC(C)(C)c1cc(NC(=O)Nc2ccc(-c3cn4c(n3)sc3cc(OCCN5CCOCC5)ccc34)cc2)no1",
    "AZD-0530": "CN1CCN(CCOc2cc(OC3CCOCC3)c3c(Nc4c(Cl)ccc5c4OCO5)ncnc3c2)CC1",
    "BIBF-1120": "COC(=O)c1ccc2c(c1)NC(=O)/C2=C(\\Nc1ccc(N(C)C(=O)CN2CCN(C)CC2)cc1)c1ccccc1",
    "BMS-345541": "Cc1ccc2nc(NCCN)c3ncc(C)n3c2c1",
    "BMS-387032": "CC(C)(C)c1cnc(CSc2cnc(NC(=O)C3CCNCC3)s2)o1",
    "MLN-518": "COc1cc2c(N3CCN(C(=O)Nc4ccc(OC(C)C)cc4)CC3)ncnc2cc1OCCCN1CCCCC1",
    "MLN-8054": "OC(=O)c1ccc(Nc2ncc3c(n2)-c2ccc(Cl)cc2C(c2c(F)cccc2F)=NC3)cc1",
    "PKC-412": "CO[C@@H]1[C@H](N(C)C(=O)c2ccccc2)C[C@H]2O[C@]1(C)n1c3ccccc3c3c4CNC(=O)c4c4c5ccccc5n2c4c31",
    "CEP-701": "C[C@]12O[C@H](C[C@]1(O)CO)n1c3ccccc3c3c4CNC(=O)c4c4c5ccccc5n2c4c31",
    "LY-317615": "Cn1cc(C2=C(c3cn(C4CCN(Cc5ccccn5)CC4)c4ccccc34)C(=O)NC2=O)c2ccccc21",
    "GDC-0879": "OCCn1cc(-c2ccc3c(c2)CC/C3=N\\O)c(-c2ccncc2)n1",
    "PLX-4720": "CCCS(=O)(=O)Nc1ccc(F)c(C(=O)c2c[nH]c3ncc(Cl)cc23)c1F",
    "PP-242": "CC(C)n1nc(-c2cc3cc(O)ccc3[nH]2)c2c(N)ncnc21",
    "PHA-665752": "Cc1[nH]c(/C=C2\\C(=O)Nc3ccc(CS(=O)(=O)Cc4c(Cl)cccc4Cl)cc32)c(C)c1C(=O)N1CCC[C@@H]1CN1CCCC1",
    "PD-173955": "CSc1cccc(Nc2ncc3cc(-c4c(Cl)cccc4Cl)c(=O)n(C)c3n2)c1",
    "BI-2536": "CC[C@H]1C(=O)N(C)c2cnc(Nc3ccc(C(=O)NC4CCN(C)CC4)cc3OC)nc2N1C1CCCC1",
    "TAE-684": "COc1cc(N2CCC(N3CCN(C)CC3)CC2)ccc1Nc1ncc(Cl)c(Nc2ccccc2S(=O)(=O)C(C)C)n1",
    "JNJ-7706621": "Nc1nc(Nc2ccc(S(N)(=O)=O)cc2)nn1C(=O)c1c(F)cccc1F",
    "GW-2580": "COc1ccc(COc2ccc(Cc3cnc(N)nc3N)cc2OC)cc1",
    "AB-1010": "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nc(-c2cccnc2)cs1",
    "SKI-606": "COc1cc(Nc2c(C#N)cnc3cc(OCCCN4CCN(C)CC4)c(OC)cc23)c(Cl)cc1Cl",
    "Flavopiridol": "CN1CC[C@@H](c2c(O)cc(O)c3c(=O)cc(-c4ccccc4Cl)oc23)[C@@H](O)C1",
    "Roscovitine": "CC[C@H](CO)Nc1nc(NCc2ccccc2)c2ncn(C(C)C)c2n1",
    "SU-14813": "Cc1[nH]c(/C=C2\\C(=O)Nc3ccc(F)cc32)c(C)c1C(=O)NC[C@H](O)CN1CCOCC1",
    "BMS-540215": "Cc1cc2c(F)c(Oc3ncnn4cc(OC[C@@H](C)O)c(C)c34)ccc2[nH]1",
    "AZD-7762": "NC(=O)Nc1sc(-c2cccc(F)c2)cc1C(=O)N[C@H]1CCCNC1",
    "AZD-1152HQPA": "CCN(CCO)CCCOc1ccc2c(Nc3cc(CC(=O)Nc4cccc(F)c4)[nH]n3)ncnc2c1",
    "CP-724714": "COCC(=O)NC/C=C/c1ccc2ncnc(Nc3ccc(Oc4ccn5ncnc5c4)c(C)c3)c2c1",
    "TG-101348": "Cc1cnc(Nc2ccc(OCCN3CCCC3)cc2)nc1Nc1cccc(S(=O)(=O)NC(C)(C)C)c1",
    "CHIR-265": "CN1c(Nc2ccc(C(F)(F)F)cc2)nc2cc(Oc3ccnc(-c4ncc(C(F)(F)F)[nH]4)c3)ccc21",
    "A-674563": "Cc1[nH]nc2ccc(-c3cncc(OC[C@@H](N)Cc4ccccc4)c3)cc12",
    "AST-487": "CCN1CCN(Cc2ccc(NC(=O)Nc3ccc(Oc4cc(NC)ncn4)cc3)cc2C(F)(F)F)CC1",
    "KI-20227": "COc1cc2nccc(Oc3ccc(NC(=O)N[C@@H](C)c4nccs4)c(OC)c3)c2cc1OC",
    "LY-333531": "CN(C)C[C@@H]1CCn2cc(c3ccccc32)C2=C(C(=O)NC2=O)c2cn(c3ccccc23)CCO1",
    "AG-013736": "CNC(=O)c1ccccc1Sc1ccc2c(/C=C/c3ccccn3)n[nH]c2c1",
}


def record(name, smi):
    mol = Chem.MolFromSmiles(smi)
    return {
        "name": name,
        "smiles": smi,
        "atoms": mol.GetNumAtoms(),
        "bonds": mol.GetNumBonds(),
        "aromatic_atoms": sum(a.GetIsAromatic() for a in mol.GetAtoms()),
        "aromatic_flags": "".join("1" if a.GetIsAromatic() else "0" for a in mol.GetAtoms()),
        "total_h": [a.GetTotalNumHs() for a in mol.GetAtoms()],
        "degree": [a.GetDegree() for a in mol.GetAtoms()],
    }


def main():
    out = [record(k, v) for k, v in VERBATIM.items()]
    for name, smi in KINASE_INHIBITORS.items():
        mol = Chem.MolFromSmiles(smi)
        if mol is None:
            print("skip", name)
            continue
        out.append(record(name, Chem.MolToSmiles(mol)))
    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "davis_smiles_golden.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(len(out), "records ->", path)


if __name__ == "__main__":
    main()
