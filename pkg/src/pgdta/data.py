"""Interaction datasets: CSV + FASTA ingestion, affinity transform, splits.

Interactions CSV (header required)::

    drug_id,smiles,protein_id,affinity

For ``kind="davis"`` the affinity column is a raw Kd in nM and is converted
to pKd on load; other kinds keep the value as given.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateSplit, EmptyDataset, MalformedRow, MissingProtein, NonPositiveKd
from .protein import ProteinSequence

KINDS = ("davis", "kiba", "generic")
COLUMNS = ("drug_id", "smiles", "protein_id", "affinity")


@dataclass(frozen=True)
class InteractionSample:
    drug_id: str
    smiles: str
    protein_id: str
    affinity: float
    dataset_kind: str = "generic"

    @property
    def key(self):
        return f"{self.drug_id}/{self.protein_id}"


@dataclass(frozen=True)
class DatasetStats:
    proteins: int
    compounds: int
    entries: int

    def as_tuple(self):
        return (self.proteins, self.compounds, self.entries)


@dataclass
class DatasetBundle:
    samples: list
    proteins: dict
    kind: str = "generic"
    stats: DatasetStats = field(init=False)

    def __post_init__(self):
        for s in self.samples:
            if s.protein_id not in self.proteins:
                raise MissingProtein(f"sample {s.key} references unknown protein {s.protein_id!r}")
        self.stats = DatasetStats(
            len({s.protein_id for s in self.samples}),
            len({s.drug_id for s in self.samples}),
            len(self.samples),
        )

    def __len__(self):
        return len(self.samples)

    def subset(self, indices):
        return DatasetBundle([self.samples[i] for i in indices], self.proteins, self.kind)


def davis_log_transform(kd_nanomolar):
    """pKd = -log10(Kd / 1e9) with Kd in nanomolar."""
    if not kd_nanomolar > 0:
        raise NonPositiveKd(f"Kd must be positive, got {kd_nanomolar!r}")
    return -math.log10(kd_nanomolar / 1e9)


def read_fasta(path):
    """``{id: ProteinSequence}``; the id is the first token after ``>``."""
    proteins = {}
    current, chunks = None, []

    def flush():
        if current is not None:
            proteins[current] = ProteinSequence(current, "".join(chunks).upper())

    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                parts = line[1:].split()
                if not parts:
                    raise MalformedRow(f"{path}:{lineno}: FASTA header without an id", lineno)
                current, chunks = parts[0], []
            elif current is None:
                raise MalformedRow(f"{path}:{lineno}: sequence data before any header", lineno)
            else:
                chunks.append(line)
    flush()
    return proteins


def read_interactions(path, kind="generic"):
    if kind not in KINDS:
        raise ValueError(f"unknown dataset kind {kind!r}")
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDataset(f"{path}: empty interactions file")
        header = [h.strip() for h in header]
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise MalformedRow(f"{path}:1: missing column(s) {', '.join(missing)}", 1)
        cols = [header.index(c) for c in COLUMNS]
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise MalformedRow(f"{path}:{lineno}: expected {len(header)} fields", lineno)
            drug_id, smiles, protein_id, raw = (row[c].strip() for c in cols)
            if not smiles or not drug_id or not protein_id:
                raise MalformedRow(f"{path}:{lineno}: empty id or SMILES", lineno)
            try:
                value = float(raw)
            except ValueError:
                raise MalformedRow(f"{path}:{lineno}: affinity {raw!r} is not a number", lineno) from None
            if kind == "davis":
                try:
                    value = davis_log_transform(value)
                except NonPositiveKd as exc:
                    raise MalformedRow(f"{path}:{lineno}: {exc}", lineno) from None
            if not math.isfinite(value):
                raise MalformedRow(f"{path}:{lineno}: non-finite affinity", lineno)
            samples.append(InteractionSample(drug_id, smiles, protein_id, value, kind))
    return samples


def load_dataset(interactions_path, sequences_path, kind="generic"):
    samples = read_interactions(interactions_path, kind)
    if not samples:
        raise EmptyDataset(f"{interactions_path}: no interaction rows")
    return DatasetBundle(samples, read_fasta(sequences_path), kind)


def split(bundle, train_fraction, seed):
    """Seeded shuffle of sample indices, then a prefix/suffix split."""
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit(f"train fraction must lie in (0, 1), got {train_fraction}")
    n = len(bundle)
    n_train = int(math.floor(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"fraction {train_fraction} of {n} samples leaves a side empty")
    # Generator.permutation is a Fisher-Yates shuffle driven by the seeded stream
    order = np.random.default_rng(seed).permutation(n)
    return bundle.subset(order[:n_train]), bundle.subset(order[n_train:])


def write_interactions(path, samples, raw_affinities=None):
    """Write samples back out in the interactions CSV layout."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for k, s in enumerate(samples):
            value = s.affinity if raw_affinities is None else raw_affinities[k]
            w.writerow([s.drug_id, s.smiles, s.protein_id, repr(float(value))])


def write_fasta(path, proteins, width=60):
    lines = []
    for pid, seq in proteins.items():
        lines.append(f">{pid}")
        lines.extend(seq.residues[i:i + width] for i in range(0, len(seq.residues), width))
    Path(path).write_text("\n".join(lines) + "\n")
