"""Turn dataset samples into model inputs, loading every side input once.

Side inputs live next to the data, resolved by id:

* ``<protein_id>.plm``: embedding file for one protein (or one combined
  embedding file given explicitly);
* ``<protein_id>.cmap``: contact or contact-probability matrix (CM2);
* ``<protein_id>.pdb``: coordinates, used for CM2 when no ``.cmap`` exists;
* ``<drug_id>__<protein_id>.dist``: docked intermolecular distances (CM1).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import contact as cm
from .errors import PgdtaError, UnresolvableSample
from .gnn import GraphBatch
from .model import Batch, Variant
from .protein import load_embeddings, pool_embedding, pseudo_embedding, tokenize
from .smiles import featurize_atoms, parse_smiles


@dataclass
class PreparedSample:
    key: str
    graph: tuple
    tokens: np.ndarray = None
    plm: np.ndarray = None
    contact: np.ndarray = None
    target: float = 0.0


class FeatureStore:
    """Per-run cache of featurised drugs, proteins and contact maps."""

    def __init__(self, variant, config, sidecar_dir=None, embeddings=None,
                 pseudo_embeddings=False, pseudo_dim=None, per_residue=False,
                 coord_threshold=cm.DEFAULT_COORD_THRESHOLD,
                 prob_threshold=cm.DEFAULT_PROB_THRESHOLD,
                 distance_threshold=cm.DEFAULT_DISTANCE_THRESHOLD):
        self.variant = Variant.parse(variant)
        self.config = config
        self.sidecar_dir = Path(sidecar_dir) if sidecar_dir else None
        self.pseudo_embeddings = pseudo_embeddings
        self.pseudo_dim = pseudo_dim or config.plm_dim
        self.per_residue = per_residue
        self.coord_threshold = coord_threshold
        self.prob_threshold = prob_threshold
        self.distance_threshold = distance_threshold
        self.embedding_reads = 0
        self._embedding_file = Path(embeddings) if embeddings else None
        self._embedding_map = None
        self._drugs, self._tokens, self._plm, self._contacts = {}, {}, {}, {}

    # -- single inputs ---------------------------------------------------------

    def drug(self, smiles):
        if smiles not in self._drugs:
            graph = parse_smiles(smiles)
            src, dst = graph.edge_index()
            self._drugs[smiles] = (featurize_atoms(graph), src, dst)
        return self._drugs[smiles]

    def tokens(self, protein):
        if protein.id not in self._tokens:
            self._tokens[protein.id] = tokenize(protein, self.config.max_len).ids
        return self._tokens[protein.id]

    def _sidecar(self, name):
        if self.sidecar_dir is None:
            return None
        path = self.sidecar_dir / name
        return path if path.exists() else None

    def plm(self, protein):
        pid = protein.id
        if pid in self._plm:
            return self._plm[pid]
        if self.pseudo_embeddings:
            rows = pseudo_embedding(protein, self.pseudo_dim, self.per_residue)
            matrix = rows
        else:
            if self._embedding_file is not None:
                if self._embedding_map is None:
                    self._embedding_map = load_embeddings(self._embedding_file)
                    self.embedding_reads += 1
                found = self._embedding_map.get(pid)
            else:
                path = self._sidecar(f"{pid}.plm")
                found = None
                if path is not None:
                    self.embedding_reads += 1
                    found = load_embeddings(path).get(pid)
            if found is None:
                raise UnresolvableSample(f"no language-model embedding for protein {pid!r}", pid)
            matrix = found
        vec = pool_embedding(matrix, self.config.plm_pool).data
        self._plm[pid] = vec
        return vec

    def protein_contact(self, protein_id):
        key = ("protein", protein_id)
        if key not in self._contacts:
            cmap = self._sidecar(f"{protein_id}.cmap")
            pdb = self._sidecar(f"{protein_id}.pdb")
            if cmap is not None:
                probs = cm.parse_matrix(cmap.read_text())
                m = cm.contact_from_probabilities(probs, self.prob_threshold)
            elif pdb is not None:
                coords = cm.parse_coordinates(pdb.read_text(), protein_id)
                m = cm.contact_from_coords(coords, self.coord_threshold)
            else:
                raise UnresolvableSample(f"no contact map or structure for protein {protein_id!r}",
                                         protein_id)
            self._contacts[key] = cm.contact_features(m, self.config.grid)
        return self._contacts[key]

    def pair_contact(self, drug_id, protein_id):
        key = ("pair", drug_id, protein_id)
        if key not in self._contacts:
            path = self._sidecar(f"{drug_id}__{protein_id}.dist")
            if path is None:
                raise UnresolvableSample(
                    f"no docking distance matrix for {drug_id!r} with protein {protein_id!r}",
                    f"{drug_id}/{protein_id}")
            d = cm.DistanceMatrix(cm.parse_matrix(path.read_text()))
            m = cm.binarize_distances(d, self.distance_threshold)
            self._contacts[key] = cm.contact_features(m, self.config.grid)
        return self._contacts[key]

    # -- whole datasets ----------------------------------------------------------

    def prepare_sample(self, sample, protein):
        v = self.variant
        try:
            prepared = PreparedSample(sample.key, self.drug(sample.smiles), target=sample.affinity)
            if v.uses_cnn:
                prepared.tokens = self.tokens(protein)
            if v.uses_plm:
                prepared.plm = self.plm(protein)
            if v is Variant.PGRAPHDTA_CM1:
                prepared.contact = self.pair_contact(sample.drug_id, sample.protein_id)
            elif v is Variant.PGRAPHDTA_CM2:
                prepared.contact = self.protein_contact(sample.protein_id)
        except UnresolvableSample:
            raise
        except PgdtaError as exc:
            raise UnresolvableSample(f"sample {sample.key}: {exc.name}: {exc}", sample.key) from exc
        return prepared

    def prepare(self, bundle):
        """Featurise every sample up front; the first failure aborts."""
        return [self.prepare_sample(s, bundle.proteins[s.protein_id]) for s in bundle.samples]

    @property
    def plm_dim(self):
        for vec in self._plm.values():
            return vec.shape[0]
        return None


def collate(samples):
    """Stack prepared samples into one :class:`Batch`."""
    graphs = GraphBatch.from_graphs([s.graph for s in samples])

    def stack(attr):
        values = [getattr(s, attr) for s in samples]
        return None if any(v is None for v in values) else np.stack(values)

    return Batch(graphs, stack("tokens"), stack("plm"), stack("contact"),
                 np.array([s.target for s in samples], dtype=np.float64))
