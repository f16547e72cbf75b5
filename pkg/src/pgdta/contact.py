"""Residue contact maps and binarised distance maps.

Conventions: coordinate and distance maps use strict ``<`` against the
threshold, probability maps use inclusive ``>=``; the diagonal is always 1.

Plain-text matrix files have the size on the first line followed by that
many rows of whitespace-separated numbers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedAtomLine,
    MatrixFormatError,
    NoAtomRecords,
    NotSquare,
    NotSymmetric,
    OutOfRange,
    ShapeMismatch,
)
from .layers import Dense
from .tensor import Tensor, relu, reshape

log = logging.getLogger(__name__)

DEFAULT_COORD_THRESHOLD = 8.0
DEFAULT_PROB_THRESHOLD = 0.5
DEFAULT_DISTANCE_THRESHOLD = 10.0
DEFAULT_GRID = 32

C_BETA = "C_beta"
C_ALPHA_FALLBACK = "C_alpha_fallback"


@dataclass
class ResiduePoint:
    residue_index: int
    x: float
    y: float
    z: float
    atom_kind: str
    residue_name: str = ""
    residue_number: int = 0


@dataclass
class ResidueCoordinates:
    protein_id: str
    points: list
    skipped: int = 0

    def xyz(self):
        return np.array([[p.x, p.y, p.z] for p in self.points], dtype=np.float64).reshape(-1, 3)


@dataclass
class ContactMap:
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        b = self.bits
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise NotSquare(f"contact map must be square, got {b.shape}")
        if not (b == b.T).all():
            raise NotSymmetric("contact map is not symmetric")
        if not b.diagonal().all():
            raise OutOfRange("contact map diagonal must be all ones")

    @property
    def size(self):
        return self.bits.shape[0]

    def density(self):
        return float(self.bits.mean())


@dataclass
class DistanceMatrix:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise NotSquare(f"distance matrix must be square, got {v.shape}")
        if not np.isfinite(v).all() or (v < 0).any():
            raise OutOfRange("distances must be finite and non-negative")
        if not np.array_equal(v, v.T):
            raise NotSymmetric("distance matrix is not symmetric")
        if (v.diagonal() != 0).any():
            raise OutOfRange("distance matrix diagonal must be zero")
        self.values = v

    @property
    def size(self):
        return self.values.shape[0]


# -- PDB coordinates ---------------------------------------------------------------

def _atom_fields(line, lineno):
    if len(line.rstrip("\n")) < 54:
        raise MalformedAtomLine(f"line {lineno}: ATOM record shorter than 54 columns")
    try:
        return (
            line[12:16].strip(),
            line[16],
            line[17:20].strip(),
            line[21],
            int(line[22:26]),
            line[26],
            float(line[30:38]),
            float(line[38:46]),
            float(line[46:54]),
        )
    except ValueError:
        raise MalformedAtomLine(f"line {lineno}: non-numeric residue number or coordinate") from None


def parse_coordinates(text, protein_id=""):
    """One representative point per residue: Cβ, or Cα when Cβ is absent.

    Only the first MODEL is read. Residues with neither atom are skipped and
    counted in ``skipped``.
    """
    residues = {}
    order = []
    saw_atom = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("ENDMDL"):
            break
        if line[:6].rstrip() != "ATOM":
            continue
        saw_atom = True
        name, alt, resname, chain, resseq, icode, x, y, z = _atom_fields(line, lineno)
        key = (chain, resseq, icode)
        if key not in residues:
            residues[key] = {"name": resname, "number": resseq}
            order.append(key)
        slot = residues[key]
        if name in ("CB", "CA") and name not in slot and alt in (" ", "A", "1"):
            slot[name] = (x, y, z)
    if not saw_atom:
        raise NoAtomRecords("no ATOM records found")

    points, skipped = [], 0
    for key in order:
        slot = residues[key]
        if "CB" in slot:
            xyz, kind = slot["CB"], C_BETA
        elif "CA" in slot:
            xyz, kind = slot["CA"], C_ALPHA_FALLBACK
        else:
            skipped += 1
            continue
        points.append(ResiduePoint(len(points), *xyz, kind, slot["name"], slot["number"]))
    if skipped:
        log.warning("%s: skipped %d residue(s) without CB or CA", protein_id or "structure", skipped)
    return ResidueCoordinates(protein_id, points, skipped)


# -- map construction -----------------------------------------------------------------

def pairwise_distances(xyz):
    diff = xyz[:, None, :] - xyz[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def contact_from_coords(coords, threshold_angstrom=DEFAULT_COORD_THRESHOLD):
    xyz = coords.xyz() if isinstance(coords, ResidueCoordinates) else np.asarray(coords, float)
    if len(xyz) == 0:
        raise ShapeMismatch("no residues to build a contact map from")
    if threshold_angstrom <= 0:
        raise OutOfRange("threshold must be positive")
    bits = pairwise_distances(xyz) < threshold_angstrom
    np.fill_diagonal(bits, True)
    return ContactMap(bits)


def contact_from_probabilities(probs, threshold=DEFAULT_PROB_THRESHOLD):
    """Symmetrise by elementwise max, then keep entries ``>= threshold``."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise NotSquare(f"probability matrix must be square, got {p.shape}")
    if not np.isfinite(p).all() or (p < 0).any() or (p > 1).any():
        raise OutOfRange("probabilities must lie in [0, 1]")
    bits = np.maximum(p, p.T) >= threshold
    np.fill_diagonal(bits, True)
    return ContactMap(bits)


def binarize_distances(d, threshold_angstrom=DEFAULT_DISTANCE_THRESHOLD):
    d = d if isinstance(d, DistanceMatrix) else DistanceMatrix(d)
    bits = d.values < threshold_angstrom
    np.fill_diagonal(bits, True)
    return ContactMap(bits)


# -- text matrices ----------------------------------------------------------------------

def parse_matrix(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(lines[0].strip())
        rows = [[float(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise MatrixFormatError(f"non-numeric matrix entry: {exc}") from None
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise NotSquare(f"header declares {n}x{n}, body has {len(rows)} rows "
                        f"of widths {sorted({len(r) for r in rows})}")
    return np.array(rows, dtype=np.float64)


def format_matrix(values):
    values = np.asarray(values)
    if values.dtype == bool:
        body = "\n".join(" ".join("1" if v else "0" for v in row) for row in values)
    else:
        body = "\n".join(" ".join(repr(float(v)) for v in row) for row in values)
    return f"{len(values)}\n{body}\n"


# -- encoding ----------------------------------------------------------------------------

def pool_grid(m, grid=DEFAULT_GRID):
    """Block-average an L x L map onto grid x grid cells of side ceil(L/grid).

    Partial edge blocks average over their real cells only; cells with no
    real entries (maps smaller than the grid, or tails past L) are 0.
    """
    bits = m.bits if isinstance(m, ContactMap) else np.asarray(m)
    size = bits.shape[0]
    block = max(1, math.ceil(size / grid))
    padded = grid * block
    values = np.zeros((padded, padded))
    present = np.zeros((padded, padded))
    keep = min(size, padded)
    values[:keep, :keep] = bits[:keep, :keep]
    present[:keep, :keep] = 1.0
    sums = values.reshape(grid, block, grid, block).sum(axis=(1, 3))
    counts = present.reshape(grid, block, grid, block).sum(axis=(1, 3))
    return np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)


def contact_features(m, grid=DEFAULT_GRID):
    """Flattened pooled grid, the fixed-width input of the contact branch."""
    return pool_grid(m, grid).reshape(-1)


def encode_contact_map(m, params, grid=DEFAULT_GRID):
    """Pooled, flattened map through dense + relu to d_cm."""
    flat = contact_features(m, grid)
    if flat.size != params.d_in:
        raise ShapeMismatch(f"grid {grid} gives {flat.size} features, layer expects {params.d_in}")
    out = relu(params(Tensor(flat[None, :])))
    return reshape(out, (params.d_out,))


def init_contact_params(rng, grid=DEFAULT_GRID, out_dim=128):
    return Dense.init(rng, grid * grid, out_dim, "contact.dense")
