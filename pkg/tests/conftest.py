import json
from pathlib import Path

import numpy as np
import pytest

from pgdta.model import ModelConfig

DATA = Path(__file__).parent / "data"

# Small enough for exhaustive finite differences, same topology as the default.
TINY = ModelConfig(gat_heads=(2, 2, 1), gat_widths=(3, 3, 4), drug_dim=5, embed_dim=3,
                   cnn_filters=(3, 3, 3), kernel=3, max_len=16, protein_dim=4, plm_dim=6,
                   grid=4, contact_dim=3, head=(6, 5), dropout=0.2)

# Small enough to overfit ten samples in a few seconds.
TOY = ModelConfig(gat_heads=(2, 2, 1), gat_widths=(8, 8, 16), drug_dim=32, embed_dim=8,
                  cnn_filters=(8, 8, 8), kernel=4, max_len=64, protein_dim=32, plm_dim=16,
                  grid=8, contact_dim=16, head=(128, 64), dropout=0.0)

TOY_INI = """\
[run]
variant = {variant}
seed = {seed}

[data]
interactions = data/interactions.csv
sequences = data/proteins.fasta
kind = davis

[train]
epochs = {epochs}
batch_size = 10
learning_rate = 0.0005

[model]
gat_heads = 2,2,1
gat_widths = 8,8,16
drug_dim = 32
embed_dim = 8
cnn_filters = 8,8,8
kernel = 4
max_len = 64
protein_dim = 32
plm_dim = 16
grid = 8
contact_dim = 16
head = 128,64
dropout = 0.0

[output]
checkpoint = out/model.ckpt
history = out/history.csv
"""


def golden_smiles():
    return json.loads((DATA / "davis_smiles_golden.json").read_text())


def numeric_grad(f, array, eps=1e-5, skip=None):
    """Central differences of scalar ``f()`` with respect to ``array`` in place."""
    grad = np.zeros_like(array)
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        if skip is not None and skip(idx):
            continue
        old = array[idx]
        array[idx] = old + eps
        up = f()
        array[idx] = old - eps
        down = f()
        array[idx] = old
        grad[idx] = (up - down) / (2 * eps)
    return grad


def rel_error(a, b, floor=1e-10):
    """Norm-relative error of two gradient arrays.

    ``floor`` keeps gradients that vanish identically (both sides at
    rounding level) from reading as a 100% error.
    """
    denom = max(np.linalg.norm(a), np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / denom)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory):
    from pgdta.synthetic import write_dataset

    root = tmp_path_factory.mktemp("toy")
    write_dataset(root / "data", n_samples=10, n_proteins=3, seed=0, kind="davis")
    return root


def write_toy_ini(root, variant="PGraphDta", seed=1, epochs=20, name="toy.ini"):
    path = Path(root) / name
    path.write_text(TOY_INI.format(variant=variant, seed=seed, epochs=epochs))
    return path


# One verdict line per acceptance criterion, shown in the terminal summary.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
