"""Write a small synthetic dataset and a matching run config.

    python tools/make_toy_dataset.py toy
    pgdta train toy/toy.ini

The dataset has every side input (embeddings, structures, contact
probabilities, docking distances), so all four variants can train on it.
"""

import argparse
from pathlib import Path

from pgdta.synthetic import write_dataset

CONFIG = """\
[run]
variant = {variant}
seed = 1

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


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("dest")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--proteins", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", default="PGraphDtaCm2")
    p.add_argument("--epochs", type=int, default=500)
    args = p.parse_args()
    dest = Path(args.dest)
    write_dataset(dest / "data", n_samples=args.samples, n_proteins=args.proteins, seed=args.seed,
                  kind="davis")
    (dest / "toy.ini").write_text(CONFIG.format(variant=args.variant, epochs=args.epochs))
    print(f"wrote {dest / 'data'} and {dest / 'toy.ini'}")


if __name__ == "__main__":
    main()
