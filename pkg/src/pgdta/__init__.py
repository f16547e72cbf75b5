"""Drug-target binding affinity regression from drug graphs, protein
sequences, language-model embeddings and contact maps, on a small numpy
autodiff engine."""

from .data import DatasetBundle, InteractionSample, davis_log_transform, load_dataset, split
from .errors import PgdtaError
from .model import Model, ModelConfig, Variant, forward, mse_loss
from .smiles import MolecularGraph, featurize_atoms, parse_smiles
from .tensor import Tensor, no_grad
from .train import TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "DatasetBundle", "InteractionSample", "Model", "ModelConfig", "MolecularGraph",
    "PgdtaError", "Tensor", "TrainConfig", "Variant", "davis_log_transform", "evaluate",
    "featurize_atoms", "forward", "load_dataset", "mse_loss", "no_grad", "parse_smiles",
    "split", "train",
]
