"""Command-line entry point: ``pgdta <command> ...``.

Runs are described by an INI-style file with sections::

    [run]      variant, seed
    [data]     interactions, sequences, kind, sidecar_dir, embeddings,
               pseudo_embeddings, per_residue, train_fraction, split_seed
    [train]    epochs, batch_size, learning_rate, adam_beta1, adam_beta2,
               adam_eps, eval_every, early_stop_patience
    [model]    any ModelConfig field (tuples as comma lists)
    [contact]  coord_threshold, prob_threshold, distance_threshold
    [output]   checkpoint, history

Any key can be overridden on the command line as ``--section.key value``
(or ``--key value`` when the key name is unique). Relative paths resolve
against the config file's directory. Exit codes: 0 ok, 1 config,
2 input/data, 3 internal invariant.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

from . import contact as cm
from .data import InteractionSample, load_dataset, read_fasta, split
from .errors import ConfigError, EmptyDataset, MissingProtein, PgdtaError
from .features import FeatureStore
from .model import ModelConfig, Variant, checkpoint_bytes, model_from_bytes
from .protein import load_embeddings
from .smiles import featurize_atoms, parse_smiles
from .train import TrainConfig, evaluate, predict, train

log = logging.getLogger("pgdta")

_SCHEMA = {
    "run": {"variant": str, "seed": int},
    "data": {"interactions": Path, "sequences": Path, "kind": str, "sidecar_dir": Path,
             "embeddings": Path, "pseudo_embeddings": bool, "per_residue": bool,
             "train_fraction": float, "split_seed": int},
    "train": {"epochs": int, "batch_size": int, "learning_rate": float, "adam_beta1": float,
              "adam_beta2": float, "adam_eps": float, "eval_every": int,
              "early_stop_patience": int},
    "model": {},
    "contact": {"coord_threshold": float, "prob_threshold": float, "distance_threshold": float},
    "output": {"checkpoint": Path, "history": Path},
}
for _f in fields(ModelConfig):
    _SCHEMA["model"][_f.name] = tuple if isinstance(_f.default, tuple) else type(_f.default)

_DEFAULTS = {
    ("run", "variant"): "PGraphDta", ("run", "seed"): 0,
    ("data", "kind"): "generic", ("data", "pseudo_embeddings"): False,
    ("data", "per_residue"): False, ("data", "train_fraction"): 1.0, ("data", "split_seed"): 0,
    ("contact", "coord_threshold"): cm.DEFAULT_COORD_THRESHOLD,
    ("contact", "prob_threshold"): cm.DEFAULT_PROB_THRESHOLD,
    ("contact", "distance_threshold"): cm.DEFAULT_DISTANCE_THRESHOLD,
}


def _convert(kind, raw, where):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is tuple:
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if kind is Path:
            return raw
        if kind is int and raw.lower() in ("", "none"):
            return None
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind.__name__}") from None


@dataclass
class RunConfig:
    """Validated run description; ``values`` maps (section, key) to typed values."""

    values: dict
    base_dir: Path

    @classmethod
    def load(cls, path=None, overrides=()):
        parser = configparser.ConfigParser(interpolation=None)
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file {path} not found")
            try:
                parser.read(path)
            except configparser.Error as exc:
                raise ConfigError(f"{path}: {exc}") from None
            base = path.resolve().parent
        raw = {}
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                raw[(section, key)] = value
        for key, value in overrides:
            raw[_resolve_key(key)] = value
        values = dict(_DEFAULTS)
        for (section, key), value in raw.items():
            values[(section, key)] = _convert(_SCHEMA[section][key], value, f"{section}.{key}")
        seed = os.environ.get("PGDTA_SEED")
        if seed is not None:
            values[("run", "seed")] = _convert(int, seed, "PGDTA_SEED")
        cfg = cls(values, base)
        cfg.validate()
        return cfg

    def get(self, section, key, default=None):
        return self.values.get((section, key), default)

    def path(self, section, key):
        value = self.get(section, key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def validate(self):
        try:
            Variant.parse(self.get("run", "variant"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.get("data", "kind") not in ("davis", "kiba", "generic"):
            raise ConfigError("data.kind must be davis, kiba or generic")
        self.model_config()
        self.train_config()

    @property
    def variant(self):
        return Variant.parse(self.get("run", "variant"))

    def model_config(self, base=None):
        kw = {k: v for (s, k), v in self.values.items() if s == "model"}
        try:
            cfg = (base or ModelConfig()).with_overrides(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model section: {exc}") from None
        if cfg.gnn not in ("gat", "gcn") or cfg.plm_pool not in ("mean", "max"):
            raise ConfigError("model.gnn must be gat/gcn and model.plm_pool mean/max")
        if not 0.0 <= cfg.dropout < 1.0:
            raise ConfigError("model.dropout must lie in [0, 1)")
        return cfg

    def train_config(self):
        kw = {k: v for (s, k), v in self.values.items() if s == "train"}
        try:
            return TrainConfig(variant=self.variant, seed=self.get("run", "seed"), **kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def require_paths(self, *keys):
        """Fail with exit 1 unless every named input path is set and exists."""
        out = []
        for section, key in keys:
            p = self.path(section, key)
            if p is None:
                raise ConfigError(f"{section}.{key} is required")
            if not p.exists():
                raise ConfigError(f"{section}.{key}: {p} does not exist")
            out.append(p)
        return out

    def store(self, variant, model_config):
        sidecar = self.path("data", "sidecar_dir")
        if sidecar is None and self.get("data", "interactions") is not None:
            sidecar = self.path("data", "interactions").parent
        return FeatureStore(
            variant, model_config, sidecar_dir=sidecar,
            embeddings=self.path("data", "embeddings"),
            pseudo_embeddings=self.get("data", "pseudo_embeddings"),
            pseudo_dim=model_config.plm_dim, per_residue=self.get("data", "per_residue"),
            coord_threshold=self.get("contact", "coord_threshold"),
            prob_threshold=self.get("contact", "prob_threshold"),
            distance_threshold=self.get("contact", "distance_threshold"))


def _resolve_key(key):
    if "." in key:
        section, name = key.split(".", 1)
        if section in _SCHEMA and name in _SCHEMA[section]:
            return section, name
        raise ConfigError(f"unknown config key {key}")
    hits = [(s, key) for s in _SCHEMA if key in _SCHEMA[s]]
    if len(hits) != 1:
        raise ConfigError(f"unknown or ambiguous config key {key}")
    return hits[0]


def _split_overrides(extra):
    pairs = []
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:].replace("-", "_")
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise ConfigError(f"override {token} needs a value")
        pairs.append((key, value))
    return pairs


def atomic_write(path, data):
    """Write bytes or text via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands ---------------------------------------------------------------------

def cmd_parse_smiles(args):
    if args.file:
        text = Path(args.file).read_text().strip()
    elif args.smiles is not None:
        text = args.smiles
    else:
        raise ConfigError("give a SMILES string or --file")
    graph = parse_smiles(text)
    feats = featurize_atoms(graph)
    aromatic = sum(a.aromatic for a in graph.atoms)
    aromatic_bonds = sum(b.order == "aromatic" for b in graph.bonds)
    print(f"atoms={graph.n_atoms} bonds={len(graph.bonds)} aromatic_atoms={aromatic} "
          f"aromatic_bonds={aromatic_bonds} features={feats.shape[0]}x{feats.shape[1]}")


def cmd_contact_map(args):
    text = Path(args.input).read_text()
    if args.mode == "coords":
        threshold = cm.DEFAULT_COORD_THRESHOLD if args.threshold is None else args.threshold
        m = cm.contact_from_coords(cm.parse_coordinates(text, Path(args.input).stem), threshold)
    elif args.mode == "probs":
        threshold = cm.DEFAULT_PROB_THRESHOLD if args.threshold is None else args.threshold
        m = cm.contact_from_probabilities(cm.parse_matrix(text), threshold)
    else:
        threshold = cm.DEFAULT_DISTANCE_THRESHOLD if args.threshold is None else args.threshold
        m = cm.binarize_distances(cm.DistanceMatrix(cm.parse_matrix(text)), threshold)
    if args.output:
        atomic_write(args.output, cm.format_matrix(m.bits))
    else:
        sys.stderr.write(cm.format_matrix(m.bits))
    n = m.bits.shape[0]
    print(f"L={n} density={m.bits.sum() / (n * n):.6f}")


def cmd_train(args):
    cfg = RunConfig.load(args.config, _split_overrides(args.overrides))
    interactions, sequences = cfg.require_paths(("data", "interactions"), ("data", "sequences"))
    if cfg.get("data", "embeddings") is not None:
        cfg.require_paths(("data", "embeddings"))
    if cfg.get("data", "sidecar_dir") is not None:
        cfg.require_paths(("data", "sidecar_dir"))
    checkpoint, history_path = cfg.path("output", "checkpoint"), cfg.path("output", "history")
    if checkpoint is None or history_path is None:
        raise ConfigError("output.checkpoint and output.history are required")
    tc, mc = cfg.train_config(), cfg.model_config()

    bundle = load_dataset(interactions, sequences, cfg.get("data", "kind"))
    fraction = cfg.get("data", "train_fraction")
    if fraction < 1.0:
        train_bundle, val_bundle = split(bundle, fraction, cfg.get("data", "split_seed"))
    else:
        train_bundle, val_bundle = bundle, None
    store = cfg.store(tc.variant, mc)
    train_samples = store.prepare(train_bundle)
    val_samples = store.prepare(val_bundle) if val_bundle is not None else None
    if tc.variant.uses_plm and store.plm_dim != mc.plm_dim:
        log.info("language-model embeddings have dim %d; using it for model.plm_dim", store.plm_dim)
        mc = mc.with_overrides(plm_dim=store.plm_dim)

    def progress(rec):
        log.debug("epoch %d train_mse=%.6f val_mse=%s", rec.epoch, rec.train_mse, rec.val_mse)

    model, history = train(train_samples, tc, mc, val_samples, progress=progress)
    atomic_write(checkpoint, checkpoint_bytes(model))
    atomic_write(history_path, history.to_csv())
    final_train = evaluate(model, train_samples)
    line = f"epochs={len(history)} train_mse={final_train:.6f}"
    if val_samples:
        line += f" val_mse={evaluate(model, val_samples):.6f}"
    print(line)


def _load_checkpoint(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"checkpoint {path} not found")
    return model_from_bytes(path.read_bytes())


def cmd_eval(args):
    model = _load_checkpoint(args.checkpoint)
    cfg = RunConfig.load(args.config, _split_overrides(args.overrides))
    interactions, sequences = cfg.require_paths(("data", "interactions"), ("data", "sequences"))
    bundle = load_dataset(interactions, sequences, cfg.get("data", "kind"))
    if args.subset != "all":
        fraction = cfg.get("data", "train_fraction")
        if not fraction < 1.0:
            raise ConfigError("--subset needs data.train_fraction < 1")
        parts = split(bundle, fraction, cfg.get("data", "split_seed"))
        bundle = parts[0] if args.subset == "train" else parts[1]
    if len(bundle) == 0:
        raise EmptyDataset("no samples to evaluate")
    prepared = cfg.store(model.variant, model.config).prepare(bundle)
    print(f"mse={evaluate(model, prepared):.6f}")


def cmd_predict(args):
    stage = "checkpoint"
    try:
        model = _load_checkpoint(args.checkpoint)
        stage = "protein"
        data_dir = Path(args.data_dir)
        fasta = Path(args.sequences) if args.sequences else data_dir / "proteins.fasta"
        proteins = read_fasta(fasta) if fasta.is_file() else {}
        if args.protein_id not in proteins:
            raise MissingProtein(f"protein {args.protein_id!r} not found in {fasta}")
        stage = "features"
        store = FeatureStore(model.variant, model.config, sidecar_dir=data_dir,
                             embeddings=args.embeddings, pseudo_embeddings=args.pseudo_embeddings,
                             pseudo_dim=model.config.plm_dim)
        sample = InteractionSample(args.drug_id, args.smiles, args.protein_id, 0.0)
        prepared = store.prepare_sample(sample, proteins[args.protein_id])
        stage = "model"
        value = float(predict(model, [prepared])[0])
    except PgdtaError as exc:
        exc.stage = stage
        raise
    print(f"{value:.6f}")


def cmd_inspect_embeddings(args):
    matrices = load_embeddings(args.path)
    dims = sorted({m.rows.shape[1] for m in matrices.values()})
    rows = sum(m.rows.shape[0] for m in matrices.values())
    print(f"records={len(matrices)} dims={','.join(map(str, dims)) or '-'} rows={rows}")


def build_parser():
    p = argparse.ArgumentParser(prog="pgdta", description="Drug-target affinity engine")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse-smiles", help="parse a SMILES string and report counts")
    s.add_argument("smiles", nargs="?")
    s.add_argument("--file")
    s.set_defaults(func=cmd_parse_smiles)

    s = sub.add_parser("contact-map", help="build a binary contact map")
    s.add_argument("input")
    s.add_argument("--mode", choices=("coords", "probs", "distances"), required=True)
    s.add_argument("--threshold", type=float)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_contact_map)

    for name, func, help_ in (("train", cmd_train, "train a model from a run config"),
                              ("eval", cmd_eval, "report MSE of a checkpoint on a dataset")):
        s = sub.add_parser(name, help=help_)
        if name == "eval":
            s.add_argument("checkpoint")
            s.add_argument("--subset", choices=("all", "train", "val"), default="all")
        s.add_argument("config")
        s.set_defaults(func=func)

    s = sub.add_parser("predict", help="predict one drug-protein affinity")
    s.add_argument("checkpoint")
    s.add_argument("--smiles", required=True)
    s.add_argument("--protein-id", required=True)
    s.add_argument("--drug-id", default="query")
    s.add_argument("--data-dir", default=".")
    s.add_argument("--sequences")
    s.add_argument("--embeddings")
    s.add_argument("--pseudo-embeddings", action="store_true")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("inspect-embeddings", help="summarise an embedding file")
    s.add_argument("path")
    s.set_defaults(func=cmd_inspect_embeddings)
    return p


def _describe(exc):
    parts = [exc.name]
    stage = getattr(exc, "stage", None)
    if stage:
        parts.append(f"stage={stage}")
    position = getattr(exc, "position", None)
    if position is not None:
        parts.append(f"offset={position}")
    sample = getattr(exc, "sample_id", None)
    if sample is not None:
        parts.append(f"id={sample}")
    return " ".join(parts) + f": {exc}"


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.func in (cmd_train, cmd_eval):
        args.overrides = extra
    elif extra:
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except PgdtaError as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
