"""Command-line interface: ``mosaiq {train,generate,evaluate,baseline}``.

Exit codes: 0 ok, 2 bad arguments, 3 data/file errors, 4 non-finite loss,
5 corrupt checkpoint.  Diagnostics go to stderr; stdout carries only the
``metric,class,value`` CSV payload.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from . import checkpoint, dataio, metrics, pca, trainer
from .errors import CheckpointError, MosaiqError, NumericError

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC, EXIT_CHECKPOINT = 0, 2, 3, 4, 5

# flag name -> TrainConfig field
TRAIN_FLAGS = {
    "k": "k",
    "sub-generators": "sub_generators",
    "qubits": "n_qubits",
    "layers": "n_layers",
    "batch": "batch",
    "iterations": "iterations",
    "lr-gen": "lr_gen",
    "lr-disc": "lr_disc",
    "seed": "seed",
    "class": "class_id",
    "noise-mode": "noise_mode",
    "max-images": "max_images",
}
_FLAG_TYPES = {"lr_gen": float, "lr_disc": float, "noise_mode": str}


class UsageError(Exception):
    pass


def _fail(code: int, message: str) -> int:
    print(f"mosaiq: {message}", file=sys.stderr)
    return code


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("_", "-")
            if key not in TRAIN_FLAGS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _convert(field: str, value):
    if value is None:
        return None
    kind = _FLAG_TYPES.get(field, int)
    try:
        return kind(value)
    except ValueError as e:
        raise UsageError(f"bad value for {field}: {value!r}") from e


def build_config(args) -> trainer.TrainConfig:
    """Defaults < config file < command-line flags."""
    values = {}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            values[TRAIN_FLAGS[key]] = _convert(TRAIN_FLAGS[key], value)
    for field in TRAIN_FLAGS.values():
        v = getattr(args, field, None)
        if v is not None:
            values[field] = v
    mode = values.pop("noise_mode", None)
    try:
        if mode is not None:
            values["noise_mode"], values["fixed_bound"] = trainer.parse_noise_mode(mode)
        return trainer.TrainConfig(**values)
    except (ValueError, TypeError) as e:
        raise UsageError(str(e)) from e


def _add_train_flags(p: argparse.ArgumentParser, with_class=True) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    for flag, field in TRAIN_FLAGS.items():
        if flag == "class" and not with_class:
            continue
        kind = _FLAG_TYPES.get(field, int)
        p.add_argument(f"--{flag}", dest=field, type=kind, default=None)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--images", required=True, help="IDX image file (uncompressed)")
    p.add_argument("--labels", required=True, help="IDX label file (uncompressed)")


def _load_class(args, class_id: int) -> dataio.ImageSet:
    for path in (args.images, args.labels):
        if not os.path.isfile(path):
            raise FileNotFoundError(path)
    data = dataio.filter_class(dataio.load_idx(args.images, args.labels), class_id)
    if len(data) == 0:
        raise MosaiqError(f"no images of class {class_id} in {args.images}")
    return data


def _emit(rows, class_id: int, out_path=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "class", "value"])
    for name, value in rows:
        w.writerow([name, class_id, repr(float(value)) if isinstance(value, float) else value])
    sys.stdout.write(buf.getvalue())
    if out_path:
        with open(out_path, "w") as f:
            f.write(buf.getvalue())


def _write_log(history, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iteration", "G_L", "D_L", "noise_bound"])
        for it, g, d, bound in history:
            w.writerow([it, repr(g), repr(d), repr(bound)])


def _train_and_save(args, classical: bool) -> int:
    config = build_config(args)
    data = _load_class(args, config.class_id)
    os.makedirs(args.out, exist_ok=True)
    run = trainer.baseline_classical_pca if classical else trainer.train
    ckpt = run(config, data)
    checkpoint.save(ckpt, os.path.join(args.out, "checkpoint.msq"))
    _write_log(ckpt.history, os.path.join(args.out, "log.csv"))
    _emit([
        ("iterations", ckpt.iteration),
        ("G_L", ckpt.gen_loss),
        ("D_L", ckpt.disc_loss),
        ("noise_bound", ckpt.noise_bound),
        ("generator_params", ckpt.gen_param_count),
    ], config.class_id)
    return EXIT_OK


def cmd_train(args) -> int:
    return _train_and_save(args, classical=False)


def _read_checkpoint(path) -> trainer.Checkpoint:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    return checkpoint.load(path)


def cmd_generate(args) -> int:
    ckpt = _read_checkpoint(args.checkpoint)
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    images = trainer.sample_images(ckpt, args.count, np.random.default_rng(args.seed), bound=args.bound)
    if args.count:
        dataio.export_pgm_batch(images, args.out)
    print(f"wrote {args.count} images to {args.out}", file=sys.stderr)
    return EXIT_OK


def _variance_rows(images):
    v = metrics.variance_scores(images)
    return [
        ("variance_min", float(v.min())),
        ("variance_median", float(np.median(v))),
        ("variance_max", float(v.max())),
    ]


def cmd_evaluate(args) -> int:
    sources = [args.checkpoint is not None, args.image_dir is not None, args.baseline is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --checkpoint, --image-dir, --baseline")
    real = _load_class(args, args.class_id).images
    rng = np.random.default_rng(args.seed)
    if args.checkpoint is not None:
        generated = trainer.sample_images(_read_checkpoint(args.checkpoint), args.count, rng)
    elif args.image_dir is not None:
        if not os.path.isdir(args.image_dir):
            raise FileNotFoundError(args.image_dir)
        generated = dataio.load_pgm_dir(args.image_dir)
    else:
        model = pca.fit(real, args.k)
        generated = trainer.baseline_pca_inverse(model, args.count, rng)
    rows = [("fid", metrics.fid(real, generated))] + _variance_rows(generated)
    rows.append(("n_generated", len(generated)))
    _emit(rows, args.class_id, args.out)
    return EXIT_OK


def cmd_baseline(args) -> int:
    if args.name == "classical-pca":
        return _train_and_save(args, classical=True)
    config = build_config(args)
    data = _load_class(args, config.class_id)
    x = data.images[: config.max_images] if config.max_images else data.images
    model = pca.fit(x, config.k)
    images = trainer.baseline_pca_inverse(model, args.count, np.random.default_rng(config.seed))
    if args.count:
        dataio.export_pgm_batch(images, args.out)
    else:
        os.makedirs(args.out, exist_ok=True)
    print(f"wrote {args.count} images to {args.out}", file=sys.stderr)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mosaiq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the quantum generator on one class")
    _add_data_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="sample images from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=float, default=None, help="noise bound (default: final training bound)")
    p.add_argument("--out", required=True, help="directory for img_NNNN.pgm files")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="FID and variance scores against a class")
    _add_data_flags(p)
    p.add_argument("--class", dest="class_id", type=int, required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--image-dir")
    p.add_argument("--baseline", choices=["pca-inverse"])
    p.add_argument("--k", type=int, default=40, help="PCA size for --baseline")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run an ablation baseline")
    p.add_argument("name", choices=["pca-inverse", "classical-pca"])
    _add_data_flags(p)
    _add_train_flags(p)
    p.add_argument("--count", type=int, default=500, help="images to write (pca-inverse)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("train", "baseline") and args.config is None and args.class_id is None:
            raise UsageError("--class is required")
        if getattr(args, "class_id", None) is not None and not 0 <= args.class_id <= 9:
            raise UsageError("--class must be in 0..9")
        return args.func(args)
    except UsageError as e:
        return _fail(EXIT_ARGS, str(e))
    except FileNotFoundError as e:
        return _fail(EXIT_DATA, f"no such file: {e.filename or e}")
    except CheckpointError as e:
        return _fail(EXIT_CHECKPOINT, f"bad checkpoint: {e}")
    except NumericError as e:
        return _fail(EXIT_NUMERIC, str(e))
    except (MosaiqError, OSError) as e:
        return _fail(EXIT_DATA, str(e))


if __name__ == "__main__":
    sys.exit(main())
