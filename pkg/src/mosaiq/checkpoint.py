"""Binary checkpoint format (``.msq``).

Layout::

    b"MSQ1"
    section*          each: 4-byte ASCII tag, u64 LE payload length, payload

Sections, in order: CONF (config and run metadata as typed records), PCA_,
ASGN, GENP, DISC (named arrays).  Typed record: u16 key length, key bytes,
type byte, value -- ``f`` float64 LE, ``i`` int64 LE, ``s`` u32 length +
UTF-8, ``n`` null.  Named array: u16 name length, name, dtype byte (``f``
float64 LE / ``i`` int64 LE), u8 ndim, u64 LE dims, raw data.
"""
from __future__ import annotations

import dataclasses
import io
import struct

import numpy as np

from .disc import MlpParams
from .errors import CheckpointError
from .featmap import from_lists
from .pca import PcaModel
from .trainer import Checkpoint, TrainConfig

MAGIC = b"MSQ1"
SECTIONS = (b"CONF", b"PCA_", b"ASGN", b"GENP", b"DISC")
_DTYPES = {"f": np.dtype("<f8"), "i": np.dtype("<i8")}


# --- encoding ---------------------------------------------------------------

def _key(buf: io.BytesIO, name: str) -> None:
    raw = name.encode()
    buf.write(struct.pack("<H", len(raw)))
    buf.write(raw)


def _records(values: dict) -> bytes:
    buf = io.BytesIO()
    for name, v in values.items():
        _key(buf, name)
        if v is None:
            buf.write(b"n")
        elif isinstance(v, bool) or isinstance(v, (int, np.integer)):
            buf.write(b"i" + struct.pack("<q", int(v)))
        elif isinstance(v, (float, np.floating)):
            buf.write(b"f" + struct.pack("<d", float(v)))
        elif isinstance(v, str):
            raw = v.encode()
            buf.write(b"s" + struct.pack("<I", len(raw)) + raw)
        else:
            raise TypeError(f"cannot encode {name}={v!r}")
    return buf.getvalue()


def _arrays(arrays: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    for name, a in arrays.items():
        a = np.asarray(a)
        code = "i" if a.dtype.kind in "iub" else "f"
        _key(buf, name)
        buf.write(code.encode() + struct.pack("<B", a.ndim))
        buf.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        buf.write(np.ascontiguousarray(a, dtype=_DTYPES[code]).tobytes())
    return buf.getvalue()


def to_bytes(ckpt: Checkpoint) -> bytes:
    conf = dataclasses.asdict(ckpt.config)
    conf.update(
        ratio0=ckpt.ratio0,
        gen_loss=ckpt.gen_loss,
        disc_loss=ckpt.disc_loss,
        noise_bound=ckpt.noise_bound,
        iteration=ckpt.iteration,
        gen_param_count=ckpt.gen_param_count,
    )
    model = ckpt.pca
    payloads = [
        _records(conf),
        _arrays({
            "mean": model.mean,
            "components": model.components,
            "explained_variance": model.explained_variance,
            "feat_min": model.feat_min,
            "feat_range": model.feat_range,
        }),
        _arrays({"per_generator": ckpt.assignment.index}),
        _arrays(ckpt.gen_params),
        _arrays({f"layer{i}.{part}": a
                 for i, (w, b) in enumerate(zip(ckpt.disc_params.weights, ckpt.disc_params.biases))
                 for part, a in (("w", w), ("b", b))}),
    ]
    out = io.BytesIO()
    out.write(MAGIC)
    for tag, body in zip(SECTIONS, payloads):
        out.write(tag + struct.pack("<Q", len(body)))
        out.write(body)
    return out.getvalue()


def save(ckpt: Checkpoint, path) -> None:
    with open(path, "wb") as f:
        f.write(to_bytes(ckpt))


# --- decoding ---------------------------------------------------------------

class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise CheckpointError("checkpoint is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def key(self) -> str:
        (n,) = self.unpack("<H")
        try:
            return self.take(n).decode()
        except UnicodeDecodeError as e:
            raise CheckpointError("corrupt key in checkpoint") from e

    @property
    def done(self) -> bool:
        return self.pos == len(self.data)


def _read_records(body: bytes) -> dict:
    r = _Reader(body)
    out = {}
    while not r.done:
        name = r.key()
        code = r.take(1)
        if code == b"n":
            out[name] = None
        elif code == b"i":
            out[name] = r.unpack("<q")[0]
        elif code == b"f":
            out[name] = r.unpack("<d")[0]
        elif code == b"s":
            (n,) = r.unpack("<I")
            out[name] = r.take(n).decode()
        else:
            raise CheckpointError(f"unknown record type {code!r}")
    return out


def _read_arrays(body: bytes) -> dict[str, np.ndarray]:
    r = _Reader(body)
    out = {}
    while not r.done:
        name = r.key()
        code = r.take(1).decode(errors="replace")
        if code not in _DTYPES:
            raise CheckpointError(f"unknown array dtype {code!r}")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}Q")
        dt = _DTYPES[code]
        count = int(np.prod(shape, dtype=np.int64))
        out[name] = np.frombuffer(r.take(count * dt.itemsize), dtype=dt).reshape(shape).copy()
    return out


def from_bytes(data: bytes) -> Checkpoint:
    r = _Reader(data)
    if data[:4] != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)")
    r.take(4)
    sections = {}
    while not r.done:
        tag = r.take(4)
        (n,) = r.unpack("<Q")
        sections[tag] = r.take(n)
    missing = [t.decode() for t in SECTIONS if t not in sections]
    if missing:
        raise CheckpointError(f"checkpoint lacks sections {missing}")

    try:
        conf = _read_records(sections[b"CONF"])
        fields = {f.name for f in dataclasses.fields(TrainConfig)}
        config = TrainConfig(**{k: v for k, v in conf.items() if k in fields})
        p = _read_arrays(sections[b"PCA_"])
        model = PcaModel(p["mean"], p["components"], p["explained_variance"], p["feat_min"], p["feat_range"])
        assignment = from_lists(_read_arrays(sections[b"ASGN"])["per_generator"].tolist())
        gen_params = _read_arrays(sections[b"GENP"])
        d = _read_arrays(sections[b"DISC"])
        n_layers = len(d) // 2
        disc_params = MlpParams(tuple(d[f"layer{i}.w"] for i in range(n_layers)),
                                tuple(d[f"layer{i}.b"] for i in range(n_layers)))
        return Checkpoint(
            config=config,
            pca=model,
            assignment=assignment,
            gen_params=gen_params,
            disc_params=disc_params,
            ratio0=conf["ratio0"],
            gen_loss=conf["gen_loss"],
            disc_loss=conf["disc_loss"],
            noise_bound=conf["noise_bound"],
            iteration=conf["iteration"],
        )
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError, UnicodeDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint: {e}") from e


def load(path) -> Checkpoint:
    with open(path, "rb") as f:
        return from_bytes(f.read())
