"""Checkpoint files: self-describing binary container for model weights.

Layout: 8-byte magic, uint32 little-endian header length, UTF-8 JSON
header, then every tensor as little-endian float64 in the canonical
order given by tensor_specs. The header records the architecture and a
vocabulary fingerprint so a checkpoint can refuse to load against a
mismatched vocab instead of silently producing garbage.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ModelError
from ..tokenizer import Vocab
from .model import ModelConfig, ModelParams, tensor_specs

MAGIC = b"MIGCKPT1"
FORMAT_VERSION = 1


def vocab_fingerprint(vocab: Vocab) -> str:
    joined = "\n".join(vocab.tokens).encode("utf-8")
    return hashlib.blake2b(joined, digest_size=16).hexdigest()


def save_model(path, params: ModelParams, vocab: Vocab, meta: dict | None = None) -> None:
    path = Path(path)
    specs = tensor_specs(params.config)
    header = {
        "format_version": FORMAT_VERSION,
        "config": params.config.to_dict(),
        "vocab_hash": vocab_fingerprint(vocab),
        "tensor_order": [name for name, _ in specs],
        "dtype": "<f8",
    }
    if meta:
        header["meta"] = meta
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for name, _ in specs:
            fh.write(np.ascontiguousarray(params[name], dtype="<f8").tobytes())


def load_model(path, vocab: Vocab | None = None) -> tuple[ModelParams, dict]:
    """Read a checkpoint; returns (params, header).

    With a vocab given, the stored fingerprint must match it exactly.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < len(MAGIC) + 4 or blob[: len(MAGIC)] != MAGIC:
        raise ModelError(f"{path} is not a model checkpoint (bad magic)")
    (header_len,) = struct.unpack_from("<I", blob, len(MAGIC))
    header_start = len(MAGIC) + 4
    header_end = header_start + header_len
    if len(blob) < header_end:
        raise ModelError(f"truncated checkpoint header in {path}")
    try:
        header = json.loads(blob[header_start:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelError(f"corrupt checkpoint header in {path}: {exc}") from exc

    if header.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported checkpoint format version {header.get('format_version')!r}")
    try:
        config = ModelConfig(**header["config"])
    except (KeyError, TypeError) as exc:
        raise ModelError(f"checkpoint header missing a valid config: {exc}") from exc

    specs = tensor_specs(config)
    if header.get("tensor_order") != [name for name, _ in specs]:
        raise ModelError("checkpoint tensor layout does not match its declared architecture")
    if vocab is not None and header.get("vocab_hash") != vocab_fingerprint(vocab):
        raise ModelError(
            "checkpoint was trained with a different vocabulary; "
            "re-run with the vocab file it was saved against"
        )

    tensors = {}
    offset = header_end
    for name, shape in specs:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(blob):
            raise ModelError(f"truncated checkpoint: tensor {name} is incomplete")
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        tensors[name] = arr.reshape(shape).astype(np.float64).copy()
        offset += nbytes
    if offset != len(blob):
        raise ModelError(f"checkpoint has {len(blob) - offset} trailing bytes")
    return ModelParams(config, tensors), header
