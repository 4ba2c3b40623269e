"""Transformer encoder with a single-logit classification head.

Float64 numpy throughout, with hand-written backward passes so analytic
gradients can be verified against finite differences. The encoder is a
standard post-norm stack: embeddings + learned positions, multi-head
self-attention with padded keys masked out, GELU feed-forward, residual
connections and layer norm; the logit is read from the [CLS] position
after the final layer.

Forward passes are read-only on the parameters and safe to run
concurrently; training owns and mutates them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erf

from ..errors import ModelError
from ..tokenizer import TokenSequence

LN_EPS = 1e-12
NEG_INF = -1e30


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int
    hidden_dim: int
    num_heads: int
    ffn_dim: int
    max_seq_len: int
    vocab_size: int
    dropout_rate: float = 0.1

    def __post_init__(self):
        for name in ("num_layers", "hidden_dim", "num_heads", "ffn_dim", "max_seq_len", "vocab_size"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")
        if self.hidden_dim % self.num_heads != 0:
            raise ModelError(
                f"hidden_dim {self.hidden_dim} not divisible by num_heads {self.num_heads}"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ModelError(f"dropout_rate must be in [0,1), got {self.dropout_rate}")

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.num_heads

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def toy(cls, vocab_size: int, max_seq_len: int = 256, dropout_rate: float = 0.1) -> "ModelConfig":
        """Desk-scale default: 2 layers, hidden 128, 4 heads, ffn 512."""
        return cls(
            num_layers=2,
            hidden_dim=128,
            num_heads=4,
            ffn_dim=512,
            max_seq_len=max_seq_len,
            vocab_size=vocab_size,
            dropout_rate=dropout_rate,
        )


def tensor_specs(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) list; checkpoint files store tensors in this order."""
    h, f, s, v = config.hidden_dim, config.ffn_dim, config.max_seq_len, config.vocab_size
    specs: list[tuple[str, tuple[int, ...]]] = [
        ("tok_emb", (v, h)),
        ("pos_emb", (s, h)),
        ("emb_ln_g", (h,)),
        ("emb_ln_b", (h,)),
    ]
    for i in range(config.num_layers):
        p = f"layers.{i}."
        specs += [
            (p + "wq", (h, h)), (p + "bq", (h,)),
            (p + "wk", (h, h)), (p + "bk", (h,)),
            (p + "wv", (h, h)), (p + "bv", (h,)),
            (p + "wo", (h, h)), (p + "bo", (h,)),
            (p + "ln1_g", (h,)), (p + "ln1_b", (h,)),
            (p + "w1", (h, f)), (p + "b1", (f,)),
            (p + "w2", (f, h)), (p + "b2", (h,)),
            (p + "ln2_g", (h,)), (p + "ln2_b", (h,)),
        ]
    specs += [("head_w", (h,)), ("head_b", ())]
    return specs


class ModelParams:
    """Named float64 tensors in canonical order."""

    def __init__(self, config: ModelConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        expected = tensor_specs(config)
        ordered: dict[str, np.ndarray] = {}
        for name, shape in expected:
            if name not in tensors:
                raise ModelError(f"missing tensor {name}")
            arr = tensors[name]
            if tuple(arr.shape) != shape:
                raise ModelError(f"tensor {name} has shape {arr.shape}, expected {shape}")
            ordered[name] = arr
        self.tensors = ordered

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if name not in self.tensors:
            raise ModelError(f"unknown tensor {name}")
        self.tensors[name] = value

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Gaussian(0, 0.02) weights, zero biases, layer-norm scale 1 / offset 0."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in tensor_specs(config):
        base = name.rsplit(".", 1)[-1]
        if base in ("emb_ln_g", "ln1_g", "ln2_g"):
            tensors[name] = np.ones(shape)
        elif base in ("emb_ln_b", "ln1_b", "ln2_b") or base.startswith("b") or base == "head_b":
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.normal(0.0, 0.02, size=shape)
    return ModelParams(config, tensors)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _gelu(x):
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _gelu_grad(x):
    cdf = 0.5 * (1.0 + erf(x / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return cdf + x * pdf


def _layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv)


def _layer_norm_backward(dy, g, cache):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dg, db


def _softmax_last(x):
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _dropout(x, rate, rng):
    if rate <= 0.0 or rng is None:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(np.float64) / (1.0 - rate)
    return x * keep, keep


def _check_finite(x, where):
    if not np.all(np.isfinite(x)):
        raise ModelError(f"non-finite values after {where}")


def _split_heads(x, nh, dh):
    b, s, _ = x.shape
    return x.reshape(b, s, nh, dh).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, nh, s, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, s, nh * dh)


def forward_batch(params: ModelParams, ids: np.ndarray, mask: np.ndarray,
                  training: bool = False, dropout_rng=None, with_cache: bool = False):
    """Run the encoder on a batch; returns logits [B] (and caches if asked).

    ``mask`` is 1 on real positions, 0 on padding; padded positions are
    excluded as attention keys in every layer, so their content cannot
    reach the [CLS] logit.
    """
    cfg = params.config
    ids = np.asarray(ids)
    mask = np.asarray(mask, dtype=np.float64)
    if ids.ndim != 2 or ids.shape[1] != cfg.max_seq_len:
        raise ModelError(
            f"sequence length {ids.shape[-1] if ids.ndim else '?'} does not match "
            f"configured max_seq_len {cfg.max_seq_len}"
        )
    if ids.shape != mask.shape:
        raise ModelError("ids and mask shapes differ")
    if int(ids.max()) >= cfg.vocab_size or int(ids.min()) < 0:
        raise ModelError("token id out of range for configured vocab_size")

    rate = cfg.dropout_rate if training else 0.0
    rng = dropout_rng if training else None
    nh, dh = cfg.num_heads, cfg.head_dim
    inv_scale = 1.0 / math.sqrt(dh)
    add_mask = np.where(mask > 0, 0.0, NEG_INF)  # additive: 0 real, -1e30 pad

    x = params["tok_emb"][ids] + params["pos_emb"][np.newaxis, :, :]
    x, emb_ln_cache = _layer_norm(x, params["emb_ln_g"], params["emb_ln_b"])
    x, emb_drop = _dropout(x, rate, rng)
    _check_finite(x, "embedding layer")

    layer_caches = []
    for i in range(cfg.num_layers):
        p = f"layers.{i}."
        x_in = x
        q = _split_heads(x_in @ params[p + "wq"] + params[p + "bq"], nh, dh)
        k = _split_heads(x_in @ params[p + "wk"] + params[p + "bk"], nh, dh)
        v = _split_heads(x_in @ params[p + "wv"] + params[p + "bv"], nh, dh)
        scores = np.matmul(q, k.transpose(0, 1, 3, 2)) * inv_scale
        scores = scores + add_mask[:, np.newaxis, np.newaxis, :]
        probs = _softmax_last(scores)
        ctx = _merge_heads(np.matmul(probs, v))
        attn_out = ctx @ params[p + "wo"] + params[p + "bo"]
        attn_out, drop1 = _dropout(attn_out, rate, rng)
        res1 = x_in + attn_out
        h1, ln1_cache = _layer_norm(res1, params[p + "ln1_g"], params[p + "ln1_b"])

        pre = h1 @ params[p + "w1"] + params[p + "b1"]
        act = _gelu(pre)
        ffn_out = act @ params[p + "w2"] + params[p + "b2"]
        ffn_out, drop2 = _dropout(ffn_out, rate, rng)
        res2 = h1 + ffn_out
        x, ln2_cache = _layer_norm(res2, params[p + "ln2_g"], params[p + "ln2_b"])
        _check_finite(x, f"encoder layer {i}")

        if with_cache:
            layer_caches.append({
                "x_in": x_in, "q": q, "k": k, "v": v, "probs": probs, "ctx": ctx,
                "drop1": drop1, "ln1": ln1_cache, "h1": h1, "pre": pre, "act": act,
                "drop2": drop2, "ln2": ln2_cache,
            })

    cls = x[:, 0, :]
    logits = cls @ params["head_w"] + params["head_b"]
    _check_finite(logits, "classification head")

    if not with_cache:
        return logits
    cache = {
        "ids": ids, "emb_ln": emb_ln_cache, "emb_drop": emb_drop,
        "layers": layer_caches, "cls": cls,
    }
    return logits, cache


def backward_batch(params: ModelParams, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. every tensor, given d(loss)/d(logits)."""
    cfg = params.config
    nh, dh = cfg.num_heads, cfg.head_dim
    inv_scale = 1.0 / math.sqrt(dh)
    grads = {name: np.zeros(shape) for name, shape in tensor_specs(cfg)}

    cls = cache["cls"]
    grads["head_w"] += cls.T @ dlogits
    grads["head_b"] += dlogits.sum()
    dx = np.zeros((cls.shape[0], cfg.max_seq_len, cfg.hidden_dim))
    dx[:, 0, :] = np.outer(dlogits, params["head_w"])

    for i in reversed(range(cfg.num_layers)):
        p = f"layers.{i}."
        c = cache["layers"][i]

        dres2, dg2, db2 = _layer_norm_backward(dx, params[p + "ln2_g"], c["ln2"])
        grads[p + "ln2_g"] += dg2
        grads[p + "ln2_b"] += db2
        dffn_out = dres2 if c["drop2"] is None else dres2 * c["drop2"]
        dh1 = dres2.copy()

        flat = lambda a: a.reshape(-1, a.shape[-1])
        grads[p + "w2"] += flat(c["act"]).T @ flat(dffn_out)
        grads[p + "b2"] += flat(dffn_out).sum(axis=0)
        dact = dffn_out @ params[p + "w2"].T
        dpre = dact * _gelu_grad(c["pre"])
        grads[p + "w1"] += flat(c["h1"]).T @ flat(dpre)
        grads[p + "b1"] += flat(dpre).sum(axis=0)
        dh1 += dpre @ params[p + "w1"].T

        dres1, dg1, db1 = _layer_norm_backward(dh1, params[p + "ln1_g"], c["ln1"])
        grads[p + "ln1_g"] += dg1
        grads[p + "ln1_b"] += db1
        dattn_out = dres1 if c["drop1"] is None else dres1 * c["drop1"]
        dx = dres1.copy()

        grads[p + "wo"] += flat(c["ctx"]).T @ flat(dattn_out)
        grads[p + "bo"] += flat(dattn_out).sum(axis=0)
        dctx = _split_heads(dattn_out @ params[p + "wo"].T, nh, dh)

        dprobs = np.matmul(dctx, c["v"].transpose(0, 1, 3, 2))
        dv = np.matmul(c["probs"].transpose(0, 1, 3, 2), dctx)
        probs = c["probs"]
        dscores = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
        dq = np.matmul(dscores, c["k"]) * inv_scale
        dk = np.matmul(dscores.transpose(0, 1, 3, 2), c["q"]) * inv_scale

        x_in = c["x_in"]
        for mat, dmat in (("wq", dq), ("wk", dk), ("wv", dv)):
            merged = _merge_heads(dmat)
            grads[p + mat] += flat(x_in).T @ flat(merged)
            grads[p + "b" + mat[1]] += flat(merged).sum(axis=0)
            dx += merged @ params[p + mat].T

    if cache["emb_drop"] is not None:
        dx = dx * cache["emb_drop"]
    dx0, dg, db = _layer_norm_backward(dx, params["emb_ln_g"], cache["emb_ln"])
    grads["emb_ln_g"] += dg
    grads["emb_ln_b"] += db
    grads["pos_emb"] += dx0.sum(axis=0)
    np.add.at(grads["tok_emb"], cache["ids"], dx0)
    return grads


def forward(params: ModelParams, seq: TokenSequence) -> float:
    """Logit for one encoded sequence, read from the [CLS] position."""
    ids = np.asarray(seq.ids)[np.newaxis, :]
    mask = np.asarray(seq.attention_mask, dtype=np.float64)[np.newaxis, :]
    return float(forward_batch(params, ids, mask)[0])
