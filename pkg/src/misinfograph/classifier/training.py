"""Training loop: BCE-with-logits loss, adaptive-moment updates, seeded batching.

The loss is computed in its numerically stable form directly on logits,
so probabilities for the two classes stay independent and no sigmoid
overflow can occur. Runs are bitwise reproducible for a fixed seed:
batch order, dropout masks and update order are all derived from it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..corpus import Corpus
from ..errors import InputError, ModelError
from ..tokenizer import Vocab, encode, tokenize
from .model import ModelParams, backward_batch, forward_batch, sigmoid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 3e-5
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise InputError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise InputError(f"learning_rate must be > 0, got {self.learning_rate}")


def bce_with_logits(logit, label):
    """Stable binary cross-entropy on the raw logit.

    max(z,0) - z*y + log1p(exp(-|z|)); never overflows, even for |z|
    around 1e8. Accepts scalars or arrays.
    """
    z = np.asarray(logit, dtype=np.float64)
    y = np.asarray(label, dtype=np.float64)
    loss = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    return float(loss) if loss.ndim == 0 else loss


def encode_corpus(corpus_or_docs, vocab: Vocab, max_seq_len: int):
    """Tokenize and encode documents into (ids, mask, labels) arrays."""
    docs = list(corpus_or_docs)
    if not docs:
        raise InputError("no documents to encode")
    n = len(docs)
    ids = np.zeros((n, max_seq_len), dtype=np.int64)
    mask = np.zeros((n, max_seq_len), dtype=np.float64)
    labels = np.zeros(n, dtype=np.float64)
    for i, doc in enumerate(docs):
        seq = encode(vocab, tokenize(vocab, doc.text), max_seq_len)
        ids[i] = seq.ids
        mask[i] = seq.attention_mask
        labels[i] = doc.label
    return ids, mask, labels


class _Adam:
    """Adaptive moment estimation with bias correction."""

    def __init__(self, params: ModelParams, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}

    def step(self, params: ModelParams, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name in params.tensors:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            mhat = self.m[name] / b1c
            vhat = self.v[name] / b2c
            params.tensors[name] = params.tensors[name] - self.lr * mhat / (np.sqrt(vhat) + self.eps)


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    norm = np.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return float(norm)


def train(params: ModelParams, train_corpus: Corpus, vocab: Vocab,
          train_config: TrainConfig) -> tuple[ModelParams, list[float]]:
    """Mini-batch training; returns the params and per-epoch mean batch loss.

    Gradients are averaged over the batch, clipped to a global norm, and
    applied with adaptive moments. Non-finite loss aborts with the
    offending epoch/batch index.
    """
    cfg = params.config
    if len(vocab) != cfg.vocab_size:
        raise ModelError(
            f"vocab size {len(vocab)} does not match configured vocab_size {cfg.vocab_size}"
        )
    if len(train_corpus) == 0:
        raise InputError("training corpus is empty")

    ids, mask, labels = encode_corpus(train_corpus, vocab, cfg.max_seq_len)
    n = len(labels)
    optimizer = _Adam(params, train_config.learning_rate, train_config.beta1,
                      train_config.beta2, train_config.adam_eps)
    shuffle_rng = np.random.default_rng([train_config.seed, 1])

    history: list[float] = []
    for epoch in range(train_config.epochs):
        order = shuffle_rng.permutation(n)
        batch_losses = []
        for b, start in enumerate(range(0, n, train_config.batch_size)):
            idx = order[start:start + train_config.batch_size]
            drop_rng = np.random.default_rng([train_config.seed, 2, epoch, b])
            try:
                logits, cache = forward_batch(
                    params, ids[idx], mask[idx],
                    training=True, dropout_rng=drop_rng, with_cache=True,
                )
            except ModelError as e:
                raise ModelError(
                    f"training diverged at epoch {epoch}, batch {b}: {e}"
                ) from e
            losses = bce_with_logits(logits, labels[idx])
            loss = float(np.mean(losses))
            if not np.isfinite(loss):
                raise ModelError(f"non-finite loss at epoch {epoch}, batch {b}")
            dlogits = (sigmoid(logits) - labels[idx]) / len(idx)
            grads = backward_batch(params, cache, dlogits)
            clip_global_norm(grads, train_config.clip_norm)
            optimizer.step(params, grads)
            batch_losses.append(loss)
        history.append(float(np.mean(batch_losses)))
        logger.info("epoch %d/%d: mean batch loss %.6f", epoch + 1, train_config.epochs, history[-1])
    return params, history


def predict(params: ModelParams, vocab: Vocab, text: str,
            threshold: float = 0.5) -> tuple[float, int]:
    """Score one text; returns (probability of class 1, thresholded label).

    Label is 1 when probability >= threshold.
    """
    seq = encode(vocab, tokenize(vocab, text), params.config.max_seq_len)
    logit = forward_batch(
        params,
        np.asarray([seq.ids], dtype=np.int64),
        np.asarray([seq.attention_mask], dtype=np.float64),
    )[0]
    prob = float(sigmoid(np.asarray(logit)))
    return prob, int(prob >= threshold)


def predict_scores(params: ModelParams, ids, mask, batch_size: int = 32) -> np.ndarray:
    """Probabilities for pre-encoded sequences, evaluated in batches."""
    out = []
    for start in range(0, len(ids), batch_size):
        logits = forward_batch(params, ids[start:start + batch_size], mask[start:start + batch_size])
        out.append(sigmoid(logits))
    return np.concatenate(out)


def mean_loss_and_grads(params: ModelParams, ids, mask, labels):
    """Mean BCE loss over a fixed batch and its analytic gradients.

    Shared by training and by gradient-verification tests; dropout off.
    """
    logits, cache = forward_batch(params, ids, mask, with_cache=True)
    loss = float(np.mean(bce_with_logits(logits, np.asarray(labels, dtype=np.float64))))
    dlogits = (sigmoid(logits) - np.asarray(labels, dtype=np.float64)) / len(labels)
    grads = backward_batch(params, cache, dlogits)
    return loss, grads


def mean_loss(params: ModelParams, ids, mask, labels) -> float:
    logits = forward_batch(params, ids, mask)
    return float(np.mean(bce_with_logits(logits, np.asarray(labels, dtype=np.float64))))
