"""Logistic-regression reference scorer over hashed unigrams and bigrams.

Deliberately simple: word features hashed into a fixed bucket space,
binary presence values, full-batch gradient descent from an all-zero
start. No randomness anywhere, so results are exactly reproducible.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import InputError
from ..tokenizer import split_words
from .metrics import MetricsReport, metrics_report
from .model import sigmoid


@dataclass
class BaselineModel:
    n_features: int
    weights: np.ndarray
    bias: float


def _feature_hash(feature: str, n_features: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) % n_features


def featurize(text: str, n_features: int) -> list[int]:
    """Hashed bucket indices for the words and adjacent word pairs of a text."""
    words = split_words(text)
    feats = list(words)
    feats.extend(f"{a} {b}" for a, b in zip(words, words[1:]))
    return [_feature_hash(f, n_features) for f in feats]


def _design_matrix(texts: list[str], n_features: int) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    for text in texts:
        cols = sorted(set(featurize(text, n_features)))
        indices.extend(cols)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), n_features),
    )


def train_baseline(docs, n_features: int = 2**18, epochs: int = 200,
                   learning_rate: float = 1.0, l2: float = 1e-4) -> BaselineModel:
    """Fit the scorer by full-batch gradient descent on the log loss."""
    docs = list(docs)
    if not docs:
        raise InputError("no documents to train on")
    texts = [d.text for d in docs]
    y = np.asarray([d.label for d in docs], dtype=np.float64)
    x = _design_matrix(texts, n_features)
    n = len(texts)

    w = np.zeros(n_features, dtype=np.float64)
    b = 0.0
    for _ in range(epochs):
        z = x.dot(w) + b
        residual = sigmoid(z) - y
        grad_w = x.T.dot(residual) / n + l2 * w
        grad_b = float(np.mean(residual))
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return BaselineModel(n_features=n_features, weights=w, bias=b)


def baseline_scores(model: BaselineModel, texts) -> np.ndarray:
    x = _design_matrix(list(texts), model.n_features)
    return sigmoid(x.dot(model.weights) + model.bias)


def baseline_predict(model: BaselineModel, text: str, threshold: float = 0.5) -> tuple[float, int]:
    prob = float(baseline_scores(model, [text])[0])
    return prob, int(prob >= threshold)


def baseline_evaluate(model: BaselineModel, docs, threshold: float = 0.5) -> MetricsReport:
    docs = list(docs)
    labels = np.asarray([d.label for d in docs], dtype=np.int64)
    scores = baseline_scores(model, [d.text for d in docs])
    return metrics_report(labels, scores, threshold)
