"""Document-level misinformation scoring: encoder model, training, metrics."""

from .baseline import (
    BaselineModel,
    baseline_evaluate,
    baseline_predict,
    baseline_scores,
    train_baseline,
)
from .checkpoint import load_model, save_model, vocab_fingerprint
from .metrics import (
    MetricsReport,
    PRPoint,
    confusion_counts,
    evaluate,
    matthews_corrcoef,
    metrics_report,
    pr_curve,
    precision_recall_f1,
)
from .model import (
    ModelConfig,
    ModelParams,
    forward,
    forward_batch,
    init_params,
    sigmoid,
    tensor_specs,
)
from .training import (
    TrainConfig,
    bce_with_logits,
    encode_corpus,
    predict,
    predict_scores,
    train,
)

__all__ = [
    "BaselineModel",
    "MetricsReport",
    "ModelConfig",
    "ModelParams",
    "PRPoint",
    "TrainConfig",
    "baseline_evaluate",
    "baseline_predict",
    "baseline_scores",
    "bce_with_logits",
    "confusion_counts",
    "encode_corpus",
    "evaluate",
    "forward",
    "forward_batch",
    "init_params",
    "load_model",
    "matthews_corrcoef",
    "metrics_report",
    "pr_curve",
    "precision_recall_f1",
    "predict",
    "predict_scores",
    "save_model",
    "sigmoid",
    "tensor_specs",
    "train",
    "train_baseline",
    "vocab_fingerprint",
]
