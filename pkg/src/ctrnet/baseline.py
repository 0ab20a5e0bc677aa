"""Logistic regression over the sparse one-hot features — the linear baseline."""

import math
from dataclasses import dataclass

import numpy as np

from ctrnet import kernels
from ctrnet.errors import TrainingDiverged
from ctrnet.fm import sigmoid_scalar
from ctrnet.net import cross_entropy
from ctrnet.train import SgdTrainer, fit_with_early_stopping


@dataclass
class LrModel:
    schema: object
    bias: float
    w: np.ndarray  # (N,)


def init_lr(schema):
    return LrModel(schema=schema, bias=0.0, w=np.zeros(schema.total_features))


def lr_predict(model, instance):
    """sigmoid(bias + sum of active weights); the logit is additive in features."""
    active = instance.active
    if active.min() < 0 or active.max() >= model.w.shape[0]:
        raise IndexError("active feature index out of range")
    return sigmoid_scalar(kernels.lr_score(model.bias, model.w, active))


class LrTrainer(SgdTrainer):
    kind = "lr"

    def init(self, train_ds, config, rng):
        return init_lr(train_ds.schema)

    def epoch(self, model, dataset, order, config, rng):
        lr = config.learning_rate
        l2 = config.l2_lambda
        bias = model.bias
        total = 0.0
        for i in order:
            bias, yhat = kernels.lr_step(
                bias, model.w, dataset.actives[i],
                float(dataset.labels[i]), lr, l2,
            )
            total += cross_entropy(dataset.labels[i], yhat)
        model.bias = float(bias)
        if not math.isfinite(model.bias):
            raise TrainingDiverged("lr: non-finite bias")
        return total / len(order)

    def predict(self, model, instance):
        return lr_predict(model, instance)


def lr_train(train_ds, valid_ds, config):
    """Per-instance SGD with lazy L2 and early stopping; best snapshot wins."""
    model, _ = fit_with_early_stopping(LrTrainer(), train_ds, valid_ds, config)
    return model
