"""Factorisation machine: sparse prediction and per-instance SGD training.

Doubles as the CTR baseline and as the supervised initializer for the
field-wise bottom layer of the deep model.
"""

import math
from dataclasses import dataclass

import numpy as np

from ctrnet import kernels
from ctrnet.errors import TrainingDiverged
from ctrnet.net import cross_entropy
from ctrnet.train import SgdTrainer, fit_with_early_stopping


@dataclass
class FmModel:
    """Global bias, per-feature bias and per-feature latent vectors."""

    schema: object
    w0: float
    w: np.ndarray   # (N,)
    V: np.ndarray   # (N, K)

    @property
    def k(self):
        return self.V.shape[1]

    def check_finite(self):
        if not (math.isfinite(self.w0) and np.isfinite(self.w).all() and np.isfinite(self.V).all()):
            raise TrainingDiverged("fm: non-finite parameters")


def init_fm(schema, k, rng):
    """Zero biases, latent entries uniform in +-0.01 to avoid early saturation."""
    if k < 1:
        raise ValueError("latent dimension must be at least 1")
    n = schema.total_features
    return FmModel(
        schema=schema,
        w0=0.0,
        w=np.zeros(n),
        V=rng.uniform(-0.01, 0.01, size=(n, k)),
    )


def _check_indices(model, active):
    if active.min() < 0 or active.max() >= model.w.shape[0]:
        raise IndexError("active feature index out of range")


def fm_predict(model, instance):
    """sigmoid(w0 + sum of active biases + pairwise latent inner products).

    Only active features contribute; the pairwise sum uses the O(nK)
    identity 0.5 * (|sum v|^2 - sum |v|^2).
    """
    _check_indices(model, instance.active)
    return sigmoid_scalar(kernels.fm_score(model.w0, model.w, model.V, instance.active))


def sigmoid_scalar(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def fm_grad_step(model, instance, learning_rate, l2_lambda=0.0):
    """One SGD step on the cross-entropy; touches only active parameters.

    L2 decay applies lazily, to the touched parameters only. Returns the
    instance loss; raises TrainingDiverged when it is not finite.
    """
    if learning_rate <= 0:
        raise ValueError("learning rate must be positive")
    _check_indices(model, instance.active)
    new_w0, yhat = kernels.fm_step(
        model.w0, model.w, model.V, instance.active,
        float(instance.label), learning_rate, l2_lambda,
    )
    model.w0 = float(new_w0)
    loss = cross_entropy(instance.label, yhat)
    if not math.isfinite(loss):
        raise TrainingDiverged("fm: non-finite loss")
    return loss


class FmTrainer(SgdTrainer):
    kind = "fm"

    def init(self, train_ds, config, rng):
        return init_fm(train_ds.schema, config.k, rng)

    def epoch(self, model, dataset, order, config, rng):
        lr = config.learning_rate
        l2 = config.l2_lambda
        w0 = model.w0
        total = 0.0
        for i in order:
            w0, yhat = kernels.fm_step(
                w0, model.w, model.V, dataset.actives[i],
                float(dataset.labels[i]), lr, l2,
            )
            total += cross_entropy(dataset.labels[i], yhat)
        model.w0 = float(w0)
        return total / len(order)

    def predict(self, model, instance):
        return fm_predict(model, instance)


def fm_train(train_ds, valid_ds, config):
    """SGD with early stopping; returns the best-validation snapshot."""
    model, _ = fit_with_early_stopping(FmTrainer(), train_ds, valid_ds, config)
    return model
