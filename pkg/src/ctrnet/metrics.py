"""Evaluation metrics: rank-based AUC and mean log loss."""

import numpy as np

from ctrnet.kernels import PROB_CLAMP


def auc(scores, labels):
    """Area under the ROC curve via the Mann-Whitney statistic.

    Equals the probability that a uniformly chosen positive outscores a
    uniformly chosen negative, with ties counting one half; tied scores
    share their average rank.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = int((labels == 1).sum())
    neg = int((labels == 0).sum())
    if pos == 0 or neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")

    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    avg_rank = ends - (counts - 1) / 2.0  # mean of ranks start..end, 1-based
    ranks = avg_rank[inverse]

    u = ranks[labels == 1].sum() - pos * (pos + 1) / 2.0
    return float(u / (pos * neg))


def logloss(labels, probabilities):
    """Mean clamped cross-entropy of predicted probabilities."""
    y = np.asarray(labels, dtype=np.float64)
    if y.size == 0:
        raise ValueError("logloss of an empty set")
    p = np.clip(np.asarray(probabilities, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(np.mean(-y * np.log(p) - (1.0 - y) * np.log(1.0 - p)))


def format_percent(value):
    """Render a metric the way the result tables do, e.g. 0.707 -> '70.70%'."""
    return f"{100.0 * value:.2f}%"
