"""Vectorized numpy implementations of the per-instance kernels.

This is the fallback backend and the reference for the numba versions in
`numba_impl`. Both modules expose the same function set with identical
semantics; index arrays are int64, everything else float64.

Activation codes: 0 = linear, 1 = tanh, 2 = sigmoid.
"""

import numpy as np

PROB_CLAMP = 1e-10


def sigmoid(x):
    """Numerically stable logistic function for scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def _apply_activation(s, act):
    if act == 1:
        return np.tanh(s)
    if act == 2:
        return sigmoid(s)
    return s


# --- factorisation machine -------------------------------------------------

def fm_score(w0, w, V, idx):
    """Logit of the FM over the active feature set, via the O(nK) identity."""
    vs = V[idx]
    tot = vs.sum(axis=0)
    pairwise = 0.5 * (tot @ tot - (vs * vs).sum())
    return float(w0 + w[idx].sum() + pairwise)


def fm_step(w0, w, V, idx, y, lr, l2):
    """One SGD step on the cross-entropy of the FM; touches active rows only.

    Updates w and V in place, returns (new w0, predicted probability).
    """
    vs = V[idx]
    tot = vs.sum(axis=0)
    logit = w0 + w[idx].sum() + 0.5 * (tot @ tot - (vs * vs).sum())
    yhat = sigmoid(logit)
    g = yhat - y
    new_w0 = w0 - lr * (g + l2 * w0)
    w[idx] -= lr * (g + l2 * w[idx])
    V[idx] -= lr * (g * (tot[None, :] - vs) + l2 * vs)
    return new_w0, float(yhat)


# --- logistic regression ---------------------------------------------------

def lr_score(bias, w, idx):
    return float(bias + w[idx].sum())


def lr_step(bias, w, idx, y, lr, l2):
    """One SGD step on the cross-entropy of the LR; touches active weights only."""
    yhat = sigmoid(bias + w[idx].sum())
    g = yhat - y
    new_bias = bias - lr * (g + l2 * bias)
    w[idx] -= lr * (g + l2 * w[idx])
    return new_bias, float(yhat)


# --- dense layers ----------------------------------------------------------

def dense_forward(W, b, x, act):
    return _apply_activation(W @ x + b, act)


def dense_backward(W, a_prev, delta):
    """Gradients of one dense layer given delta = dL/d(pre-activation)."""
    dW = np.outer(delta, a_prev)
    db = delta.copy()
    d_prev = W.T @ delta
    return dW, db, d_prev


def activation_grad(d, a, act):
    """Pull a gradient back through an activation using its stored output."""
    if act == 1:
        return d * (1.0 - a * a)
    if act == 2:
        return d * a * (1.0 - a)
    return d.copy()


def sgd_update(param, grad, lr, l2):
    """In-place theta <- theta - lr * (grad + l2 * theta)."""
    param -= lr * (grad + l2 * param)


# --- sparse bottom layers --------------------------------------------------

def embed_gather(B, w0, idx):
    """Assemble the embedding vector (w0, B[:, idx_1], ..., B[:, idx_n])."""
    k1 = B.shape[0]
    z = np.empty(1 + k1 * idx.shape[0])
    z[0] = w0
    z[1:] = B[:, idx].T.ravel()
    return z


def embed_scatter_update(B, dz, idx, lr, l2):
    """Apply dz (layout as in embed_gather, minus position 0) to active columns."""
    k1 = B.shape[0]
    cols = dz[1:].reshape(idx.shape[0], k1).T
    B[:, idx] -= lr * (cols + l2 * B[:, idx])


def colsum_sigmoid(W0, b0, idx):
    """Sigmoid of the sum of active columns plus bias (one-hot product)."""
    return sigmoid(W0[:, idx].sum(axis=1) + b0)


def colsum_scatter_update(W0, ds, idx, lr, l2):
    """Each active column receives the same pre-activation gradient ds."""
    W0[:, idx] -= lr * (ds[:, None] + l2 * W0[:, idx])


# --- RBM / DAE pre-training ------------------------------------------------

def rbm_cd1_cols(W0, vbias, hbias, idx, v, lr, u):
    """CD-1 update of a Bernoulli RBM restricted to the columns in idx.

    v holds the visible values for those columns; u holds uniform draws
    (one per hidden unit) used to sample the hidden state.
    """
    Wn = W0[:, idx]
    ph = sigmoid(Wn @ v + hbias)
    h = (u < ph).astype(np.float64)
    v1 = sigmoid(Wn.T @ h + vbias[idx])
    h1 = sigmoid(Wn @ v1 + hbias)
    W0[:, idx] += lr * (np.outer(h, v) - np.outer(h1, v1))
    vbias[idx] += lr * (v - v1)
    hbias += lr * (h - h1)


def dae_step_cols(W0, hbias, cbias, idx, v, v_tilde, lr):
    """One tied-weight DAE step on the sampled columns.

    Encodes the corrupted input v_tilde, decodes with the transposed
    weights, and descends the summed cross-entropy against the clean v.
    Returns that reconstruction loss.
    """
    Wn = W0[:, idx]
    h = sigmoid(Wn @ v_tilde + hbias)
    vhat = sigmoid(Wn.T @ h + cbias[idx])
    d_out = vhat - v
    dh = Wn @ d_out
    dsh = dh * h * (1.0 - h)
    W0[:, idx] -= lr * (np.outer(h, d_out) + np.outer(dsh, v_tilde))
    hbias -= lr * dsh
    cbias[idx] -= lr * d_out
    p = np.clip(vhat, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-(v * np.log(p) + (1.0 - v) * np.log(1.0 - p)).sum())
