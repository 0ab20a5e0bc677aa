"""Numba-compiled loop implementations of the per-instance kernels.

Function-for-function mirror of `numpy_impl`; see that module for the
contracts. Explicit loops beat BLAS dispatch at the tiny operand sizes a
single sparse instance produces. No fastmath, no parallelism: results
must stay deterministic and IEEE-faithful.
"""

import numpy as np
from numba import njit

PROB_CLAMP = 1e-10


@njit(cache=True)
def _sigmoid_scalar(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def sigmoid(x):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = _sigmoid_scalar(x[i])
    return out


# --- factorisation machine -------------------------------------------------

@njit(cache=True)
def fm_score(w0, w, V, idx):
    n = idx.shape[0]
    k = V.shape[1]
    logit = w0
    for t in range(n):
        logit += w[idx[t]]
    for f in range(k):
        tot = 0.0
        sq = 0.0
        for t in range(n):
            e = V[idx[t], f]
            tot += e
            sq += e * e
        logit += 0.5 * (tot * tot - sq)
    return logit


@njit(cache=True)
def fm_step(w0, w, V, idx, y, lr, l2):
    n = idx.shape[0]
    k = V.shape[1]
    tot = np.zeros(k)
    logit = w0
    for t in range(n):
        j = idx[t]
        logit += w[j]
        for f in range(k):
            e = V[j, f]
            tot[f] += e
            logit -= 0.5 * e * e
    for f in range(k):
        logit += 0.5 * tot[f] * tot[f]
    yhat = _sigmoid_scalar(logit)
    g = yhat - y
    new_w0 = w0 - lr * (g + l2 * w0)
    for t in range(n):
        j = idx[t]
        w[j] -= lr * (g + l2 * w[j])
        for f in range(k):
            e = V[j, f]
            V[j, f] = e - lr * (g * (tot[f] - e) + l2 * e)
    return new_w0, yhat


# --- logistic regression ---------------------------------------------------

@njit(cache=True)
def lr_score(bias, w, idx):
    s = bias
    for t in range(idx.shape[0]):
        s += w[idx[t]]
    return s


@njit(cache=True)
def lr_step(bias, w, idx, y, lr, l2):
    yhat = _sigmoid_scalar(lr_score(bias, w, idx))
    g = yhat - y
    new_bias = bias - lr * (g + l2 * bias)
    for t in range(idx.shape[0]):
        j = idx[t]
        w[j] -= lr * (g + l2 * w[j])
    return new_bias, yhat


# --- dense layers ----------------------------------------------------------

@njit(cache=True)
def dense_forward(W, b, x, act):
    out = np.empty(W.shape[0])
    for i in range(W.shape[0]):
        s = b[i]
        for j in range(W.shape[1]):
            s += W[i, j] * x[j]
        if act == 1:
            out[i] = np.tanh(s)
        elif act == 2:
            out[i] = _sigmoid_scalar(s)
        else:
            out[i] = s
    return out


@njit(cache=True)
def dense_backward(W, a_prev, delta):
    rows = W.shape[0]
    cols = W.shape[1]
    dW = np.empty((rows, cols))
    db = np.empty(rows)
    d_prev = np.zeros(cols)
    for i in range(rows):
        d = delta[i]
        db[i] = d
        for j in range(cols):
            dW[i, j] = d * a_prev[j]
            d_prev[j] += W[i, j] * d
    return dW, db, d_prev


@njit(cache=True)
def activation_grad(d, a, act):
    out = np.empty_like(d)
    for i in range(d.shape[0]):
        if act == 1:
            out[i] = d[i] * (1.0 - a[i] * a[i])
        elif act == 2:
            out[i] = d[i] * a[i] * (1.0 - a[i])
        else:
            out[i] = d[i]
    return out


@njit(cache=True)
def sgd_update(param, grad, lr, l2):
    flat_p = param.ravel()
    flat_g = grad.ravel()
    for i in range(flat_p.shape[0]):
        flat_p[i] -= lr * (flat_g[i] + l2 * flat_p[i])


# --- sparse bottom layers --------------------------------------------------

@njit(cache=True)
def embed_gather(B, w0, idx):
    k1 = B.shape[0]
    z = np.empty(1 + k1 * idx.shape[0])
    z[0] = w0
    for t in range(idx.shape[0]):
        j = idx[t]
        base = 1 + t * k1
        for r in range(k1):
            z[base + r] = B[r, j]
    return z


@njit(cache=True)
def embed_scatter_update(B, dz, idx, lr, l2):
    k1 = B.shape[0]
    for t in range(idx.shape[0]):
        j = idx[t]
        base = 1 + t * k1
        for r in range(k1):
            e = B[r, j]
            B[r, j] = e - lr * (dz[base + r] + l2 * e)


@njit(cache=True)
def colsum_sigmoid(W0, b0, idx):
    out = np.empty(W0.shape[0])
    for r in range(W0.shape[0]):
        s = b0[r]
        for t in range(idx.shape[0]):
            s += W0[r, idx[t]]
        out[r] = _sigmoid_scalar(s)
    return out


@njit(cache=True)
def colsum_scatter_update(W0, ds, idx, lr, l2):
    for t in range(idx.shape[0]):
        j = idx[t]
        for r in range(W0.shape[0]):
            e = W0[r, j]
            W0[r, j] = e - lr * (ds[r] + l2 * e)


# --- RBM / DAE pre-training ------------------------------------------------

@njit(cache=True)
def rbm_cd1_cols(W0, vbias, hbias, idx, v, lr, u):
    hid = W0.shape[0]
    s = idx.shape[0]
    ph = np.empty(hid)
    h = np.empty(hid)
    for r in range(hid):
        acc = hbias[r]
        for t in range(s):
            acc += W0[r, idx[t]] * v[t]
        ph[r] = _sigmoid_scalar(acc)
        h[r] = 1.0 if u[r] < ph[r] else 0.0
    v1 = np.empty(s)
    for t in range(s):
        acc = vbias[idx[t]]
        for r in range(hid):
            acc += W0[r, idx[t]] * h[r]
        v1[t] = _sigmoid_scalar(acc)
    h1 = np.empty(hid)
    for r in range(hid):
        acc = hbias[r]
        for t in range(s):
            acc += W0[r, idx[t]] * v1[t]
        h1[r] = _sigmoid_scalar(acc)
    for r in range(hid):
        for t in range(s):
            W0[r, idx[t]] += lr * (h[r] * v[t] - h1[r] * v1[t])
        hbias[r] += lr * (h[r] - h1[r])
    for t in range(s):
        vbias[idx[t]] += lr * (v[t] - v1[t])


@njit(cache=True)
def dae_step_cols(W0, hbias, cbias, idx, v, v_tilde, lr):
    hid = W0.shape[0]
    s = idx.shape[0]
    h = np.empty(hid)
    for r in range(hid):
        acc = hbias[r]
        for t in range(s):
            acc += W0[r, idx[t]] * v_tilde[t]
        h[r] = _sigmoid_scalar(acc)
    vhat = np.empty(s)
    for t in range(s):
        acc = cbias[idx[t]]
        for r in range(hid):
            acc += W0[r, idx[t]] * h[r]
        vhat[t] = _sigmoid_scalar(acc)
    d_out = np.empty(s)
    loss = 0.0
    for t in range(s):
        d_out[t] = vhat[t] - v[t]
        p = vhat[t]
        if p < PROB_CLAMP:
            p = PROB_CLAMP
        elif p > 1.0 - PROB_CLAMP:
            p = 1.0 - PROB_CLAMP
        loss -= v[t] * np.log(p) + (1.0 - v[t]) * np.log(1.0 - p)
    dsh = np.empty(hid)
    for r in range(hid):
        acc = 0.0
        for t in range(s):
            acc += W0[r, idx[t]] * d_out[t]
        dsh[r] = acc * h[r] * (1.0 - h[r])
    for r in range(hid):
        for t in range(s):
            W0[r, idx[t]] -= lr * (h[r] * d_out[t] + dsh[r] * v_tilde[t])
        hbias[r] -= lr * dsh[r]
    for t in range(s):
        cbias[idx[t]] -= lr * d_out[t]
    return loss
