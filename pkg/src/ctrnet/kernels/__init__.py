"""Per-instance numeric kernels, bound to the backend chosen at import.

`ctrnet.backend` decides between the numba loop kernels and the pure
numpy fallbacks; both submodules stay importable so tests and the
benchmark can compare them directly.
"""

from ctrnet.backend import ACTIVE_BACKEND

if ACTIVE_BACKEND == "numba":
    from ctrnet.kernels import numba_impl as _impl
else:
    from ctrnet.kernels import numpy_impl as _impl

PROB_CLAMP = _impl.PROB_CLAMP

sigmoid = _impl.sigmoid
fm_score = _impl.fm_score
fm_step = _impl.fm_step
lr_score = _impl.lr_score
lr_step = _impl.lr_step
dense_forward = _impl.dense_forward
dense_backward = _impl.dense_backward
activation_grad = _impl.activation_grad
sgd_update = _impl.sgd_update
embed_gather = _impl.embed_gather
embed_scatter_update = _impl.embed_scatter_update
colsum_sigmoid = _impl.colsum_sigmoid
colsum_scatter_update = _impl.colsum_scatter_update
rbm_cd1_cols = _impl.rbm_cd1_cols
dae_step_cols = _impl.dae_step_cols

__all__ = [
    "ACTIVE_BACKEND",
    "PROB_CLAMP",
    "activation_grad",
    "colsum_scatter_update",
    "colsum_sigmoid",
    "dae_step_cols",
    "dense_backward",
    "dense_forward",
    "embed_gather",
    "embed_scatter_update",
    "fm_score",
    "fm_step",
    "lr_score",
    "lr_step",
    "rbm_cd1_cols",
    "sgd_update",
    "sigmoid",
]
