"""CTR prediction over sparse multi-field categorical data.

Models: logistic regression, factorisation machines, FM-initialised deep
networks (FNN) and sampling-pretrained deep networks (SNN-RBM / SNN-DAE),
with shared SGD training, early stopping and AUC evaluation.
"""

from ctrnet.backend import ACTIVE_BACKEND
from ctrnet.schema import FieldSchema, SparseInstance, build_schema, encode_record, field_of
from ctrnet.data import Dataset, SampledView, load_csv, sample_negative_units, split
from ctrnet.metrics import auc, logloss
from ctrnet.train import TrainConfig, TrainReport, fit_with_early_stopping, train_model

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "Dataset",
    "FieldSchema",
    "SampledView",
    "SparseInstance",
    "TrainConfig",
    "TrainReport",
    "auc",
    "build_schema",
    "encode_record",
    "field_of",
    "fit_with_early_stopping",
    "load_csv",
    "logloss",
    "sample_negative_units",
    "split",
    "train_model",
]
