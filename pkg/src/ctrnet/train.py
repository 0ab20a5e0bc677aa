"""Shared training orchestration: epoch loop, early stopping, rate and grid search."""

import copy
import csv
import dataclasses
import io
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ctrnet.errors import TrainingDiverged
from ctrnet.metrics import auc, logloss

MODEL_KINDS = ("lr", "fm", "fnn", "snn-rbm", "snn-dae")

# Paper-tuned defaults: dropout keep probability differs per architecture.
DEFAULT_KEEP_PROB = {"fnn": 0.8, "snn-rbm": 0.99, "snn-dae": 0.99}


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by every trainer; unused fields are ignored."""

    learning_rate: float = None  # None: pick from lr_grid on the validation set
    lr_grid: tuple = (1.0, 0.1, 0.01, 0.001, 0.0001)
    max_epochs: int = 30
    patience: int = 1
    keep_prob: float = None  # None: per-model default (DEFAULT_KEEP_PROB)
    l2_lambda: float = 0.0
    m: int = 2
    k: int = 10
    hidden_sizes: tuple = (200, 300, 100)
    activation: str = "tanh"
    pretrain_upper: bool = True
    upper_pretrain_epochs: int = 1
    upper_pretrain_lr: float = 0.05
    bottom_pretrain_epochs: int = 1
    bottom_pretrain_lr: float = 0.05
    dae_corruption: float = 0.3
    dropout_input: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lr_grid", tuple(self.lr_grid))
        object.__setattr__(self, "hidden_sizes", tuple(int(s) for s in self.hidden_sizes))

    def validate(self):
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not self.lr_grid or any(r <= 0 for r in self.lr_grid):
            raise ValueError("lr_grid must be non-empty and positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.keep_prob is not None and not 0.0 < self.keep_prob <= 1.0:
            raise ValueError("keep_prob must be in (0, 1]")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.hidden_sizes or any(s < 1 for s in self.hidden_sizes):
            raise ValueError("hidden sizes must be at least 1")
        if self.activation not in ("tanh", "sigmoid", "linear"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dae_corruption < 1.0:
            raise ValueError("dae_corruption must be in [0, 1)")

    def replace(self, **overrides):
        return dataclasses.replace(self, **overrides)

    def resolved_keep_prob(self, kind):
        if self.keep_prob is not None:
            return self.keep_prob
        return DEFAULT_KEEP_PROB.get(kind, 1.0)


# Per-epoch report columns, stable across versions. Wall time is kept off
# the serialized form so identical runs serialize byte-identically.
REPORT_CONFIG_FIELDS = (
    "seed", "learning_rate", "max_epochs", "patience", "keep_prob", "l2_lambda",
    "m", "k", "hidden_sizes", "activation", "pretrain_upper",
    "upper_pretrain_epochs", "upper_pretrain_lr", "bottom_pretrain_epochs",
    "bottom_pretrain_lr", "dae_corruption", "dropout_input",
)
REPORT_COLUMNS = ("kind",) + REPORT_CONFIG_FIELDS + (
    "epoch", "train_loss", "valid_loss", "valid_auc", "chosen",
)


def _csv_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "|".join(str(v) for v in value)
    return value


@dataclass
class TrainReport:
    """Per-epoch training trace plus the early-stopping choice."""

    kind: str
    config: TrainConfig
    train_losses: list = field(default_factory=list)
    valid_losses: list = field(default_factory=list)
    valid_aucs: list = field(default_factory=list)
    chosen_epoch: int = 0  # 1-based
    wall_time_s: float = 0.0

    @property
    def epochs_run(self):
        return len(self.valid_losses)

    @property
    def best_valid_loss(self):
        return self.valid_losses[self.chosen_epoch - 1]

    @property
    def best_valid_auc(self):
        return self.valid_aucs[self.chosen_epoch - 1]

    def to_csv_string(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        cfg = {name: _csv_value(getattr(self.config, name)) for name in REPORT_CONFIG_FIELDS}
        for e in range(self.epochs_run):
            row = [self.kind]
            row.extend(cfg[name] for name in REPORT_CONFIG_FIELDS)
            row.extend([
                e + 1,
                repr(self.train_losses[e]),
                repr(self.valid_losses[e]),
                repr(self.valid_aucs[e]),
                1 if e + 1 == self.chosen_epoch else 0,
            ])
            writer.writerow(row)
        return buf.getvalue()

    def save_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_string())


class SgdTrainer:
    """Per-model hooks driven by the shared epoch loop."""

    kind = "?"

    def init(self, train_ds, config, rng):
        raise NotImplementedError

    def epoch(self, model, dataset, order, config, rng):
        """One pass of per-instance SGD in the given order; returns mean loss."""
        raise NotImplementedError

    def predict(self, model, instance):
        raise NotImplementedError

    def predict_dataset(self, model, dataset):
        return np.array([self.predict(model, dataset.instance(i)) for i in range(len(dataset))])

    def snapshot(self, model):
        return copy.deepcopy(model)


def _valid_auc(scores, labels):
    try:
        return auc(scores, labels)
    except ValueError:  # single-class validation split
        return float("nan")


def _run_sgd(trainer, train_ds, valid_ds, config, rng):
    """Epoch loop with best-snapshot early stopping on validation loss.

    The non-improvement counter compares each epoch against the previous
    one (the paper-literal rule at patience=1: stop when validation error
    increases); the returned snapshot is always the epoch with the lowest
    recorded validation loss.
    """
    config.validate()
    if config.learning_rate is None:
        raise ValueError("learning_rate is unset; run select_learning_rate first")
    if len(train_ds) == 0:
        raise ValueError("training set is empty")
    if len(valid_ds) == 0:
        raise ValueError("validation set is empty")

    started = time.perf_counter()
    model = trainer.init(train_ds, config, rng)
    report = TrainReport(kind=trainer.kind, config=config)
    best = trainer.snapshot(model)
    best_loss = math.inf
    prev_loss = None
    bad_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_ds))
        train_loss = trainer.epoch(model, train_ds, order, config, rng)
        if not math.isfinite(train_loss):
            raise TrainingDiverged(f"{trainer.kind}: non-finite training loss at epoch {epoch}")
        scores = trainer.predict_dataset(model, valid_ds)
        if not np.all(np.isfinite(scores)):
            raise TrainingDiverged(f"{trainer.kind}: non-finite predictions at epoch {epoch}")
        valid_loss = logloss(valid_ds.labels, scores)

        report.train_losses.append(train_loss)
        report.valid_losses.append(valid_loss)
        report.valid_aucs.append(_valid_auc(scores, valid_ds.labels))

        if valid_loss < best_loss:
            best_loss = valid_loss
            best = trainer.snapshot(model)
            report.chosen_epoch = epoch
        if prev_loss is not None and valid_loss >= prev_loss:
            bad_epochs += 1
        else:
            bad_epochs = 0
        prev_loss = valid_loss
        if bad_epochs >= config.patience:
            break

    report.wall_time_s = time.perf_counter() - started
    return best, report


def fit_with_early_stopping(trainer, train_ds, valid_ds, config):
    """Train with early stopping; returns (best-validation model, report)."""
    rng = np.random.default_rng(config.seed)
    return _run_sgd(trainer, train_ds, valid_ds, config, rng)


def select_learning_rate(trainer, train_ds, valid_ds, config):
    """Train once per grid rate (shared seed) and keep the best validation AUC.

    Diverged rates are skipped; ties break toward the smaller rate.
    """
    if not config.lr_grid:
        raise ValueError("lr_grid is empty")
    best_rate = None
    best_auc = -math.inf
    any_finished = False
    for rate in config.lr_grid:
        trial = config.replace(learning_rate=float(rate))
        try:
            _, report = fit_with_early_stopping(trainer, train_ds, valid_ds, trial)
        except TrainingDiverged:
            continue
        any_finished = True
        score = report.best_valid_auc
        if math.isnan(score):
            continue
        if score > best_auc or (score == best_auc and rate < best_rate):
            best_auc = score
            best_rate = float(rate)
    if not any_finished:
        raise TrainingDiverged("every learning rate in the grid diverged")
    if best_rate is None:
        raise ValueError("no rate produced a measurable validation AUC")
    return best_rate


@dataclass
class GridResult:
    overrides: dict
    seed: int
    status: str  # "ok" or "diverged"
    valid_auc: float
    chosen_epoch: int


def grid_search(trainer, train_ds, valid_ds, config, grid):
    """Evaluate the Cartesian product of the grid; rank by validation AUC.

    grid maps TrainConfig field names to candidate value lists. Each cell
    derives its own seed from (config.seed, cell index) so cells are
    independent streams; diverged cells are kept, marked, and sorted last.
    """
    if not grid:
        raise ValueError("grid is empty")
    names = list(grid.keys())
    results = []
    for index, combo in enumerate(itertools.product(*(grid[n] for n in names))):
        overrides = dict(zip(names, combo))
        cell_seed = int(np.random.SeedSequence([config.seed, index]).generate_state(1)[0])
        cell_config = config.replace(seed=cell_seed, **overrides)
        try:
            _, report = fit_with_early_stopping(trainer, train_ds, valid_ds, cell_config)
            results.append(GridResult(
                overrides=overrides,
                seed=cell_seed,
                status="ok",
                valid_auc=report.best_valid_auc,
                chosen_epoch=report.chosen_epoch,
            ))
        except TrainingDiverged:
            results.append(GridResult(
                overrides=overrides,
                seed=cell_seed,
                status="diverged",
                valid_auc=float("nan"),
                chosen_epoch=0,
            ))
    results.sort(
        key=lambda r: (r.status != "ok", -(r.valid_auc if math.isfinite(r.valid_auc) else -math.inf))
    )
    return results


def grid_results_csv(results, grid_fields):
    """Render grid_search results as CSV with one column per varied field."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(grid_fields) + ["seed", "status", "chosen_epoch", "valid_auc"])
    for r in results:
        row = [_csv_value(r.overrides.get(name, "")) for name in grid_fields]
        row.extend([r.seed, r.status, r.chosen_epoch, repr(r.valid_auc)])
        writer.writerow(row)
    return buf.getvalue()


def layer_shapes(total_units):
    """Candidate 3-layer architectures at a fixed total hidden-unit budget.

    Constant, increasing (1:2:3), decreasing (3:2:1) and diamond (2:3:1),
    rounded to the nearest 10 units; at 600 the diamond is (200, 300, 100).
    """
    def scaled(ratios):
        total_ratio = sum(ratios)
        return tuple(max(10, round(total_units * r / total_ratio / 10) * 10) for r in ratios)

    return {
        "constant": scaled((1, 1, 1)),
        "increasing": scaled((1, 2, 3)),
        "decreasing": scaled((3, 2, 1)),
        "diamond": scaled((2, 3, 1)),
    }


def make_trainer(kind):
    """Trainer instance for a model kind; imports stay local to avoid cycles."""
    if kind == "lr":
        from ctrnet.baseline import LrTrainer
        return LrTrainer()
    if kind == "fm":
        from ctrnet.fm import FmTrainer
        return FmTrainer()
    if kind == "fnn":
        from ctrnet.fnn import FnnTrainer
        return FnnTrainer()
    if kind in ("snn-rbm", "snn-dae"):
        from ctrnet.snn import SnnTrainer
        return SnnTrainer(method=kind.split("-", 1)[1])
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def train_model(kind, train_ds, valid_ds, config):
    """End-to-end entry: optional rate selection, then the final fit.

    Returns (model, report); the report's config records the rate used.
    """
    trainer = make_trainer(kind)
    if config.learning_rate is None:
        rate = select_learning_rate(trainer, train_ds, valid_ds, config)
        config = config.replace(learning_rate=rate)
    return fit_with_early_stopping(trainer, train_ds, valid_ds, config)


def predict_fn(kind):
    """Single-instance inference function for a model kind."""
    return make_trainer(kind).predict
