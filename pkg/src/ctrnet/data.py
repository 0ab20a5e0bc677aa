"""Dataset loading, splitting and field-wise negative-unit sampling.

Instances are stored columnar (one int64 matrix of active indices, one
label vector) so the training loops can hand rows straight to the
kernels without per-instance object churn.
"""

import csv
from dataclasses import dataclass

import numpy as np

from ctrnet.errors import DataFormatError
from ctrnet.schema import SparseInstance, build_schema, encode_record


@dataclass
class Dataset:
    """Encoded instances bound to the schema they validate against."""

    schema: object
    actives: np.ndarray  # (num_instances, field_count) int64
    labels: np.ndarray   # (num_instances,) int64
    has_labels: bool = True

    def __len__(self):
        return self.actives.shape[0]

    def instance(self, i):
        return SparseInstance(active=self.actives[i], label=int(self.labels[i]))

    def instances(self):
        for i in range(len(self)):
            yield self.instance(i)

    def base_rate(self):
        if len(self) == 0:
            return 0.0
        return float(self.labels.mean())

    def validate(self):
        s = self.schema
        if self.actives.shape[1] != s.field_count:
            raise ValueError("instance width does not match schema field count")
        if np.any(self.actives < s.starts) or np.any(self.actives > s.ends):
            raise ValueError("active index outside its field range")
        if self.has_labels and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be binary")


@dataclass
class SampledView:
    """Per-field positive unit plus sampled negatives for one instance.

    `indices` holds global feature indices grouped by field, the active
    unit first; `values` is 1.0 for the active unit and 0.0 for the
    negatives; `field_offsets[i]:field_offsets[i+1]` slices out field i.
    """

    indices: np.ndarray
    values: np.ndarray
    field_offsets: np.ndarray

    def field_units(self, i):
        lo, hi = self.field_offsets[i], self.field_offsets[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]


def load_csv(path, label_column=None, schema=None):
    """Load a header-first CSV of categorical fields into a Dataset.

    Without a schema, one is built from the observed values; with one,
    unseen values fall into the OOV slots. A None label_column yields an
    unlabeled dataset (all labels zero) for prediction-only use.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        rows = [row for row in reader if row]

    if label_column is not None and label_column not in header:
        raise DataFormatError(f"{path}: label column {label_column!r} not in header")

    if schema is None:
        field_names = [h for h in header if h != label_column]
        if not field_names:
            raise DataFormatError(f"{path}: no feature columns")
        col = {h: i for i, h in enumerate(header)}
        observed = {name: set() for name in field_names}
        for row in rows:
            for name in field_names:
                observed[name].add(row[col[name]])
        schema = build_schema((name, observed[name]) for name in field_names)

    col = {h: i for i, h in enumerate(header)}
    num = len(rows)
    actives = np.empty((num, schema.field_count), dtype=np.int64)
    labels = np.zeros(num, dtype=np.int64)
    has_labels = label_column is not None
    label_idx = col[label_column] if has_labels else -1

    for r, row in enumerate(rows):
        raw = {name: row[col[name]] for name in schema.names if name in col}
        if has_labels:
            text = row[label_idx].strip()
            if text not in ("0", "1"):
                raise DataFormatError(
                    f"{path}: row {r + 2}: label must be 0 or 1, got {text!r}"
                )
            label = int(text)
        else:
            label = 0
        inst = encode_record(schema, raw, label)
        actives[r] = inst.active
        labels[r] = inst.label

    ds = Dataset(schema=schema, actives=actives, labels=labels, has_labels=has_labels)
    ds.validate()
    return ds


def split(dataset, fractions, seed):
    """Shuffle once, then slice into train/validation/test partitions.

    Sizes follow largest-remainder rounding so they always sum to the
    dataset size; the same seed reproduces the same partition.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3:
        raise DataFormatError("expected three fractions (train, validation, test)")
    if any(f < 0 for f in fractions):
        raise DataFormatError("fractions must be non-negative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataFormatError(f"fractions must sum to 1, got {sum(fractions)}")

    num = len(dataset)
    quotas = [f * num for f in fractions]
    sizes = [int(np.floor(q)) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    for _ in range(num - sum(sizes)):
        i = int(np.argmax(remainders))
        sizes[i] += 1
        remainders[i] = -1.0

    rng = np.random.default_rng(seed)
    order = rng.permutation(num)
    parts = []
    at = 0
    for size in sizes:
        part = order[at:at + size]
        parts.append(
            Dataset(
                schema=dataset.schema,
                actives=dataset.actives[part].copy(),
                labels=dataset.labels[part].copy(),
                has_labels=dataset.has_labels,
            )
        )
        at += size
    return tuple(parts)


def sample_negative_units(instance, schema, m, rng):
    """Sample up to m negative units per field, uniformly, never the active one.

    Fields too small to provide m distinct negatives contribute all of
    their non-active units instead.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    indices = []
    values = []
    offsets = [0]
    for i in range(schema.field_count):
        start = int(schema.starts[i])
        card = schema.cardinalities[i]
        active = int(instance.active[i])
        active_local = active - start
        indices.append(active)
        values.append(1.0)
        if card - 1 <= m:
            negatives_local = [j for j in range(card) if j != active_local]
        else:
            draw = rng.choice(card - 1, size=m, replace=False)
            negatives_local = [int(j) + (j >= active_local) for j in draw]
        for j in negatives_local:
            indices.append(start + j)
            values.append(0.0)
        offsets.append(len(indices))
    return SampledView(
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        field_offsets=np.asarray(offsets, dtype=np.int64),
    )
