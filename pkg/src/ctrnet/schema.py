"""Multi-field categorical feature space and its one-hot layout.

Each field owns a contiguous block of global feature indices, one index
per known value plus a reserved out-of-vocabulary slot at the end of the
block. A record activates exactly one index per field.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class FieldSchema:
    """Immutable layout of the field-wise one-hot feature space.

    `vocabs[i]` lists the known values of field i in index order; the
    field's cardinality is one larger to leave room for the OOV slot,
    which sits at the last local index.
    """

    names: tuple
    vocabs: tuple

    def __post_init__(self):
        if len(self.names) == 0:
            raise ValueError("schema needs at least one field")
        if len(self.names) != len(set(self.names)):
            raise ValueError("duplicate field name")
        if len(self.names) != len(self.vocabs):
            raise ValueError("names and vocabs must align")

    @cached_property
    def cardinalities(self):
        return tuple(len(v) + 1 for v in self.vocabs)

    @cached_property
    def starts(self):
        ends = np.cumsum(self.cardinalities)
        return np.concatenate(([0], ends[:-1])).astype(np.int64)

    @cached_property
    def ends(self):
        return (np.cumsum(self.cardinalities) - 1).astype(np.int64)

    @property
    def field_count(self):
        return len(self.names)

    @property
    def total_features(self):
        return int(self.ends[-1]) + 1

    @cached_property
    def _value_maps(self):
        return tuple({v: j for j, v in enumerate(vocab)} for vocab in self.vocabs)

    def oov_index(self, i):
        """Global index of field i's out-of-vocabulary slot."""
        return int(self.ends[i])

    def global_index(self, i, value):
        """Global index for a raw value of field i; unknowns map to OOV."""
        local = self._value_maps[i].get(value)
        if local is None:
            return self.oov_index(i)
        return int(self.starts[i]) + local


@dataclass(frozen=True)
class SparseInstance:
    """One active global feature index per field plus a binary label."""

    active: np.ndarray
    label: int

    def validate(self, schema):
        if self.active.shape != (schema.field_count,):
            raise ValueError("instance has wrong field count")
        if np.any(self.active < schema.starts) or np.any(self.active > schema.ends):
            raise ValueError("active index outside its field range")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


def build_schema(field_specs):
    """Build a FieldSchema from (name, observed values) pairs.

    Values are sorted so the global index layout depends only on the
    value sets, keeping serialized models portable across runs.
    """
    specs = list(field_specs)
    if not specs:
        raise ValueError("schema needs at least one field")
    names = tuple(name for name, _ in specs)
    vocabs = tuple(tuple(sorted(set(values))) for _, values in specs)
    return FieldSchema(names=names, vocabs=vocabs)


def encode_record(schema, raw, label):
    """Encode a raw field->value mapping into a SparseInstance.

    Unknown values, and fields missing from the record entirely, fall
    into the field's OOV slot; ad logs are dirty and should not abort a
    run. A label outside {0, 1} is a hard error.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    missing = object()
    active = np.empty(schema.field_count, dtype=np.int64)
    for i, name in enumerate(schema.names):
        value = raw.get(name, missing)
        if value is missing:
            active[i] = schema.oov_index(i)
        else:
            active[i] = schema.global_index(i, value)
    return SparseInstance(active=active, label=int(label))


def field_of(schema, global_index):
    """Ordinal of the field whose index block contains global_index."""
    if not 0 <= global_index < schema.total_features:
        raise IndexError(f"feature index {global_index} outside [0, {schema.total_features})")
    return int(np.searchsorted(schema.ends, global_index))
