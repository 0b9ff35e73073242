from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from isobn.errors import NetworkError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Complete binary data, one column per variable."""

    columns: tuple[str, ...]
    rows: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"rows must have shape (n, {len(self.columns)}), got {rows.shape}")
        bad = np.argwhere((rows != 0) & (rows != 1))
        if len(bad):
            r, c = bad[0]
            raise ValueError(f"non-binary cell {rows[r, c]!r} at row {r + 1}, column {self.columns[c]!r}")
        rows = rows.astype(np.uint8)
        rows.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.columns == other.columns and np.array_equal(self.rows, other.rows)

    __hash__ = None

    def __len__(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.columns.index(name)]
        except ValueError:
            raise NetworkError(f"dataset has no column {name!r}") from None

    def select(self, names: Sequence[str]) -> Dataset:
        idx = []
        for n in names:
            if n not in self.columns:
                raise NetworkError(f"dataset has no column {n!r}")
            idx.append(self.columns.index(n))
        return Dataset(tuple(names), self.rows[:, idx], dict(self.provenance))
