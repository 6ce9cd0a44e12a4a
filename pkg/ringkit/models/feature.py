"""Feature vector model."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ringkit.utils.hashing import sha256_names


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Fixed-length feature values with the ordered names that define the schema."""

    values: np.ndarray
    names: Tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        names = tuple(self.names)
        if values.ndim != 1 or len(values) != len(names):
            raise ValueError(f"{len(values)} feature values for a schema of {len(names)} names")
        if not np.all(np.isfinite(values)):
            bad = [names[i] for i in np.flatnonzero(~np.isfinite(values))]
            raise ValueError(f"non-finite features: {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def schema_hash(self) -> str:
        """Hash of the ordered feature names."""
        return sha256_names(self.names)

    def __len__(self) -> int:
        return len(self.names)
