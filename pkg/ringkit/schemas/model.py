"""Pydantic schema for serialized ridge models."""
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from typing_extensions import Self

from ringkit.models.vital import VitalKind
from ringkit.utils.hashing import sha256_names


class LinearModel(BaseModel):
    """Ridge regression model in standardized feature space."""

    target: VitalKind
    feature_names: List[str] = Field(..., min_length=1)
    schema_hash: str
    weights: List[float]
    intercept: float
    feature_mean: List[float]
    feature_scale: List[float]
    ridge_lambda: float = Field(..., ge=0)
    n_train: int = Field(..., ge=1)
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_shapes(self) -> Self:
        """Validate vector lengths and schema hash."""
        p = len(self.feature_names)
        for name in ("weights", "feature_mean", "feature_scale"):
            if len(getattr(self, name)) != p:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries for {p} features")
        if any(scale <= 0 for scale in self.feature_scale):
            raise ValueError("feature_scale entries must be positive")
        if self.schema_hash != sha256_names(self.feature_names):
            raise ValueError("schema_hash does not match feature_names")
        return self

    def coefficients(self) -> Tuple[np.ndarray, float]:
        """Weights and intercept in raw feature units."""
        weights = np.asarray(self.weights) / np.asarray(self.feature_scale)
        intercept = self.intercept - float(np.dot(weights, np.asarray(self.feature_mean)))
        return weights, intercept

    def predict_array(self, values: np.ndarray) -> float:
        """Predict from raw feature values ordered as feature_names."""
        standardized = (np.asarray(values, dtype=np.float64) - np.asarray(self.feature_mean)) / np.asarray(
            self.feature_scale
        )
        return float(np.dot(standardized, np.asarray(self.weights)) + self.intercept)

    model_config = {"frozen": True, "extra": "forbid"}
