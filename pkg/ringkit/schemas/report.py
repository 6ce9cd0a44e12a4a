"""Pydantic schemas for run reports and manifests."""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator
from typing_extensions import Self

REPORT_COLUMNS = ["task", "method", "ring_type", "scenario", "n", "mae", "se_mae", "rmse", "mape", "pearson"]


class MetricReport(BaseModel):
    """Aggregate accuracy of one task/method over one stratum."""

    task: str
    method: str
    ring_type: str = "all"
    scenario: str = "all"
    n: int = Field(..., ge=1)
    mae: float = Field(..., ge=0)
    se_mae: float = Field(..., ge=0, description="Standard error of the absolute errors")
    rmse: float = Field(..., ge=0)
    mape: Optional[float] = Field(None, ge=0, description="Percent; None when every reference is zero")
    mape_excluded: int = Field(0, ge=0, description="Zero-reference pairs left out of MAPE")
    pearson: Optional[float] = Field(None, ge=-1, le=1)
    low_n: bool = False
    fold_std_mae: Optional[float] = None
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_ordering(self) -> Self:
        """Validate rmse >= mae up to rounding."""
        if self.rmse < self.mae * (1 - 1e-12) - 1e-12:
            raise ValueError(f"rmse {self.rmse} below mae {self.mae}")
        if self.pearson is None and self.n >= 2 and "degenerate_correlation" not in self.notes:
            raise ValueError("pearson may only be null for n < 2 or degenerate correlation")
        return self

    def row(self) -> Dict[str, object]:
        """CSV row in REPORT_COLUMNS order."""
        return {column: getattr(self, column) for column in REPORT_COLUMNS}


class ReportDocument(BaseModel):
    """Contents of report.json."""

    tool: str
    version: str
    config_hash: str
    reports: List[MetricReport]


class RunManifest(BaseModel):
    """Contents of manifest.json."""

    tool: str
    version: str
    config_hash: str
    seed: int
    task: str
    method: str
    folds: int
    counts: Dict[str, int]
    inapplicable: List[str] = Field(default_factory=list)
