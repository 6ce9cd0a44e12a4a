"""Application configuration management."""
from typing import List
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables (prefix ``RINGKIT_``)."""

    model_config = SettingsConfigDict(
        env_prefix="RINGKIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Application settings
    APP_NAME: str = "ringkit"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Worker settings (fallback for --jobs)
    JOBS: int = 1

    # Ingest settings
    RATE_GATE_HZ: float = 95.0
    VALIDATION_TOLERANCE: float = 0.01  # fraction of samples per channel
    WINDOW_DURATION_S: float = 30.0
    RESAMPLE_RATE_HZ: float = 100.0
    LABEL_RATE_HZ: float = 1.0
    MIN_LABEL_COVERAGE: float = 0.5
    BP_BRACKET_TOLERANCE_S: float = 600.0

    # Learner settings
    RIDGE_LAMBDA_GRID: str = "0.01,0.1,1,10,100"
    DEFAULT_RIDGE_LAMBDA: float = 1.0

    @property
    def ridge_lambda_grid(self) -> List[float]:
        """Parse RIDGE_LAMBDA_GRID into a list."""
        return [float(value.strip()) for value in self.RIDGE_LAMBDA_GRID.split(",")]

    # Evaluation settings
    LOW_N_THRESHOLD: int = 10
    REPORT_FLOAT_FORMAT: str = "%.6f"


# Global settings instance
settings = Settings()
