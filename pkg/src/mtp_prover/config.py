"""Configuration management for the prover."""

from typing import List, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Prover settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="MTP_PROVER_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Exact sign decisions
    initial_digits: int = Field(20, ge=1)
    max_digits: int = Field(10000, ge=1)

    # Numeric evaluation
    numeric_dps: int = Field(40, ge=15)
    limit_dps: int = Field(60, ge=15)
    falsify_samples: int = Field(200, ge=1)
    random_seed: int = 1729

    # Automatic search
    auto_max_split_depth: int = Field(6, ge=0)
    auto_max_bound_degree: int = Field(23, ge=1)
    auto_max_escalations: int = Field(20, ge=0)
    auto_max_attempts: int = Field(400, ge=1)
    auto_max_nesting: int = Field(2, ge=0)
    auto_check_points: int = Field(48, ge=4)

    # CLI
    workers: int = Field(4, ge=1)
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, value: str) -> str:
        """Accept standard logging level names only."""
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {value}")
        return value

    def refinement_schedule(self, cap: Optional[int] = None) -> List[int]:
        """Precisions tried by sign decisions: doubling up to the cap."""
        cap = cap if cap is not None else self.max_digits
        schedule = []
        digits = min(self.initial_digits, cap)
        while digits < cap:
            schedule.append(digits)
            digits *= 2
        schedule.append(cap)
        return schedule


# Global settings instance
settings = Settings()
