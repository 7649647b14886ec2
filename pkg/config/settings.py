"""Configuration settings for the CB-cPIR laboratory."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory settings loaded from environment variables (prefix ``CBPIR_``)."""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="CBPIR_", case_sensitive=False)

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    environment: str = Field(default="development", description="Environment (development/production)")

    # Field limits
    max_field_bits: int = Field(default=4096, description="Largest supported log2(q^s)")
    max_attack_field_order: int = Field(
        default=2**16, description="The attack command refuses base fields of this order or larger"
    )

    # Sampling
    default_seed: int = Field(default=0, description="Seed used when --seed is not given")
    resample_limit: int = Field(default=1000, description="Maximum rejection-sampling attempts")

    # Cryptanalysis
    workers: int = Field(default=1, description="Worker threads for pair evaluations")
    whp_tolerance: float = Field(default=0.01, description="Allowed failure rate of the sampled rank-growth check")

    # Artifacts
    output_dir: str = Field(default="artifacts", description="Directory for CSV tables, curves and reports")
    curve_points: int = Field(default=100, description="Points on the log-spaced file-size grid")
    curve_min_bits: float = Field(default=6400.0, description="Smallest file size on the curve grid")
    curve_max_bits: float = Field(default=1e10, description="Largest file size on the curve grid")


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get laboratory settings."""
    return settings
