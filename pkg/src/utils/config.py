"""Configuration Management."""

from typing import List, Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    """Application configuration.

    Values come from (highest first) explicit keyword arguments, environment
    variables prefixed with ``WRONBETA_``, a local ``.env`` file, then the
    defaults below. CLI flags override whatever is resolved here.
    """

    model_config = SettingsConfigDict(
        env_prefix="WRONBETA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = Field(default="wronbeta", description="Application name")
    app_version: str = Field(default="0.1.0", description="Application version")
    debug: bool = Field(default=False, description="Debug mode")

    # Estimation settings
    epsilon: float = Field(default=1e-8, description="Independence threshold on |det| / scale")
    window: int = Field(default=500, description="Default sliding window (samples)")
    windows: List[int] = Field(
        default_factory=lambda: [100, 300, 500],
        description="Candidate windows for multi-window selection (samples)",
    )
    return_kind: Literal["simple", "log"] = Field(default="simple", description="Return definition")

    # Input / output settings
    column: str = Field(default="close", description="Default value column in input CSVs")
    significant_digits: int = Field(default=12, description="Significant digits in output CSVs")

    # Logging settings
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Log file path")

    @property
    def is_development(self) -> bool:
        """Check if running in development mode."""
        return self.debug

    def validate(self) -> bool:  # type: ignore[override]
        """Validate configuration."""
        if self.epsilon <= 0:
            raise ValueError("Independence threshold epsilon must be positive")

        if self.window < 2:
            raise ValueError("Window must cover at least 2 samples")

        if not self.windows or min(self.windows) < 2:
            raise ValueError("Every candidate window must cover at least 2 samples")

        if not 1 <= self.significant_digits <= 17:
            raise ValueError("Significant digits must lie in 1..17")

        return True


# Global configuration instance
config = Config()


def get_config() -> Config:
    """Get global configuration instance."""
    return config
