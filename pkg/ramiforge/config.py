"""
Ramiforge - Configuration Management
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
from typing import Optional
import os


_PACKAGE_DATA = Path(__file__).resolve().parent / "data"


class Settings(BaseSettings):
    """Library and CLI settings loaded from environment variables."""

    # Reproducibility
    seed: int = 0

    # Logging
    log_level: str = "WARNING"

    # Group machinery limits
    group_order_limit: int = 10_000
    g_complete_order_limit: int = 360

    # Irreducibility sieve for user-supplied minimal polynomials
    irreducibility_primes: int = 25

    # Oracle capability
    oracle_max_degree: int = 8

    # Prime budgets and windows
    prime_budget: int = 200
    prime_window: int = 500
    frobenius_search_bound: int = 10_000
    recipe_samples: int = 25

    # Bundled cover files
    data_dir: str = str(_PACKAGE_DATA)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="RAMIFORGE_",
        extra="ignore",
    )

    def resolve_cover_path(self, name: str) -> Path:
        """Resolve a cover argument to a file, falling back to the bundled data directory."""
        path = Path(name)
        if path.exists():
            return path
        bundled = Path(self.data_dir) / name
        if bundled.exists():
            return bundled
        if not name.endswith(".cover"):
            bundled = Path(self.data_dir) / f"{name}.cover"
            if bundled.exists():
                return bundled
        return path

    @property
    def bundled_covers(self) -> list:
        """Names of the cover files shipped with the package."""
        if not os.path.isdir(self.data_dir):
            return []
        return sorted(p.name for p in Path(self.data_dir).glob("*.cover"))

    def effective_seed(self, seed: Optional[int]) -> int:
        """Explicit seed wins over RAMIFORGE_SEED."""
        return self.seed if seed is None else seed


# Global settings instance
settings = Settings()
