from typing import Literal, Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # App settings
    APP_NAME: str = "qclab"
    VERSION: str = "0.1.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Fock space limits
    MAX_FOCK_DIM: int = 4096
    TRUNCATION_THRESHOLD: float = 1e-6  # discarded probability allowed when truncating a state

    # Density operator validation
    HERMITIAN_TOL: float = 1e-12
    TRACE_TOL: float = 1e-10
    PSD_TOL: float = 1e-10

    # Check defaults (scenario values take precedence)
    DEFAULT_ANALYTIC_TOL: float = 1e-10
    DEFAULT_FD_ORDER_WINDOW: Tuple[float, float] = (1.8, 2.2)
    DEFAULT_SAMPLE_COUNT: int = 20
    DEFAULT_SEED: int = 0
    CONTINUITY_SIGN: Literal["auto", "printed", "flipped"] = "auto"

    # Execution
    MAX_WORKERS: int = 4
    REPORT_DIR: str = "./reports"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="QCLAB_",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
