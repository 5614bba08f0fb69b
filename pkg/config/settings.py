from dotenv import load_dotenv
load_dotenv()
import os


class Settings:
    """Application and numerical settings."""

    # API Settings
    API_TITLE: str = "Invariance Entropy Toolkit"
    API_VERSION: str = "1.0.0"
    API_DESCRIPTION: str = "Numerical estimators of invariance entropy for control-affine systems"

    # Database Settings
    DATABASE_URL: str = os.getenv("DATABASE_URL", "sqlite+aiosqlite:///./invariance.db")
    SYNC_DATABASE_URL: str = os.getenv("SYNC_DATABASE_URL", "sqlite:///./invariance.db")
    DATABASE_ECHO: bool = os.getenv("DATABASE_ECHO", "false").lower() == "true"

    # CORS Settings
    CORS_ORIGINS: list = ["*"]

    # Environment
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")
    DEBUG: bool = os.getenv("DEBUG", "true").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Background execution
    CELERY_BROKER_URL: str = os.getenv("CELERY_BROKER_URL", "redis://localhost:6379/0")
    CELERY_RESULT_BACKEND: str = os.getenv("CELERY_RESULT_BACKEND", "redis://localhost:6379/0")
    CELERY_TASK_ALWAYS_EAGER: bool = os.getenv("CELERY_TASK_ALWAYS_EAGER", "false").lower() == "true"
    RUN_EXECUTION_TIMEOUT: int = int(os.getenv("RUN_EXECUTION_TIMEOUT", "3600"))

    # Runs
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "out")
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "0"))
    DEFAULT_WORKERS: int = int(os.getenv("DEFAULT_WORKERS", "1"))

    # Integration
    DEFAULT_DELTA: float = float(os.getenv("DEFAULT_DELTA", "0.1"))
    H_INT_DIVISOR: int = int(os.getenv("H_INT_DIVISOR", "10"))
    BLOWUP_GUARD: float = float(os.getenv("BLOWUP_GUARD", "1e6"))
    CLOSURE_TOL: float = float(os.getenv("CLOSURE_TOL", "1e-8"))
    NEWTON_TOL: float = float(os.getenv("NEWTON_TOL", "1e-11"))
    NEWTON_MAX_ITER: int = int(os.getenv("NEWTON_MAX_ITER", "40"))

    # Controls
    DEFAULT_LEVELS: int = int(os.getenv("DEFAULT_LEVELS", "3"))
    INTERIOR_SHRINK: float = float(os.getenv("INTERIOR_SHRINK", "0.95"))

    # Cocycles
    COND_DIRECT_SVD: float = float(os.getenv("COND_DIRECT_SVD", "1e8"))
    TOL_RANK: float = float(os.getenv("TOL_RANK", "1e-8"))
    TOL_CLUSTER: float = float(os.getenv("TOL_CLUSTER", "1e-6"))

    # Splittings
    SPLITTING_HORIZON: float = float(os.getenv("SPLITTING_HORIZON", "10"))
    SPLITTING_MAX_HORIZON: float = float(os.getenv("SPLITTING_MAX_HORIZON", "200"))
    TOL_SPLIT: float = float(os.getenv("TOL_SPLIT", "1e-6"))
    MIN_EXPONENT_GAP: float = float(os.getenv("MIN_EXPONENT_GAP", "1e-2"))
    MIN_DICHOTOMY_RATE: float = float(os.getenv("MIN_DICHOTOMY_RATE", "1e-2"))

    # Entropy estimators
    ENTROPY_HORIZON: float = float(os.getenv("ENTROPY_HORIZON", "50"))
    TOL_SANDWICH: float = float(os.getenv("TOL_SANDWICH", "1e-3"))
    SPANNING_SLACK: float = float(os.getenv("SPANNING_SLACK", "0.2"))

    # Volume probe
    VOLUME_RATIO_THRESHOLD: float = float(os.getenv("VOLUME_RATIO_THRESHOLD", "10.0"))
    VOLUME_SLOPE_THRESHOLD: float = float(os.getenv("VOLUME_SLOPE_THRESHOLD", "0.25"))


settings = Settings()
