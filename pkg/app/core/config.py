from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Loads all configuration settings from environment variables (.env file).

    The AR2 constants here are the defaults picked up by `AR2Config`; the
    tolerances are shared by the solver, the interpolant and the
    verification harness.
    """

    # --- AR2 algorithm constants (Step 0) ---
    ETA1: float = 0.1
    ETA2: float = 0.9
    GAMMA1: float = 0.5
    GAMMA2: float = 2.0
    GAMMA3: float = 4.0
    SIGMA_MIN: float = 1e-8
    SIGMA0: float = 2.0
    THETA: float = 0.01

    # Iteration cap: MAX_ITERS_FACTOR * k_eps when k_eps is known
    MAX_ITERS_FACTOR: int = 10
    MAX_ITERS_FALLBACK: int = 10_000_000

    # --- Numerical tolerances ---
    TIE_RTOL: float = 1e-12
    KEPS_GUARD: float = 1e-12
    CHECK_SLACK: float = 1e-12
    TRAJECTORY_TOL: float = 1e-8
    STATIONARITY_TOL: float = 1e-12
    KNOT_SNAP_RTOL: float = 1e-11

    # --- Output and runtime ---
    OUTPUT_DIR: str = "results"
    LOG_LEVEL: str = "INFO"

    # "local" runs samples in-process, "celery" dispatches them to workers
    SAMPLE_BACKEND: str = "local"

    # Redis URL for the Celery broker and result backend
    REDIS_URL: str = "redis://redis:6379/0"

    # Per-sample Celery limits in seconds; one certification at eps=0.05 takes well under a second
    SAMPLE_TASK_SOFT_TIME_LIMIT: int = 120
    SAMPLE_TASK_TIME_LIMIT: int = 150

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = Settings()
