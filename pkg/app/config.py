# =====================================================
# CONFIGURACION - Ajustes del proceso y logging
# =====================================================

import sys
from typing import List

from loguru import logger
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level:<8} | {name}:{function}:{line} - {message}"


class Settings(BaseSettings):
    """Configuracion del workbench desde variables de entorno"""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, extra="ignore")

    # Application
    app_env: str = "development"
    app_port: int = 3001
    app_host: str = "0.0.0.0"

    # CORS
    cors_origins: str = "http://localhost:3000,http://localhost:5173"

    # Logging
    log_level: str = "INFO"
    log_file: str = "logs/workbench.log"

    # Registro de corridas
    database_url: str = "sqlite:///./workbench.db"
    record_runs: bool = False

    # Simulacion
    output_dir: str = "results"
    sweep_cap: int = 2000
    workers: int = 1

    @property
    def cors_origins_list(self) -> List[str]:
        """Parsear CORS origins desde string"""
        return [origin.strip() for origin in self.cors_origins.split(",")]

    @property
    def is_sqlite(self) -> bool:
        return self.database_url.startswith("sqlite")


settings = Settings()


def configure_logging(level: str = None, log_file: str = None) -> None:
    """Configurar loguru: consola + archivo rotado"""
    logger.remove()
    logger.add(sys.stderr, level=level or settings.log_level, format=LOG_FORMAT)
    target = log_file if log_file is not None else settings.log_file
    if target:
        logger.add(
            target,
            rotation="10 MB",
            retention="7 days",
            level="DEBUG",
            format=LOG_FORMAT,
        )
