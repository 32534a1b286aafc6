"""
Entorno de Alembic para el registro de corridas.

La base sale de DATABASE_URL; `alembic -x database_url=... upgrade head`
apunta la migracion a otra base sin tocar el entorno. Solo se migran las
tablas del registro (run_reports), asi la base puede ser compartida.
"""
import sys
from logging.config import fileConfig
from pathlib import Path

from alembic import context
from loguru import logger
from sqlalchemy import create_engine, pool
from sqlalchemy.engine import make_url

sys.path.insert(0, str(Path(__file__).parent.parent))

from app.config import settings  # noqa: E402
from app.database import Base  # noqa: E402
from app import models  # noqa: E402,F401

config = context.config

if config.config_file_name is not None:
    fileConfig(config.config_file_name)

target_metadata = Base.metadata


def registry_url() -> str:
    """-x database_url=... tiene prioridad sobre los ajustes"""
    return context.get_x_argument(as_dictionary=True).get("database_url") or settings.database_url


def include_registry_objects(obj, name, type_, reflected, compare_to) -> bool:
    # Tablas ajenas al registro quedan fuera del autogenerate
    if type_ == "table":
        return name in target_metadata.tables
    return True


def _configure(url: str, **options) -> None:
    context.configure(
        target_metadata=target_metadata,
        include_object=include_registry_objects,
        render_as_batch=make_url(url).get_backend_name() == "sqlite",
        compare_type=True,
        **options,
    )


def run_migrations_offline() -> None:
    url = registry_url()
    _configure(url, url=url, literal_binds=True, dialect_opts={"paramstyle": "named"})
    with context.begin_transaction():
        context.run_migrations()


def run_migrations_online() -> None:
    url = registry_url()
    connectable = create_engine(url, poolclass=pool.NullPool)
    with connectable.connect() as connection:
        _configure(url, connection=connection)
        with context.begin_transaction():
            context.run_migrations()


logger.info(f"Migrando registro de corridas en {make_url(registry_url()).render_as_string(hide_password=True)}")

if context.is_offline_mode():
    run_migrations_offline()
else:
    run_migrations_online()
