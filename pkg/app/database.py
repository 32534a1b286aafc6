# =====================================================
# BASE DE DATOS - Registro de corridas (SQLAlchemy)
# =====================================================

from loguru import logger
from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from app.config import settings


def make_engine(database_url: str):
    """SQLite comparte conexion entre hilos; otros motores usan pool"""
    if database_url.startswith("sqlite"):
        return create_engine(database_url, connect_args={"check_same_thread": False})
    return create_engine(
        database_url,
        pool_pre_ping=True,  # Verificar conexion antes de usarla
        pool_size=10,
        max_overflow=20,
    )


engine = make_engine(settings.database_url)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def get_db():
    """Dependencia para obtener sesion de base de datos"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def init_db(bind=None):
    """Crear las tablas del registro si no existen"""
    from app import models  # noqa: F401

    try:
        Base.metadata.create_all(bind=bind or engine)
        logger.info("Registro de corridas inicializado")
    except Exception as e:
        logger.error(f"Error al inicializar la base de datos: {e}")
        raise
