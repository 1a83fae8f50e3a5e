"""
Configuración de tests.

IMPORTANTE: COTEACH_DATABASE_URL se sobreescribe ANTES de importar cualquier módulo
del paquete, de modo que el engine de SQLAlchemy se crea apuntando a la BD de test.
"""
import os

import numpy as np
import pytest

# 1. Setear la BD de test ANTES de cualquier import del paquete
_TEST_DB_PATH = "./tests/test_coteach.db"
os.environ["COTEACH_DATABASE_URL"] = f"sqlite:///{_TEST_DB_PATH}"

# 2. Limpiar caché de settings para garantizar que lean el env var recién seteado
from coteach.config import get_settings  # noqa: E402
get_settings.cache_clear()

# 3. Ahora sí importar el resto
from coteach.database import Base, SessionLocal, engine, init_db  # noqa: E402  este import dispara la creación del engine


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False,
        help="Correr también los escenarios de aceptación largos (marcados slow)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="escenario largo: usar --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session", autouse=True)
def _clean_test_db_session():
    """Elimina la BD de test al inicio y al final de la sesión."""
    if os.path.exists(_TEST_DB_PATH):
        os.remove(_TEST_DB_PATH)
    yield
    if os.path.exists(_TEST_DB_PATH):
        os.remove(_TEST_DB_PATH)


@pytest.fixture(scope="function")
def db():
    """Sesión sobre una BD con todas las tablas recién creadas."""
    Base.metadata.drop_all(bind=engine)
    init_db()
    session = SessionLocal()
    try:
        yield session
    finally:
        session.close()


@pytest.fixture
def rng():
    """Generador con semilla fija: los tests son deterministas."""
    return np.random.default_rng(12345)
