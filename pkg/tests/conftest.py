import pytest

from src.utils.cache_resultados import GestorCacheResultados


@pytest.fixture(autouse=True)
def limpiar_singleton_cache(monkeypatch):
    """Cada prueba arranca con el cache de resultados deshabilitado y sin instancia previa."""
    monkeypatch.setenv("CACHE_RESULTADOS_HABILITADO", "False")
    monkeypatch.setenv("RENDIMIENTO_MINIMO_ACCESOS_S", "0")
    GestorCacheResultados._instancia = None

    yield

    GestorCacheResultados._instancia = None
