import hashlib
import json
import os
import threading
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.configuracion import ConfiguracionMotor
from src.modelos.reporte import ReporteEjecucion
from src.utils.sistema_logging import ConfiguradorLogging, registrar_operacion

TAMANO_BLOQUE_HASH = 1 << 20


def huella_archivo(ruta: Union[str, Path]) -> str:
    """sha256 del contenido de un archivo de traza, leído por bloques."""
    digest = hashlib.sha256()
    with open(ruta, "rb") as archivo:
        for bloque in iter(lambda: archivo.read(TAMANO_BLOQUE_HASH), b""):
            digest.update(bloque)
    return digest.hexdigest()


class GestorCacheResultados:
    """
    Cache de reportes de simulación indexado por (configuración, traza).

    Un reporte es función pura de la configuración y de los bytes de la
    traza, así que repetir una ejecución puede servirse desde aquí. Mantiene
    una copia en memoria y otra en disco como JSON.

    Implementa el patrón Singleton para mantener un cache único
    y consistente en toda la aplicación.
    """

    _instancia: Optional['GestorCacheResultados'] = None
    _lock = threading.Lock()

    def __new__(cls) -> 'GestorCacheResultados':
        if cls._instancia is None:
            with cls._lock:
                if cls._instancia is None:
                    cls._instancia = super(GestorCacheResultados, cls).__new__(cls)
                    cls._instancia._inicializado = False
        return cls._instancia

    def __init__(self):
        if not getattr(self, '_inicializado', False):
            self._inicializar_cache()
            self._inicializado = True

    def _inicializar_cache(self):
        """Inicializa el sistema de cache."""
        self.logger = ConfiguradorLogging.obtener_logger("GestorCacheResultados")

        self.cache_habilitado = os.getenv('CACHE_RESULTADOS_HABILITADO', 'False').lower() == 'true'
        self.duracion_cache_minutos = int(os.getenv('CACHE_RESULTADOS_DURACION_MINUTOS', '1440'))
        self.tamano_maximo_cache = int(os.getenv('CACHE_RESULTADOS_TAMANO_MAXIMO', '100'))
        self.directorio_cache = Path(os.getenv('CACHE_RESULTADOS_DIRECTORIO', 'cache'))
        if self.cache_habilitado:
            self.directorio_cache.mkdir(parents=True, exist_ok=True)

        self._cache_memoria: Dict[str, Tuple[Dict[str, Any], datetime]] = {}
        self.hits_cache = 0
        self.misses_cache = 0
        self.reportes_cacheados = 0

        self.logger.info(f"Cache de resultados inicializado - Habilitado: {self.cache_habilitado}")
        self.logger.debug(
            f"Configuración: duración={self.duracion_cache_minutos}min, tamaño_max={self.tamano_maximo_cache}"
        )

    def generar_clave(self, config: ConfiguracionMotor, huella_traza: str) -> str:
        """
        Genera la clave de cache para una configuración y una traza.

        Args:
            config (ConfiguracionMotor): Configuración del motor.
            huella_traza (str): sha256 de los bytes de la traza.

        Returns:
            str: Primeros 16 caracteres del sha256 combinado.
        """
        contenido = config.clave_canonica() + "|" + huella_traza
        return hashlib.sha256(contenido.encode('utf-8')).hexdigest()[:16]

    def _vigente(self, marca: datetime) -> bool:
        return datetime.now() - marca < timedelta(minutes=self.duracion_cache_minutos)

    def obtener(self, config: ConfiguracionMotor, huella_traza: str) -> Optional[ReporteEjecucion]:
        """Devuelve el reporte cacheado o None."""
        if not self.cache_habilitado:
            return None
        clave = self.generar_clave(config, huella_traza)

        with self._lock:
            if clave in self._cache_memoria:
                datos, marca = self._cache_memoria[clave]
                if self._vigente(marca):
                    self.hits_cache += 1
                    self.logger.debug(f"HIT de cache en memoria: {clave}")
                    return ReporteEjecucion.desde_dict(datos)
                del self._cache_memoria[clave]

        archivo = self.directorio_cache / f"{clave}.json"
        if archivo.exists():
            try:
                marca = datetime.fromtimestamp(archivo.stat().st_mtime)
                if self._vigente(marca):
                    datos = json.loads(archivo.read_text(encoding='utf-8'))
                    with self._lock:
                        self._cache_memoria[clave] = (datos, datetime.now())
                    self.hits_cache += 1
                    self.logger.debug(f"HIT de cache persistente: {clave}")
                    return ReporteEjecucion.desde_dict(datos)
                archivo.unlink(missing_ok=True)
            except (OSError, ValueError, TypeError) as e:
                self.logger.warning(f"Error leyendo cache persistente {clave}: {e}")
                archivo.unlink(missing_ok=True)

        self.misses_cache += 1
        return None

    @registrar_operacion("almacenamiento de reporte en cache")
    def guardar(self, config: ConfiguracionMotor, huella_traza: str, reporte: ReporteEjecucion):
        if not self.cache_habilitado:
            return
        clave = self.generar_clave(config, huella_traza)
        datos = reporte.a_dict()
        try:
            with self._lock:
                self._cache_memoria[clave] = (datos, datetime.now())
            (self.directorio_cache / f"{clave}.json").write_text(
                json.dumps(datos, sort_keys=True), encoding='utf-8'
            )
            self.reportes_cacheados += 1
            self.logger.debug(f"Reporte cacheado: {clave} ({reporte.variante})")
        except OSError as e:
            self.logger.warning(f"Error guardando en cache {clave}: {e}")

        if len(self._cache_memoria) > self.tamano_maximo_cache:
            self._limpiar_cache_exceso()

    def _limpiar_cache_exceso(self):
        """Elimina las entradas más antiguas cuando se supera el tamaño máximo."""
        with self._lock:
            exceso = len(self._cache_memoria) - self.tamano_maximo_cache
            if exceso <= 0:
                return
            ordenados = sorted(self._cache_memoria.items(), key=lambda item: item[1][1])
            for clave, _ in ordenados[:exceso]:
                del self._cache_memoria[clave]
                (self.directorio_cache / f"{clave}.json").unlink(missing_ok=True)
        self.logger.info(f"Cache limpiado por exceso: eliminadas {exceso} entradas más antiguas.")

    def obtener_estadisticas_cache(self) -> Dict[str, Any]:
        total = self.hits_cache + self.misses_cache
        ratio_hit = (self.hits_cache / total * 100) if total > 0 else 0
        archivos = len(list(self.directorio_cache.glob("*.json"))) if self.directorio_cache.exists() else 0
        return {
            'cache_habilitado': self.cache_habilitado,
            'hits_cache': self.hits_cache,
            'misses_cache': self.misses_cache,
            'ratio_hit_porcentaje': round(ratio_hit, 2),
            'reportes_cacheados': self.reportes_cacheados,
            'entradas_en_memoria': len(self._cache_memoria),
            'archivos_en_disco': archivos,
            'configuracion': {
                'duracion_minutos': self.duracion_cache_minutos,
                'tamano_maximo_entradas_memoria': self.tamano_maximo_cache,
                'directorio_cache_disco': str(self.directorio_cache.resolve()),
            },
        }

    def invalidar_cache(self):
        """Vacía el cache en memoria y en disco."""
        with self._lock:
            self._cache_memoria.clear()
        if self.directorio_cache.exists():
            for archivo in self.directorio_cache.glob("*.json"):
                archivo.unlink(missing_ok=True)
        self.logger.info("Cache de resultados invalidado completamente")
