"""
Logging del simulador.

Todo cuelga del logger `simulador_prefetch`. Los archivos rotativos van a
DIRECTORIO_LOGS y la consola (rich) escribe en stderr, de modo que stdout
queda libre para los reportes JSON/CSV de `simprefetch`.
"""
import logging
import logging.handlers
import os
import sys
import time
from functools import wraps
from pathlib import Path
from typing import NamedTuple, Optional

import psutil
from rich.console import Console
from rich.logging import RichHandler

NOMBRE_RAIZ = "simulador_prefetch"

_FORMATO_FECHA = '%Y-%m-%d %H:%M:%S'
_MB = 1024 * 1024


class _ArchivoRotativo(NamedTuple):
    nombre: str
    nivel_minimo: int
    max_mb: int
    copias: int
    formato: str


_ARCHIVO_GENERAL = _ArchivoRotativo(
    "simulador_prefetch.log", logging.INFO, 10, 5,
    '%(asctime)s %(levelname)-8s [%(name)s] %(message)s',
)
_ARCHIVO_ERRORES = _ArchivoRotativo(
    "errores.log", logging.ERROR, 5, 10,
    '%(asctime)s %(levelname)-8s [%(name)s] %(module)s.%(funcName)s:%(lineno)d\n    %(message)s',
)
_ARCHIVO_DEBUG = _ArchivoRotativo(
    "debug.log", logging.DEBUG, 20, 3,
    '%(asctime)s %(levelname)-8s [%(name)s] %(funcName)s:%(lineno)d %(message)s',
)


def _handler_rotativo(directorio: Path, archivo: _ArchivoRotativo, nivel: int) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        directorio / archivo.nombre,
        maxBytes=archivo.max_mb * _MB,
        backupCount=archivo.copias,
        encoding='utf-8',
    )
    handler.setLevel(max(archivo.nivel_minimo, nivel))
    handler.setFormatter(logging.Formatter(archivo.formato, datefmt=_FORMATO_FECHA))
    return handler


class ConfiguradorLogging:
    """Singleton que instala los handlers del simulador una sola vez por proceso."""

    _instancia: Optional['ConfiguradorLogging'] = None
    _configurado: bool = False

    def __new__(cls) -> 'ConfiguradorLogging':
        if cls._instancia is None:
            cls._instancia = super().__new__(cls)
        return cls._instancia

    def __init__(self):
        if ConfiguradorLogging._configurado:
            return
        self._instalar_handlers()
        ConfiguradorLogging._configurado = True

    def _instalar_handlers(self):
        directorio = Path(os.getenv('DIRECTORIO_LOGS', 'logs'))
        directorio.mkdir(parents=True, exist_ok=True)
        nombre_nivel = os.getenv('NIVEL_LOGGING', 'INFO').upper()
        nivel = getattr(logging, nombre_nivel, logging.INFO)
        desarrollo = os.getenv('ENTORNO', 'desarrollo').lower() == 'desarrollo'

        raiz = logging.getLogger(NOMBRE_RAIZ)
        raiz.setLevel(nivel)
        raiz.propagate = False
        raiz.handlers.clear()

        archivos = [_ARCHIVO_GENERAL, _ARCHIVO_ERRORES] + ([_ARCHIVO_DEBUG] if desarrollo else [])
        for archivo in archivos:
            raiz.addHandler(_handler_rotativo(directorio, archivo, nivel))

        consola = RichHandler(
            console=Console(stderr=True),
            show_time=False,
            show_path=False,
            markup=False,
        )
        consola.setLevel(max(logging.WARNING, nivel))
        consola.setFormatter(logging.Formatter('%(name)s: %(message)s'))
        raiz.addHandler(consola)

        # numpy/pandas pueden traer numexpr
        logging.getLogger('numexpr').setLevel(logging.WARNING)

        raiz.debug(
            f"Logging listo: nivel={nombre_nivel}, directorio={directorio.resolve()}, "
            f"archivos={[a.nombre for a in archivos]}"
        )

    @staticmethod
    def obtener_logger(nombre: str) -> logging.Logger:
        """Logger hijo `simulador_prefetch.<nombre>`; configura el sistema si hace falta."""
        ConfiguradorLogging()
        return logging.getLogger(f"{NOMBRE_RAIZ}.{nombre}")


def registrar_operacion(operacion: str):
    """
    Decorador para operaciones de grano grueso (una simulación, un guardado
    en cache, una fábrica múltiple): registra inicio, fin con duración y, si
    falla, la excepción con traza antes de relanzarla.
    """
    def decorador(func):
        @wraps(func)
        def envoltura(*args, **kwargs):
            propietario = args[0] if args and not isinstance(args[0], type) and hasattr(args[0], '__dict__') else None
            nombre = type(propietario).__name__ if propietario is not None else func.__module__.rsplit('.', 1)[-1]
            logger = ConfiguradorLogging.obtener_logger(nombre)

            logger.info(f"Inicio: {operacion}")
            inicio = time.perf_counter()
            try:
                resultado = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"Fallo en {operacion}: {e}", exc_info=True)
                raise
            logger.info(f"Fin: {operacion} en {time.perf_counter() - inicio:.3f}s")
            return resultado

        return envoltura
    return decorador


class RegistradorEstadisticas:
    """Memoria del proceso y ritmo de simulación, con umbrales de alerta por entorno."""

    def __init__(self):
        self.logger = ConfiguradorLogging.obtener_logger("Estadisticas")
        self.limite_memoria_mb = float(os.getenv('MEMORIA_LIMITE_ALERTA', '500'))
        self.rendimiento_minimo = float(os.getenv('RENDIMIENTO_MINIMO_ACCESOS_S', '20000'))

    def registrar_uso_memoria(self, uso_mb: float):
        if uso_mb > self.limite_memoria_mb:
            self.logger.warning(f"Memoria residente alta: {uso_mb:.1f} MB (límite {self.limite_memoria_mb:.0f} MB)")
        else:
            self.logger.debug(f"Memoria residente: {uso_mb:.1f} MB")

    def registrar_uso_memoria_proceso(self) -> float:
        """Lee la RSS del proceso actual; 0.0 si psutil no puede consultarla."""
        try:
            uso_mb = psutil.Process().memory_info().rss / _MB
        except psutil.Error as e:
            self.logger.debug(f"psutil no disponible para este proceso: {e}")
            return 0.0
        self.registrar_uso_memoria(uso_mb)
        return uso_mb

    def registrar_rendimiento_simulacion(self, variante: str, accesos: int, duracion: float):
        ritmo = accesos / duracion if duracion > 0 else float('inf')
        if accesos and ritmo < self.rendimiento_minimo:
            self.logger.warning(f"[{variante}] simulación lenta: {accesos} accesos, {duracion:.3f}s, {ritmo:.0f} acc/s")
        else:
            self.logger.debug(f"[{variante}] {accesos} accesos en {duracion:.3f}s")

    def registrar_resumen_ejecucion(self, reporte):
        amat = 'n/d' if reporte.amat is None else f'{float(reporte.amat):.3f}'
        self.logger.info(
            f"[{reporte.variante}] disparos={reporte.disparos} "
            f"sugerencias={reporte.sugerencias_emitidas} aceptadas={reporte.sugerencias_aceptadas} "
            f"rellenos={reporte.rellenos_prebusqueda} amat={amat}"
        )


class ManejadorErrores:
    """Registro uniforme de errores de traza, configuración y validación."""

    def __init__(self, contexto: str):
        self.contexto = contexto
        self.logger = ConfiguradorLogging.obtener_logger("ManejadorErrores")

    def manejar_error_traza(self, error: Exception, ruta: Optional[str] = None):
        partes = [f"{self.contexto}: error de traza"]
        if ruta:
            partes.append(f"en {ruta}")
        linea = getattr(error, 'numero_linea', None)
        if linea is not None:
            partes.append(f"(línea {linea})")
        self.logger.error(f"{' '.join(partes)}: {error}")

    def manejar_error_configuracion(self, error: Exception):
        detalles = getattr(error, 'detalles', None) or []
        self.logger.error(f"{self.contexto}: configuración rechazada: {error}")
        for detalle in detalles:
            self.logger.debug(f"{self.contexto}:   {detalle}")

    def manejar_error_validacion(self, campo: str, valor, regla: str):
        self.logger.warning(f"{self.contexto}: {campo}={valor!r} no cumple '{regla}'")


def log_inicio_aplicacion(comando: str = ""):
    """Cabecera de una invocación de `simprefetch`."""
    logger = ConfiguradorLogging.obtener_logger("Sistema")
    logger.info(f"simprefetch {comando}".rstrip() + f" | pid {os.getpid()} | Python {sys.version.split()[0]}")
    logger.info(
        f"cwd={os.getcwd()} entorno={os.getenv('ENTORNO', 'desarrollo')} "
        f"cpus={psutil.cpu_count(logical=True)}"
    )


def log_fin_aplicacion():
    ConfiguradorLogging.obtener_logger("Sistema").info(f"simprefetch terminado | pid {os.getpid()}")
