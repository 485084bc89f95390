from typing import List, Optional

from src.configuracion import GEOMETRIA_L3_DEFECTO, ConfigJerarquia
from src.jerarquia_cache import JerarquiaCache
from src.modelos.geometria_cache import GeometriaCache
from src.utils.sistema_logging import ConfiguradorLogging


class ConstructorJerarquia:
    """
    Patrón Constructor para armar jerarquías de cache de forma fluida.
    Resuelve el problema de crear jerarquías de varios niveles de manera legible.
    """

    def __init__(self):
        self.reiniciar()
        self.logger = ConfiguradorLogging.obtener_logger("ConstructorJerarquia")

    def reiniciar(self):
        """Reinicia el constructor para armar una nueva jerarquía."""
        self._geometrias: List[GeometriaCache] = []
        self._latencia_memoria = 200
        self._registrar_latencias = False
        self._registrar_eventos = False
        return self

    def nivel(self, nombre, tamano_bytes, asociatividad, latencia, bytes_linea=64):
        self._geometrias.append(
            GeometriaCache(
                nombre=nombre,
                tamano_bytes=tamano_bytes,
                bytes_linea=bytes_linea,
                asociatividad=asociatividad,
                latencia_acierto_ciclos=latencia,
            )
        )
        return self

    def geometria(self, geometria: GeometriaCache):
        self._geometrias.append(geometria)
        return self

    def l1(self, tamano_bytes=32 * 1024, asociatividad=8, latencia=4, bytes_linea=64):
        return self.nivel("L1D", tamano_bytes, asociatividad, latencia, bytes_linea)

    def l2(self, tamano_bytes=256 * 1024, asociatividad=8, latencia=6, bytes_linea=64):
        return self.nivel("L2", tamano_bytes, asociatividad, latencia, bytes_linea)

    def l3(self, geometria: Optional[GeometriaCache] = None):
        return self.geometria(geometria or GEOMETRIA_L3_DEFECTO)

    def latencia_memoria(self, ciclos):
        self._latencia_memoria = ciclos
        return self

    def con_registro_latencias(self, activo=True):
        self._registrar_latencias = activo
        return self

    def con_registro_eventos(self, activo=True):
        self._registrar_eventos = activo
        return self

    def construir(self) -> JerarquiaCache:
        if not self._geometrias:
            raise ValueError("Se necesita al menos un nivel para construir la jerarquía.")
        if len({g.bytes_linea for g in self._geometrias}) != 1:
            raise ValueError("Todos los niveles deben compartir el tamaño de línea.")
        if self._latencia_memoria <= 0:
            raise ValueError("La latencia de memoria debe ser positiva.")

        jerarquia = JerarquiaCache(
            list(self._geometrias),
            latencia_memoria=self._latencia_memoria,
            registrar_latencias=self._registrar_latencias,
            registrar_eventos=self._registrar_eventos,
        )
        self.logger.debug(
            f"Jerarquía construida: {' -> '.join(g.nombre for g in self._geometrias)} -> memoria "
            f"({self._latencia_memoria} ciclos)"
        )
        return jerarquia

    @classmethod
    def desde_configuracion(
        cls, config: ConfigJerarquia, registrar_latencias: bool = False, registrar_eventos: bool = False
    ) -> JerarquiaCache:
        constructor = cls()
        for geometria in config.niveles:
            constructor.geometria(geometria)
        return (
            constructor.latencia_memoria(config.latencia_memoria_ciclos)
            .con_registro_latencias(registrar_latencias)
            .con_registro_eventos(registrar_eventos)
            .construir()
        )


if __name__ == "__main__":
    jerarquia = ConstructorJerarquia().l1().l2().l3().latencia_memoria(200).construir()
    for nivel in jerarquia.niveles:
        print(nivel)
