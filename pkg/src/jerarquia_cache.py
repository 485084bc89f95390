"""
Caches asociativas por conjuntos con reemplazo LRU, encadenadas en una
jerarquía con memoria principal al final.

Política: write-allocate y write-back. Las escrituras de retorno se cuentan
pero no se propagan ni suman latencia. Los rellenos por prebúsqueda se
insertan como MRU sólo en el nivel que los pide.
"""
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.excepciones import SinAccesos
from src.modelos.acceso_memoria import DireccionBloque, TipoAcceso
from src.modelos.geometria_cache import EstadoLinea, Expulsion, GeometriaCache, ResultadoAcceso
from src.modelos.reporte import EstadisticasNivel
from src.utils.sistema_logging import ConfiguradorLogging

EventoLinea = Tuple[str, DireccionBloque]


class NivelCache:
    """
    Un nivel de cache. Cada conjunto es un diccionario etiqueta → línea con
    como mucho `asociatividad` entradas; la víctima es la de menor sello LRU.
    """

    def __init__(
        self,
        geometria: GeometriaCache,
        indice: int = 0,
        siguiente: Optional["NivelCache"] = None,
        latencia_memoria: int = 200,
        registrar_eventos: bool = False,
    ):
        self.geometria = geometria
        self.indice = indice
        self.siguiente = siguiente
        self.latencia_memoria = latencia_memoria
        self._num_conjuntos = geometria.numero_conjuntos
        self._conjuntos: List[Dict[int, EstadoLinea]] = [{} for _ in range(self._num_conjuntos)]
        self._reloj = 0
        self._censo_cerrado = False
        self.estadisticas = EstadisticasNivel(nombre=geometria.nombre)
        self.eventos: Optional[List[EventoLinea]] = [] if registrar_eventos else None
        self.logger = ConfiguradorLogging.obtener_logger("NivelCache")
        self.logger.debug(
            f"Nivel {geometria.nombre}: {geometria.tamano_bytes} B, {self._num_conjuntos} conjuntos "
            f"x {geometria.asociatividad} vías, latencia {geometria.latencia_acierto_ciclos}"
        )

    # --- Propiedades ---
    @property
    def nombre(self) -> str:
        return self.geometria.nombre

    @property
    def numero_conjuntos(self) -> int:
        return self._num_conjuntos

    def _ubicar(self, bloque: DireccionBloque) -> Tuple[Dict[int, EstadoLinea], int]:
        return self._conjuntos[bloque % self._num_conjuntos], bloque // self._num_conjuntos

    def _registrar(self, evento: str, bloque: DireccionBloque):
        if self.eventos is not None:
            self.eventos.append((evento, bloque))

    def contiene(self, bloque: DireccionBloque) -> bool:
        conjunto, etiqueta = self._ubicar(bloque)
        return etiqueta in conjunto

    def linea(self, bloque: DireccionBloque) -> Optional[EstadoLinea]:
        conjunto, etiqueta = self._ubicar(bloque)
        return conjunto.get(etiqueta)

    def lineas_del_conjunto(self, indice_conjunto: int) -> List[EstadoLinea]:
        return list(self._conjuntos[indice_conjunto].values())

    # --- Operaciones ---
    def acceder(self, bloque: DireccionBloque, tipo: TipoAcceso = TipoAcceso.LECTURA, demanda: bool = True) -> ResultadoAcceso:
        """
        Accede a un bloque.

        Args:
            bloque: Dirección de bloque.
            tipo: Lectura o escritura.
            demanda: False para un relleno por prebúsqueda.

        Returns:
            ResultadoAcceso con la latencia acumulada hasta el nivel que atendió.
        """
        if not demanda:
            return self.rellenar_prebusqueda(bloque)

        self._reloj += 1
        stats = self.estadisticas
        stats.accesos_demanda += 1
        latencia = self.geometria.latencia_acierto_ciclos
        conjunto, etiqueta = self._ubicar(bloque)
        linea = conjunto.get(etiqueta)

        if linea is not None:
            stats.aciertos_demanda += 1
            linea.sello_lru = self._reloj
            if tipo is TipoAcceso.ESCRITURA:
                linea.sucia = True
            if linea.prebuscada and not linea.usada_desde_relleno:
                stats.prebusquedas_utiles += 1
                self._registrar("uso", bloque)
            linea.usada_desde_relleno = True
            return ResultadoAcceso(True, None, latencia, self.indice)

        stats.fallos_demanda += 1
        if self.siguiente is not None:
            inferior = self.siguiente.acceder(bloque, TipoAcceso.LECTURA, demanda=True)
            latencia += inferior.latencia_ciclos
            servidor = inferior.nivel_servidor
        else:
            latencia += self.latencia_memoria
            servidor = self.indice + 1

        expulsado = self._insertar(
            conjunto, etiqueta, bloque,
            EstadoLinea(
                etiqueta=etiqueta, valida=True, sucia=tipo is TipoAcceso.ESCRITURA,
                prebuscada=False, usada_desde_relleno=True, sello_lru=self._reloj,
            ),
        )
        return ResultadoAcceso(False, expulsado, latencia, servidor)

    def rellenar_prebusqueda(self, bloque: DireccionBloque) -> ResultadoAcceso:
        """Inserta un bloque prebuscado como MRU; no toca niveles inferiores ni contadores de demanda."""
        latencia = self.geometria.latencia_acierto_ciclos
        conjunto, etiqueta = self._ubicar(bloque)
        if etiqueta in conjunto:
            return ResultadoAcceso(True, None, latencia, self.indice)
        self._reloj += 1
        self.estadisticas.rellenos_prebusqueda += 1
        self._registrar("relleno", bloque)
        expulsado = self._insertar(
            conjunto, etiqueta, bloque,
            EstadoLinea(
                etiqueta=etiqueta, valida=True, sucia=False,
                prebuscada=True, usada_desde_relleno=False, sello_lru=self._reloj,
            ),
        )
        return ResultadoAcceso(False, expulsado, latencia, self.indice)

    def _insertar(
        self, conjunto: Dict[int, EstadoLinea], etiqueta: int, bloque: DireccionBloque, nueva: EstadoLinea
    ) -> Optional[Expulsion]:
        expulsado = None
        if len(conjunto) >= self.geometria.asociatividad:
            etiqueta_victima = min(conjunto, key=lambda e: conjunto[e].sello_lru)
            victima = conjunto.pop(etiqueta_victima)
            bloque_victima = etiqueta_victima * self._num_conjuntos + bloque % self._num_conjuntos
            stats = self.estadisticas
            stats.expulsiones += 1
            if victima.sucia:
                stats.escrituras_retorno += 1
            if victima.prebuscada and not victima.usada_desde_relleno:
                stats.prebusquedas_inutiles += 1
                self._registrar("expulsion_sin_uso", bloque_victima)
            expulsado = Expulsion(
                bloque=bloque_victima,
                era_prebuscada=victima.prebuscada,
                fue_usada=victima.usada_desde_relleno,
                sucia=victima.sucia,
            )
        conjunto[etiqueta] = nueva
        return expulsado

    def _bloques_prebuscados_sin_uso(self) -> Iterator[DireccionBloque]:
        for indice_conjunto, conjunto in enumerate(self._conjuntos):
            for etiqueta, linea in conjunto.items():
                if linea.prebuscada and not linea.usada_desde_relleno:
                    yield etiqueta * self._num_conjuntos + indice_conjunto

    def censo_prebusquedas_sin_uso(self) -> int:
        """Cuenta las líneas prebuscadas residentes que nunca se usaron."""
        return sum(1 for _ in self._bloques_prebuscados_sin_uso())

    def cerrar_censo(self) -> int:
        """Al final de la traza, las prebúsquedas residentes sin uso cuentan como erróneas."""
        if self._censo_cerrado:
            return self.estadisticas.prebusquedas_sin_uso_final
        for bloque in self._bloques_prebuscados_sin_uso():
            self._registrar("vaciado_sin_uso", bloque)
        self.estadisticas.prebusquedas_sin_uso_final += self.censo_prebusquedas_sin_uso()
        self._censo_cerrado = True
        return self.estadisticas.prebusquedas_sin_uso_final

    def __repr__(self) -> str:
        return f"NivelCache(nombre={self.nombre!r}, indice={self.indice}, conjuntos={self._num_conjuntos})"


class JerarquiaCache:
    """Niveles encadenados de L1 hacia memoria, con acumulador de latencia."""

    def __init__(
        self,
        geometrias: Sequence[GeometriaCache],
        latencia_memoria: int = 200,
        registrar_latencias: bool = False,
        registrar_eventos: bool = False,
    ):
        if not geometrias:
            raise ValueError("La jerarquía necesita al menos un nivel")
        self.latencia_memoria = latencia_memoria
        self.niveles: List[NivelCache] = []
        siguiente = None
        for indice in reversed(range(len(geometrias))):
            siguiente = NivelCache(
                geometrias[indice], indice, siguiente, latencia_memoria, registrar_eventos
            )
            self.niveles.insert(0, siguiente)
        self.accesos_demanda = 0
        self.latencia_total_ciclos = 0
        self.registro_latencias: Optional[List[int]] = [] if registrar_latencias else None

    @property
    def numero_niveles(self) -> int:
        return len(self.niveles)

    def nivel(self, indice: int) -> NivelCache:
        return self.niveles[indice]

    def acceder_demanda(self, bloque: DireccionBloque, tipo: TipoAcceso = TipoAcceso.LECTURA) -> ResultadoAcceso:
        resultado = self.niveles[0].acceder(bloque, tipo, demanda=True)
        self.accesos_demanda += 1
        self.latencia_total_ciclos += resultado.latencia_ciclos
        if self.registro_latencias is not None:
            self.registro_latencias.append(resultado.latencia_ciclos)
        return resultado

    def rellenar_prebusqueda(self, indice_nivel: int, bloque: DireccionBloque) -> ResultadoAcceso:
        return self.niveles[indice_nivel].rellenar_prebusqueda(bloque)

    def cerrar_censo(self):
        for nivel in self.niveles:
            nivel.cerrar_censo()

    def estadisticas(self) -> List[EstadisticasNivel]:
        return [nivel.estadisticas for nivel in self.niveles]

    def amat(self) -> Fraction:
        return calcular_amat(self.latencia_total_ciclos, self.accesos_demanda)

    def escribir_registro_latencias(self, ruta: Union[str, Path]):
        """Vuelca la latencia de cada acceso de demanda como CSV (acceso, latencia_ciclos)."""
        if self.registro_latencias is None:
            raise ValueError("La jerarquía se creó sin registro de latencias")
        pd.DataFrame(
            {"acceso": range(len(self.registro_latencias)), "latencia_ciclos": self.registro_latencias}
        ).to_csv(ruta, index=False)


def calcular_amat(latencia_total_ciclos: int, accesos_demanda: int) -> Fraction:
    """
    Tiempo medio de acceso a memoria, exacto.

    Raises:
        SinAccesos: Si no hubo accesos de demanda.
    """
    if accesos_demanda <= 0:
        raise SinAccesos("No hay accesos de demanda para calcular el AMAT")
    return Fraction(latencia_total_ciclos, accesos_demanda)
