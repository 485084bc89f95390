"""
Filtro de segundo nivel: extracción de características desde el GHB,
cuantización, voto del perceptrón, tablas de aceptación/denegación y
entrenamiento por corrección de error.
"""
from bisect import bisect_right
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import floor
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import pandas as pd

from src.configuracion import PESO_MAXIMO, PESO_MINIMO, TablaCuantizacion
from src.ghb import BufferHistorialGlobal
from src.modelos.acceso_memoria import DireccionBloque
from src.modelos.caracteristicas import (
    MAXIMO_CUANTIZADO,
    MINIMO_CUANTIZADO,
    CaracteristicasCrudas,
    VectorCaracteristicas,
)
from src.modelos.sugerencia import SugerenciaPrefetch
from src.utils.sistema_logging import ConfiguradorLogging

ACEPTAR = 1
DENEGAR = -1

TABLA_POR_DEFECTO = TablaCuantizacion()


# --- Características ---

def extraer_caracteristicas(
    historial: BufferHistorialGlobal,
    sugerencia: SugerenciaPrefetch,
    bloque_disparo: DireccionBloque,
    pc_disparo: int,
    ventana: int = 8,
) -> CaracteristicasCrudas:
    """
    Calcula las cuatro características crudas de una sugerencia.

    f2 recorre cada aparición previa del bloque de disparo (k en total, sin
    la cabeza) y suma 2^(W-m) por cada entrada a m ∈ [1, W] posiciones más
    nueva cuyo bloque sea el sugerido; el total se divide entre k·2^W.
    """
    ocurrencias_sugerido = historial.ocurrencias(sugerencia.bloque)
    f1 = ocurrencias_sugerido[0] if ocurrencias_sugerido else historial.capacidad
    f4 = len(ocurrencias_sugerido)

    previas = [d for d in historial.ocurrencias(bloque_disparo) if d > 0]
    f2 = Fraction(0)
    if previas:
        suma = 0
        for distancia in previas:
            for m in range(1, min(ventana, distancia) + 1):
                if historial.bloque_a_distancia(distancia - m) == sugerencia.bloque:
                    suma += 1 << (ventana - m)
        f2 = Fraction(suma, len(previas) << ventana)

    f3 = (sugerencia.bloque ^ (pc_disparo >> 2)) & 0xFFFF
    return CaracteristicasCrudas(f1=f1, f2=f2, f3=f3, f4=f4)


def _por_umbrales(valor: int, umbrales: Sequence[int], valores: Sequence[int]) -> int:
    return valores[max(0, bisect_right(umbrales, valor) - 1)]


def cuantizar_f1(distancia: int, tabla: TablaCuantizacion = TABLA_POR_DEFECTO) -> int:
    return _por_umbrales(distancia, tabla.umbrales_f1, tabla.valores_f1)


def cuantizar_f2(probabilidad: Fraction) -> int:
    valor = floor(-8 + 16 * Fraction(probabilidad) + Fraction(1, 2))
    return max(MINIMO_CUANTIZADO, min(MAXIMO_CUANTIZADO, valor))


def cuantizar_f3(valor: int, tabla: TablaCuantizacion = TABLA_POR_DEFECTO) -> int:
    # Hash multiplicativo de 16 bits; los 4 bits altos dan la cubeta.
    return (((valor * tabla.multiplicador_f3) & 0xFFFF) >> 12) - 8


def cuantizar_f4(frecuencia: int, tabla: TablaCuantizacion = TABLA_POR_DEFECTO) -> int:
    return _por_umbrales(frecuencia, tabla.umbrales_f4, tabla.valores_f4)


def cuantizar(crudas: CaracteristicasCrudas, tabla: TablaCuantizacion = TABLA_POR_DEFECTO) -> VectorCaracteristicas:
    return VectorCaracteristicas(
        x1=cuantizar_f1(crudas.f1, tabla),
        x2=cuantizar_f2(crudas.f2),
        x3=cuantizar_f3(crudas.f3, tabla),
        x4=cuantizar_f4(crudas.f4, tabla),
    )


# --- Perceptrón ---

class Veredicto(NamedTuple):
    acepta: bool
    y_out: int

    @property
    def decision(self) -> int:
        return ACEPTAR if self.acepta else DENEGAR


def saturar(valor: int) -> int:
    return max(PESO_MINIMO, min(PESO_MAXIMO, valor))


class Perceptron:
    """
    Perceptrón de cinco pesos enteros de 8 bits con saturación.

    Acepta sólo si y_out > 0. El entrenamiento aplica
    w_j ← sat(w_j + alfa·(d − r)·x_j) cuando d ≠ r.
    """

    def __init__(self, pesos_iniciales: Sequence[int] = (0, 0, 0, 0, 0), alfa: int = 1):
        if len(pesos_iniciales) != 5:
            raise ValueError("El perceptrón necesita exactamente 5 pesos")
        if alfa <= 0:
            raise ValueError("alfa debe ser un entero positivo")
        self._pesos = [saturar(int(p)) for p in pesos_iniciales]
        self.alfa = alfa
        self.actualizaciones = 0

    @property
    def pesos(self) -> Tuple[int, ...]:
        return tuple(self._pesos)

    def salida(self, x: VectorCaracteristicas) -> int:
        return sum(w * xi for w, xi in zip(self._pesos, x.como_tupla()))

    def decidir(self, x: VectorCaracteristicas) -> Veredicto:
        y_out = self.salida(x)
        return Veredicto(y_out > 0, y_out)

    def entrenar(self, x: VectorCaracteristicas, real: int, deseado: int) -> bool:
        """
        Aplica la regla de corrección de error.

        Args:
            x: Entradas con las que se tomó la decisión.
            real: Decisión tomada (+1 aceptar, -1 denegar).
            deseado: Decisión correcta (+1 / -1).

        Returns:
            bool: True si algún peso cambió.
        """
        if real not in (ACEPTAR, DENEGAR) or deseado not in (ACEPTAR, DENEGAR):
            raise ValueError("real y deseado deben valer +1 o -1")
        if real == deseado:
            return False
        factor = self.alfa * (deseado - real)
        anteriores = list(self._pesos)
        self._pesos = [saturar(w + factor * xi) for w, xi in zip(self._pesos, x.como_tupla())]
        self.actualizaciones += 1
        return self._pesos != anteriores

    def __repr__(self) -> str:
        return f"Perceptron(pesos={self.pesos}, alfa={self.alfa})"


# --- Tablas de decisión ---

class TipoTabla(str, Enum):
    ACEPTACION = "aceptacion"
    DENEGACION = "denegacion"


class MotivoResolucion(str, Enum):
    USO = "uso"
    CADUCIDAD = "caducidad"
    EXPULSION = "expulsion"
    FALLO = "fallo"
    VACIADO = "vaciado"


@dataclass(frozen=True, slots=True)
class Resolucion:
    tabla: TipoTabla
    bloque: DireccionBloque
    caracteristicas: VectorCaracteristicas
    real: int
    deseado: int
    motivo: MotivoResolucion

    @property
    def requiere_entrenamiento(self) -> bool:
        return self.real != self.deseado

    @property
    def correcta(self) -> bool:
        return self.real == self.deseado


@dataclass(frozen=True, slots=True)
class AccesoDemanda:
    bloque: DireccionBloque


@dataclass(frozen=True, slots=True)
class FalloCache:
    bloque: DireccionBloque


@dataclass(slots=True)
class EntradaDecision:
    bloque: DireccionBloque
    caracteristicas: VectorCaracteristicas
    tick_insercion: int


class _TablaDecision:
    """
    Tabla FIFO acotada. La duración de cada entrada es reloj − tick de
    inserción, equivalente a incrementar todas las entradas en cada tick.
    """

    def __init__(self, tipo: TipoTabla, capacidad: int, ventana: int):
        self.tipo = tipo
        self.capacidad = capacidad
        self.ventana = ventana
        self.reloj = 0
        self._siguiente_id = 0
        self._entradas: "OrderedDict[int, EntradaDecision]" = OrderedDict()
        self._por_bloque: Dict[DireccionBloque, List[int]] = {}

    @property
    def real(self) -> int:
        return ACEPTAR if self.tipo is TipoTabla.ACEPTACION else DENEGAR

    def __len__(self) -> int:
        return len(self._entradas)

    def _resolver(self, id_entrada: int, deseado: int, motivo: MotivoResolucion) -> Resolucion:
        entrada = self._entradas.pop(id_entrada)
        ids = self._por_bloque[entrada.bloque]
        ids.remove(id_entrada)
        if not ids:
            del self._por_bloque[entrada.bloque]
        return Resolucion(self.tipo, entrada.bloque, entrada.caracteristicas, self.real, deseado, motivo)

    def insertar(self, bloque: DireccionBloque, x: VectorCaracteristicas) -> Optional[Resolucion]:
        expulsada = None
        if len(self._entradas) >= self.capacidad:
            id_viejo = next(iter(self._entradas))
            # Aceptación expulsada: no se usó a tiempo. Denegación expulsada: acierto.
            expulsada = self._resolver(id_viejo, DENEGAR, MotivoResolucion.EXPULSION)
        id_entrada = self._siguiente_id
        self._siguiente_id += 1
        self._entradas[id_entrada] = EntradaDecision(bloque, x, self.reloj)
        self._por_bloque.setdefault(bloque, []).append(id_entrada)
        return expulsada

    def avanzar(self, bloque: DireccionBloque, deseado_si_coincide: int, motivo_coincidencia: MotivoResolucion) -> List[Resolucion]:
        self.reloj += 1
        resueltas = [
            self._resolver(id_entrada, deseado_si_coincide, motivo_coincidencia)
            for id_entrada in list(self._por_bloque.get(bloque, ()))
        ]
        while self._entradas:
            id_viejo, entrada = next(iter(self._entradas.items()))
            if self.reloj - entrada.tick_insercion < self.ventana:
                break
            resueltas.append(self._resolver(id_viejo, DENEGAR, MotivoResolucion.CADUCIDAD))
        return resueltas

    def vaciar(self) -> List[Resolucion]:
        return [self._resolver(id_entrada, DENEGAR, MotivoResolucion.VACIADO) for id_entrada in list(self._entradas)]


class TablasDecision:
    """
    Tablas de aceptación y denegación que producen las etiquetas diferidas
    para entrenar el perceptrón.

    La tabla de aceptación avanza con cada acceso de demanda al nivel del
    prebuscador y la de denegación con cada fallo en ese nivel. En ambas, el
    desenlace "denegar era lo correcto" (d = -1) corresponde a caducidad,
    expulsión o vaciado; una coincidencia de bloque significa d = +1.
    """

    def __init__(
        self,
        capacidad_aceptacion: int = 256,
        capacidad_denegacion: int = 32,
        ventana_aceptacion: int = 256,
        ventana_denegacion: int = 32,
    ):
        self.aceptacion = _TablaDecision(TipoTabla.ACEPTACION, capacidad_aceptacion, ventana_aceptacion)
        self.denegacion = _TablaDecision(TipoTabla.DENEGACION, capacidad_denegacion, ventana_denegacion)
        self.registradas = {TipoTabla.ACEPTACION: 0, TipoTabla.DENEGACION: 0}
        self.resueltas = {TipoTabla.ACEPTACION: 0, TipoTabla.DENEGACION: 0}
        self.aceptaciones_correctas = 0
        self.aceptaciones_erroneas = 0
        self.denegaciones_correctas = 0
        self.denegaciones_erroneas = 0

    @property
    def total_registradas(self) -> int:
        return sum(self.registradas.values())

    @property
    def total_resueltas(self) -> int:
        return sum(self.resueltas.values())

    @property
    def pendientes(self) -> int:
        return len(self.aceptacion) + len(self.denegacion)

    def _contabilizar(self, resoluciones: List[Resolucion]) -> List[Resolucion]:
        for r in resoluciones:
            self.resueltas[r.tabla] += 1
            if r.tabla is TipoTabla.ACEPTACION:
                if r.correcta:
                    self.aceptaciones_correctas += 1
                else:
                    self.aceptaciones_erroneas += 1
            elif r.correcta:
                self.denegaciones_correctas += 1
            else:
                self.denegaciones_erroneas += 1
        return resoluciones

    def registrar_decision(self, bloque: DireccionBloque, x: VectorCaracteristicas, acepta: bool) -> Optional[Resolucion]:
        """
        Registra una decisión con duración 0.

        Returns:
            La resolución de la entrada más antigua si la tabla estaba llena.
        """
        tabla = self.aceptacion if acepta else self.denegacion
        self.registradas[tabla.tipo] += 1
        expulsada = tabla.insertar(bloque, x)
        if expulsada is not None:
            self._contabilizar([expulsada])
        return expulsada

    def avanzar(self, evento: Union[AccesoDemanda, FalloCache]) -> List[Resolucion]:
        if isinstance(evento, AccesoDemanda):
            return self._contabilizar(self.aceptacion.avanzar(evento.bloque, ACEPTAR, MotivoResolucion.USO))
        if isinstance(evento, FalloCache):
            return self._contabilizar(self.denegacion.avanzar(evento.bloque, ACEPTAR, MotivoResolucion.FALLO))
        raise TypeError(f"Evento no soportado: {type(evento).__name__}")

    def vaciar(self) -> List[Resolucion]:
        """Fin de traza: aceptaciones pendientes cuentan como erróneas, denegaciones como correctas."""
        return self._contabilizar(self.aceptacion.vaciar() + self.denegacion.vaciar())


# --- Registro de entrenamiento ---

COLUMNAS_REGISTRO = ["tick", "evento", "bloque", "x1", "x2", "x3", "x4", "x5", "d", "r", "w1", "w2", "w3", "w4", "w5"]


class RegistroEntrenamiento:
    """Acumula una fila por resolución con los pesos tras aplicarla."""

    def __init__(self):
        self.filas: List[tuple] = []
        self.logger = ConfiguradorLogging.obtener_logger("RegistroEntrenamiento")

    def registrar(self, tick: int, resolucion: Resolucion, pesos: Sequence[int]):
        self.filas.append(
            (tick, f"{resolucion.tabla.value}:{resolucion.motivo.value}", resolucion.bloque)
            + resolucion.caracteristicas.como_tupla()
            + (resolucion.deseado, resolucion.real)
            + tuple(pesos)
        )

    def __len__(self) -> int:
        return len(self.filas)

    def a_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.filas, columns=COLUMNAS_REGISTRO)

    def escribir_csv(self, ruta: Union[str, Path]):
        self.a_dataframe().to_csv(ruta, index=False)
        self.logger.info(f"Registro de entrenamiento escrito en {ruta} ({len(self.filas)} filas)")
