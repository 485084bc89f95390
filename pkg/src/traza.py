"""
Lectura, escritura y generación de trazas de accesos a memoria.

Formato de texto: un registro por línea, `<pc-hex> <dir-hex> <R|W>`, hex sin
prefijo en mayúsculas o minúsculas y un espacio como separador. Las líneas
que empiezan por `#` son comentarios y las líneas vacías se ignoran. Un
archivo comprimido con gzip se reconoce por sus bytes mágicos.
"""
import gzip
import io
import re
import zlib
from itertools import islice
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

import numpy as np

from src.excepciones import LineaMalformada, TrazaIlegible, ValorFueraDeRango
from src.modelos.acceso_memoria import (
    LIMITE_DIRECCION,
    AccesoMemoria,
    DireccionBloque,
    TipoAcceso,
)
from src.modelos.especificacion_traza import (
    PC_BASE,
    EspecificacionTraza,
    GeneradorEstride,
    GeneradorIntercalado,
    GeneradorMarkov,
    GeneradorRafagas,
    GeneradorUniforme,
    PoliticaPc,
)
from src.utils.sistema_logging import ConfiguradorLogging

MAGIA_GZIP = b"\x1f\x8b"
PATRON_REGISTRO = re.compile(r"^([0-9a-fA-F]+) ([0-9a-fA-F]+) ([RW])$")

logger = ConfiguradorLogging.obtener_logger("Traza")


def parsear_linea(linea: str, numero_linea: int) -> Optional[AccesoMemoria]:
    """
    Interpreta una línea de traza.

    Returns:
        El acceso, o None si la línea es un comentario o está vacía.

    Raises:
        LineaMalformada: Si la línea no respeta el formato.
        ValorFueraDeRango: Si el PC o la dirección no caben en 48 bits.
    """
    linea = linea.rstrip("\r\n")
    if not linea.strip() or linea.startswith("#"):
        return None
    coincidencia = PATRON_REGISTRO.match(linea)
    if coincidencia is None:
        raise LineaMalformada(numero_linea, linea)
    pc = int(coincidencia.group(1), 16)
    direccion = int(coincidencia.group(2), 16)
    if pc >= LIMITE_DIRECCION:
        raise ValorFueraDeRango(pc, numero_linea, campo="pc")
    if direccion >= LIMITE_DIRECCION:
        raise ValorFueraDeRango(direccion, numero_linea, campo="direccion")
    return AccesoMemoria(pc, direccion, TipoAcceso(coincidencia.group(3)))


def abrir_como_texto(flujo: Union[BinaryIO, TextIO]) -> TextIO:
    """Devuelve un flujo de texto UTF-8, descomprimiendo si hay magia gzip."""
    if isinstance(flujo, io.TextIOBase):
        return flujo
    if not hasattr(flujo, "peek"):
        flujo = io.BufferedReader(flujo)
    if flujo.peek(2)[:2] == MAGIA_GZIP:
        flujo = gzip.GzipFile(fileobj=flujo, mode="rb")
    return io.TextIOWrapper(flujo, encoding="utf-8", newline="")


def lineas_legibles(texto: TextIO) -> Iterator[Tuple[int, str]]:
    """
    Enumera las líneas de un flujo de texto a partir de 1.

    Raises:
        TrazaIlegible: Si el contenido no es UTF-8 válido o el gzip está
            truncado o dañado.
    """
    lineas = iter(texto)
    numero_linea = 0
    while True:
        try:
            linea = next(lineas)
        except StopIteration:
            return
        except UnicodeDecodeError as e:
            raise TrazaIlegible(f"UTF-8 inválido ({e.reason})", numero_linea or None) from e
        except (EOFError, zlib.error, gzip.BadGzipFile) as e:
            raise TrazaIlegible(f"gzip truncado o dañado ({e})", numero_linea or None) from e
        numero_linea += 1
        yield numero_linea, linea


def parsear_traza(flujo: Union[BinaryIO, TextIO]) -> Iterator[AccesoMemoria]:
    """
    Recorre una traza en orden de archivo sin cargarla entera en memoria.

    Args:
        flujo: Flujo binario (texto plano o gzip) o flujo de texto ya abierto.

    Yields:
        AccesoMemoria: Un registro por línea no comentada.
    """
    for numero_linea, linea in lineas_legibles(abrir_como_texto(flujo)):
        acceso = parsear_linea(linea, numero_linea)
        if acceso is not None:
            yield acceso


def leer_traza(ruta: Union[str, Path]) -> Iterator[AccesoMemoria]:
    """Abre un archivo de traza y lo recorre con parsear_traza."""
    ruta = Path(ruta)
    contador = 0
    with open(ruta, "rb") as archivo:
        for acceso in parsear_traza(archivo):
            contador += 1
            yield acceso
    logger.debug(f"Traza {ruta} leída: {contador} registros")


def serializar_traza(accesos: Iterable[AccesoMemoria], destino: TextIO) -> int:
    """Escribe los accesos en forma canónica (hex en minúsculas). Devuelve cuántos."""
    escritos = 0
    for acceso in accesos:
        destino.write(f"{acceso.pc:x} {acceso.direccion:x} {acceso.tipo.value}\n")
        escritos += 1
    return escritos


def escribir_traza(accesos: Iterable[AccesoMemoria], ruta: Union[str, Path]) -> int:
    """Guarda una traza en disco; comprime con gzip si la ruta termina en `.gz`."""
    ruta = Path(ruta)
    if ruta.suffix == ".gz":
        with gzip.GzipFile(ruta, mode="wb", mtime=0) as binario:
            with io.TextIOWrapper(binario, encoding="utf-8", newline="\n") as destino:
                return serializar_traza(accesos, destino)
    with open(ruta, "w", encoding="utf-8", newline="\n") as destino:
        return serializar_traza(accesos, destino)


def desplazamiento_linea(bytes_linea: int) -> int:
    if bytes_linea < 16 or bytes_linea > 256 or bytes_linea & (bytes_linea - 1):
        raise ValueError(f"bytes_linea debe ser potencia de dos entre 16 y 256, no {bytes_linea}")
    return bytes_linea.bit_length() - 1


def bloque_de(acceso: AccesoMemoria, bytes_linea: int = 64) -> DireccionBloque:
    return acceso.direccion >> desplazamiento_linea(bytes_linea)


# --- Generación sintética ---

def _generador_pcg(semilla: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(semilla))


def _tipos_de_acceso(hoja, cantidad: int) -> List[TipoAcceso]:
    if hoja.fraccion_escrituras <= 0.0:
        return [hoja.tipo_acceso] * cantidad
    sorteo = _generador_pcg(hoja.semilla + 1).random(cantidad) < hoja.fraccion_escrituras
    return [TipoAcceso.ESCRITURA if escribe else hoja.tipo_acceso for escribe in sorteo]


def _direcciones_rafagas(hoja: GeneradorRafagas) -> np.ndarray:
    generador = _generador_pcg(hoja.semilla)
    maximo_rafagas = hoja.cantidad // min(hoja.longitudes) + 1
    longitudes = generador.choice(np.asarray(hoja.longitudes, dtype=np.int64), size=maximo_rafagas)
    alcance = hoja.huella_bytes - (max(hoja.longitudes) - 1) * hoja.paso_bytes
    ranuras = generador.integers(0, alcance // hoja.alineacion_bytes, size=maximo_rafagas)
    bases = hoja.base + ranuras * hoja.alineacion_bytes
    # posición de cada acceso dentro de su ráfaga
    inicios = np.cumsum(longitudes) - longitudes
    posiciones = np.arange(int(longitudes.sum()), dtype=np.int64) - np.repeat(inicios, longitudes)
    direcciones = np.repeat(bases, longitudes) + posiciones * hoja.paso_bytes
    return direcciones[: hoja.cantidad]


def _direcciones_hoja(hoja) -> np.ndarray:
    if isinstance(hoja, GeneradorEstride):
        return hoja.inicio + np.arange(hoja.cantidad, dtype=np.int64) * hoja.paso_bytes
    if isinstance(hoja, GeneradorUniforme):
        ranuras = hoja.huella_bytes // hoja.alineacion_bytes
        return hoja.base + _generador_pcg(hoja.semilla).integers(0, ranuras, size=hoja.cantidad) * hoja.alineacion_bytes
    if isinstance(hoja, GeneradorRafagas):
        return _direcciones_rafagas(hoja)
    if isinstance(hoja, GeneradorMarkov):
        acumulada = np.cumsum(np.asarray(hoja.matriz_transicion, dtype=np.float64), axis=1)
        ultimo = len(hoja.estados) - 1
        sorteos = _generador_pcg(hoja.semilla).random(hoja.cantidad - 1)
        estado = hoja.estado_inicial
        recorrido = [estado]
        for u in sorteos:
            estado = min(int(np.searchsorted(acumulada[estado], u, side="right")), ultimo)
            recorrido.append(estado)
        return np.asarray(hoja.estados, dtype=np.int64)[recorrido]
    raise TypeError(f"Generador no soportado: {type(hoja).__name__}")


def _flujo_hoja(hoja, pc: int) -> Iterator[AccesoMemoria]:
    direcciones = _direcciones_hoja(hoja)
    tipos = _tipos_de_acceso(hoja, hoja.cantidad)
    for direccion, tipo in zip(direcciones.tolist(), tipos):
        yield AccesoMemoria(pc, direccion, tipo)


def _construir_flujo(generador, politica: PoliticaPc, contador_hojas: List[int]) -> Iterator[AccesoMemoria]:
    if isinstance(generador, GeneradorIntercalado):
        subflujos = [_construir_flujo(sub, politica, contador_hojas) for sub in generador.sub_especificaciones]
        return _intercalar(subflujos, generador.granularidad)
    indice_hoja = contador_hojas[0]
    contador_hojas[0] += 1
    pc = PC_BASE + 4 * indice_hoja if politica is PoliticaPc.PC_POR_FLUJO else PC_BASE
    return _flujo_hoja(generador, pc)


def _intercalar(subflujos: List[Iterator[AccesoMemoria]], granularidad: int) -> Iterator[AccesoMemoria]:
    activos = list(subflujos)
    while activos:
        siguientes = []
        for flujo in activos:
            bloque = list(islice(flujo, granularidad))
            yield from bloque
            if len(bloque) == granularidad:
                siguientes.append(flujo)
        activos = siguientes


def iterar_traza(especificacion: EspecificacionTraza) -> Iterator[AccesoMemoria]:
    """Versión perezosa de generar_traza."""
    return _construir_flujo(especificacion.generador, especificacion.politica_pc, [0])


def generar_traza(especificacion: EspecificacionTraza) -> List[AccesoMemoria]:
    """
    Genera una traza sintética determinista para la especificación dada.

    Args:
        especificacion (EspecificacionTraza): Generador validado.

    Returns:
        List[AccesoMemoria]: Accesos en orden de emisión.
    """
    return list(iterar_traza(especificacion))
