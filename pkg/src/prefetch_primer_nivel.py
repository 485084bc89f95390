"""
Prebuscadores de primer nivel sobre el GHB: stride (cadena por PC) y Markov
(cadena por bloque). Ambos suponen que el fallo ya se insertó en el GHB.
"""
from typing import Dict, List, Tuple

from src.configuracion import ConfigMarkov, ConfigStride
from src.ghb import BufferHistorialGlobal, ModoIndice
from src.modelos.acceso_memoria import LIMITE_BLOQUE, DireccionBloque
from src.modelos.sugerencia import OrigenSugerencia, SugerenciaPrefetch


def sugerir_stride(
    historial: BufferHistorialGlobal,
    bloque: DireccionBloque,
    pc: int,
    config: ConfigStride,
    bytes_linea: int = 64,
) -> List[SugerenciaPrefetch]:
    """
    Confirma un paso constante en la cadena del PC y emite A+s, ..., A+grado·s.

    Toma los `longitud_confirmacion` bloques más recientes de la cadena; si
    todas las diferencias consecutivas valen el mismo s ≠ 0 se emite, si no
    la lista queda vacía. Los bloques fuera del espacio de 45 bits (o fuera
    de la página del disparo, con `limitar_a_pagina`) se descartan sin
    reasignar el rango.
    """
    if historial.modo is not ModoIndice.PC:
        raise ValueError("El prebuscador stride necesita un GHB indexado por PC")
    cadena = historial.recorrer_cadena(pc)[: config.longitud_confirmacion]
    if len(cadena) < config.longitud_confirmacion:
        return []
    bloques = [historial.bloque(indice) for indice in cadena]
    deltas = {mas_nuevo - mas_viejo for mas_nuevo, mas_viejo in zip(bloques, bloques[1:])}
    if len(deltas) != 1:
        return []
    paso = deltas.pop()
    if paso == 0:
        return []

    bloques_por_pagina = max(1, config.bytes_pagina // bytes_linea)
    pagina_disparo = bloque // bloques_por_pagina
    sugerencias = []
    for rango in range(config.grado):
        candidato = bloque + (rango + 1) * paso
        if not 0 <= candidato < LIMITE_BLOQUE:
            continue
        if config.limitar_a_pagina and candidato // bloques_por_pagina != pagina_disparo:
            continue
        sugerencias.append(SugerenciaPrefetch(candidato, bloque, pc, OrigenSugerencia.STRIDE, rango))
    return sugerencias


def sugerir_markov(
    historial: BufferHistorialGlobal,
    bloque: DireccionBloque,
    pc: int,
    config: ConfigMarkov,
) -> List[SugerenciaPrefetch]:
    """
    Emite los sucesores más probables del bloque fallado.

    Recorre las apariciones previas del bloque (sin la cabeza recién
    insertada) y cuenta el bloque de la entrada insertada justo después de
    cada una. Orden: cuenta descendente, luego la aparición más reciente del
    sucesor, luego bloque ascendente. El propio bloque nunca se sugiere.
    """
    if historial.modo is not ModoIndice.BLOQUE:
        raise ValueError("El prebuscador Markov necesita un GHB indexado por bloque")
    cadena = historial.recorrer_cadena(bloque)
    if cadena and cadena[0] == historial.cabeza:
        cadena = cadena[1:]

    cuentas: Dict[DireccionBloque, int] = {}
    recencia: Dict[DireccionBloque, int] = {}
    for indice in cadena:
        sucesor = historial.sucesor(indice)
        if sucesor is None:
            continue
        siguiente = historial.bloque(sucesor)
        if siguiente == bloque:
            continue
        cuentas[siguiente] = cuentas.get(siguiente, 0) + 1
        if siguiente not in recencia:
            recencia[siguiente] = historial.distancia_desde_cabeza(sucesor)

    ordenados: List[Tuple[int, int, DireccionBloque]] = sorted(
        (-cuenta, recencia[candidato], candidato) for candidato, cuenta in cuentas.items()
    )
    return [
        SugerenciaPrefetch(candidato, bloque, pc, OrigenSugerencia.MARKOV, rango)
        for rango, (_, _, candidato) in enumerate(ordenados[: config.grado])
    ]
