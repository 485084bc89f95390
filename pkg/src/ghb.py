"""
Global History Buffer: FIFO circular de bloques que fallaron, con enlaces
entre entradas de la misma clave y una tabla índice clave → entrada más reciente.

Cada inserción recibe un número de secuencia creciente que actúa como
generación del hueco (hueco = secuencia % capacidad). Internamente los
enlaces guardan secuencias; hacia fuera se exponen índices de hueco, que es
lo que mide el hardware (9 bits para 512 entradas). Al expulsar una entrada
se purgan en el acto el puntero de la tabla índice y el enlace de la entrada
más nueva que la apuntaba.
"""
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Deque, Dict, Iterator, List, Optional

from src.excepciones import EntradaMuerta
from src.modelos.acceso_memoria import DireccionBloque
from src.utils.sistema_logging import ConfiguradorLogging

SIN_ENLACE = -1


class ModoIndice(str, Enum):
    PC = "pc"
    BLOQUE = "bloque"


@dataclass(frozen=True, slots=True)
class EntradaGhb:
    indice: int
    bloque: DireccionBloque
    pc: int
    enlace: Optional[int]


class BufferHistorialGlobal:
    """
    GHB de capacidad fija indexado por PC (stride) o por bloque (Markov).

    Además del GHB modelado mantiene, como contabilidad de simulación, las
    posiciones vivas de cada bloque para la extracción de características.
    """

    def __init__(self, capacidad: int = 512, modo: ModoIndice = ModoIndice.PC):
        if capacidad <= 0:
            raise ValueError("La capacidad del GHB debe ser positiva")
        self.capacidad = capacidad
        self.modo = ModoIndice(modo)
        self._bloques: List[int] = [0] * capacidad
        self._pcs: List[int] = [0] * capacidad
        self._secuencia_hueco: List[int] = [SIN_ENLACE] * capacidad
        self._enlace: List[int] = [SIN_ENLACE] * capacidad
        self._posterior: List[int] = [SIN_ENLACE] * capacidad
        self._siguiente_secuencia = 0
        self._indice: Dict[int, int] = {}
        self._posiciones: Dict[DireccionBloque, Deque[int]] = {}
        self.logger = ConfiguradorLogging.obtener_logger("GHB")
        self.logger.debug(f"GHB creado: {capacidad} entradas, índice por {self.modo.value}")

    # --- Estado ---
    def __len__(self) -> int:
        return min(self._siguiente_secuencia, self.capacidad)

    @property
    def secuencia_cabeza(self) -> Optional[int]:
        return self._siguiente_secuencia - 1 if self._siguiente_secuencia else None

    @property
    def cabeza(self) -> Optional[int]:
        """Índice de hueco de la entrada más reciente."""
        secuencia = self.secuencia_cabeza
        return None if secuencia is None else secuencia % self.capacidad

    @property
    def claves_vivas(self) -> int:
        return len(self._indice)

    def _clave(self, bloque: DireccionBloque, pc: int) -> int:
        return pc if self.modo is ModoIndice.PC else bloque

    def _secuencia_viva(self, indice: int) -> int:
        if not 0 <= indice < self.capacidad or indice >= self._siguiente_secuencia:
            raise EntradaMuerta(indice)
        return self._secuencia_hueco[indice]

    # --- Operaciones ---
    def insertar(self, bloque: DireccionBloque, pc: int):
        """Añade una entrada en la cabeza, expulsando la más antigua si está lleno."""
        secuencia = self._siguiente_secuencia
        hueco = secuencia % self.capacidad
        if secuencia >= self.capacidad:
            self._expulsar(hueco)

        clave = self._clave(bloque, pc)
        anterior = self._indice.get(clave, SIN_ENLACE)
        if anterior != SIN_ENLACE:
            self._posterior[anterior % self.capacidad] = secuencia

        self._bloques[hueco] = bloque
        self._pcs[hueco] = pc
        self._secuencia_hueco[hueco] = secuencia
        self._enlace[hueco] = anterior
        self._posterior[hueco] = SIN_ENLACE
        self._indice[clave] = secuencia
        self._posiciones.setdefault(bloque, deque()).append(secuencia)
        self._siguiente_secuencia += 1

    def _expulsar(self, hueco: int):
        secuencia = self._secuencia_hueco[hueco]
        bloque = self._bloques[hueco]
        clave = self._clave(bloque, self._pcs[hueco])
        if self._indice.get(clave) == secuencia:
            del self._indice[clave]
        posterior = self._posterior[hueco]
        if posterior != SIN_ENLACE:
            self._enlace[posterior % self.capacidad] = SIN_ENLACE
        posiciones = self._posiciones[bloque]
        posiciones.popleft()
        if not posiciones:
            del self._posiciones[bloque]

    def recorrer_cadena(self, clave: int) -> List[int]:
        """Índices de las entradas vivas con esa clave, de la más nueva a la más vieja."""
        indices = []
        secuencia = self._indice.get(clave, SIN_ENLACE)
        while secuencia != SIN_ENLACE:
            hueco = secuencia % self.capacidad
            indices.append(hueco)
            secuencia = self._enlace[hueco]
        return indices

    def distancia_desde_cabeza(self, indice: int) -> int:
        """0 para la cabeza, creciente con la antigüedad. Lanza EntradaMuerta si no está viva."""
        return self._siguiente_secuencia - 1 - self._secuencia_viva(indice)

    def entrada(self, indice: int) -> EntradaGhb:
        self._secuencia_viva(indice)
        enlace = self._enlace[indice]
        return EntradaGhb(
            indice=indice,
            bloque=self._bloques[indice],
            pc=self._pcs[indice],
            enlace=None if enlace == SIN_ENLACE else enlace % self.capacidad,
        )

    def bloque(self, indice: int) -> DireccionBloque:
        self._secuencia_viva(indice)
        return self._bloques[indice]

    def sucesor(self, indice: int) -> Optional[int]:
        """Índice de la entrada insertada justo después, o None si es la cabeza."""
        secuencia = self._secuencia_viva(indice) + 1
        if secuencia >= self._siguiente_secuencia:
            return None
        return secuencia % self.capacidad

    def bloque_a_distancia(self, distancia: int) -> DireccionBloque:
        if not 0 <= distancia < len(self):
            raise EntradaMuerta(distancia)
        return self._bloques[(self._siguiente_secuencia - 1 - distancia) % self.capacidad]

    def ocurrencias(self, bloque: DireccionBloque) -> List[int]:
        """Distancias desde la cabeza de cada entrada viva con ese bloque, crecientes."""
        posiciones = self._posiciones.get(bloque)
        if not posiciones:
            return []
        cabeza = self._siguiente_secuencia - 1
        return [cabeza - secuencia for secuencia in reversed(posiciones)]

    def cuenta_bloque(self, bloque: DireccionBloque) -> int:
        posiciones = self._posiciones.get(bloque)
        return len(posiciones) if posiciones else 0

    def iterar_desde_cabeza(self) -> Iterator[EntradaGhb]:
        for distancia in range(len(self)):
            yield self.entrada((self._siguiente_secuencia - 1 - distancia) % self.capacidad)

    def volcar(self) -> str:
        """Listado de entradas vivas, de la más nueva a la más vieja: `indice bloque pc enlace`."""
        lineas = []
        for entrada in self.iterar_desde_cabeza():
            enlace = "-" if entrada.enlace is None else str(entrada.enlace)
            lineas.append(f"{entrada.indice} {entrada.bloque:#x} {entrada.pc:#x} {enlace}")
        return "\n".join(lineas)

    def verificar_invariantes(self):
        """
        Comprueba la consistencia interna del buffer.

        Raises:
            RuntimeError: Ante el primer invariante roto.
        """
        vivas = len(self)
        if vivas > self.capacidad:
            raise RuntimeError("Más entradas vivas que capacidad")
        mas_vieja = self._siguiente_secuencia - vivas
        for clave, secuencia in self._indice.items():
            hueco = secuencia % self.capacidad
            if secuencia < mas_vieja or self._secuencia_hueco[hueco] != secuencia:
                raise RuntimeError(f"La tabla índice apunta a una entrada muerta (clave {clave:#x})")
            if self._clave(self._bloques[hueco], self._pcs[hueco]) != clave:
                raise RuntimeError(f"La tabla índice apunta a otra clave (clave {clave:#x})")
        conteo: Dict[DireccionBloque, int] = {}
        for secuencia in range(mas_vieja, self._siguiente_secuencia):
            hueco = secuencia % self.capacidad
            conteo[self._bloques[hueco]] = conteo.get(self._bloques[hueco], 0) + 1
            enlace = self._enlace[hueco]
            if enlace == SIN_ENLACE:
                continue
            if enlace < mas_vieja or enlace >= secuencia:
                raise RuntimeError(f"El enlace de la entrada {hueco} apunta a un hueco expulsado o más nuevo")
            destino = enlace % self.capacidad
            if self._clave(self._bloques[destino], self._pcs[destino]) != self._clave(
                self._bloques[hueco], self._pcs[hueco]
            ):
                raise RuntimeError(f"El enlace de la entrada {hueco} cruza claves distintas")
        if conteo != {b: len(p) for b, p in self._posiciones.items()}:
            raise RuntimeError("Las posiciones por bloque no coinciden con el contenido del buffer")

    def __repr__(self) -> str:
        return f"BufferHistorialGlobal(capacidad={self.capacidad}, modo={self.modo.value!r}, vivas={len(self)})"
