from enum import Enum

from src.excepciones import ValorFueraDeRango

LIMITE_DIRECCION = 1 << 48
LIMITE_BLOQUE = 1 << 45

# Dirección de bloque: dirección en bytes desplazada por el tamaño de línea.
DireccionBloque = int


class TipoAcceso(str, Enum):
    LECTURA = "R"
    ESCRITURA = "W"


class AccesoMemoria:
    """
    Representa un registro de la traza: una referencia a memoria.
    Los objetos son inmutables y se comparan por valor.
    """

    __slots__ = ("_pc", "_direccion", "_tipo")

    def __init__(self, pc: int, direccion: int, tipo: TipoAcceso = TipoAcceso.LECTURA):
        """
        Constructor de la clase AccesoMemoria.

        Args:
            pc (int): Dirección virtual de la instrucción (48 bits).
            direccion (int): Dirección virtual en bytes (48 bits).
            tipo (TipoAcceso): Lectura o escritura. Defaults to LECTURA.

        Raises:
            ValorFueraDeRango: Si pc o direccion no caben en 48 bits.
        """
        if not 0 <= pc < LIMITE_DIRECCION:
            raise ValorFueraDeRango(pc, campo="pc")
        if not 0 <= direccion < LIMITE_DIRECCION:
            raise ValorFueraDeRango(direccion, campo="direccion")
        object.__setattr__(self, "_pc", pc)
        object.__setattr__(self, "_direccion", direccion)
        object.__setattr__(self, "_tipo", TipoAcceso(tipo))

    def __setattr__(self, nombre, valor):
        raise AttributeError("AccesoMemoria es inmutable")

    @property
    def pc(self) -> int:
        return self._pc

    @property
    def direccion(self) -> int:
        return self._direccion

    @property
    def tipo(self) -> TipoAcceso:
        return self._tipo

    @property
    def es_escritura(self) -> bool:
        return self._tipo is TipoAcceso.ESCRITURA

    def __eq__(self, otro) -> bool:
        if not isinstance(otro, AccesoMemoria):
            return NotImplemented
        return (self._pc, self._direccion, self._tipo) == (otro._pc, otro._direccion, otro._tipo)

    def __hash__(self) -> int:
        return hash((self._pc, self._direccion, self._tipo))

    def __str__(self) -> str:
        return f"{self._pc:x} {self._direccion:x} {self._tipo.value}"

    def __repr__(self) -> str:
        return f"AccesoMemoria(pc={self._pc:#x}, direccion={self._direccion:#x}, tipo={self._tipo.value!r})"
