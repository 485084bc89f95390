from dataclasses import dataclass
from enum import Enum

from src.modelos.acceso_memoria import DireccionBloque


class OrigenSugerencia(str, Enum):
    STRIDE = "stride"
    MARKOV = "markov"


@dataclass(frozen=True, slots=True)
class SugerenciaPrefetch:
    """Bloque candidato emitido por un prebuscador de primer nivel."""

    bloque: DireccionBloque
    bloque_disparo: DireccionBloque
    pc_disparo: int
    origen: OrigenSugerencia
    rango: int

    def __str__(self) -> str:
        return f"Sugerencia({self.origen.value}#{self.rango}: {self.bloque:#x} <- {self.bloque_disparo:#x})"
