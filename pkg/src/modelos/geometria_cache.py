from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.modelos.acceso_memoria import DireccionBloque


def es_potencia_de_dos(valor: int) -> bool:
    return valor > 0 and (valor & (valor - 1)) == 0


class GeometriaCache(BaseModel):
    """
    Geometría y latencia de un nivel de cache.

    Los puertos de lectura/escritura se conservan sólo como dato de
    configuración; el modelo no simula contención.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    nombre: str = "L?"
    tamano_bytes: int = Field(gt=0)
    bytes_linea: int = Field(default=64, ge=16, le=256)
    asociatividad: int = Field(gt=0)
    latencia_acierto_ciclos: int = Field(gt=0)
    puertos_lectura: int = Field(default=2, ge=1)
    puertos_escritura: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _validar_potencias(self) -> "GeometriaCache":
        for campo in ("tamano_bytes", "bytes_linea", "asociatividad"):
            if not es_potencia_de_dos(getattr(self, campo)):
                raise ValueError(f"{campo} debe ser potencia de dos (nivel {self.nombre})")
        if self.tamano_bytes % (self.asociatividad * self.bytes_linea) != 0:
            raise ValueError(
                f"asociatividad * bytes_linea debe dividir tamano_bytes (nivel {self.nombre})"
            )
        return self

    @property
    def numero_conjuntos(self) -> int:
        return self.tamano_bytes // (self.asociatividad * self.bytes_linea)


@dataclass(slots=True)
class EstadoLinea:
    etiqueta: int = 0
    valida: bool = False
    sucia: bool = False
    prebuscada: bool = False
    usada_desde_relleno: bool = False
    sello_lru: int = 0


@dataclass(frozen=True, slots=True)
class Expulsion:
    bloque: DireccionBloque
    era_prebuscada: bool
    fue_usada: bool
    sucia: bool = False


@dataclass(frozen=True, slots=True)
class ResultadoAcceso:
    """
    Resultado de un acceso a un nivel.

    nivel_servidor es el índice del nivel que acertó (0 = L1); vale el número
    de niveles cuando la memoria principal atendió el acceso.
    """

    acierto: bool
    expulsado: Optional[Expulsion]
    latencia_ciclos: int
    nivel_servidor: int = 0
