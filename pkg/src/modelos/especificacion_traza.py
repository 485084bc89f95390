"""
Especificaciones declarativas de trazas sintéticas.

Cada generador lleva su propia semilla; el algoritmo pseudoaleatorio es
PCG64 de numpy, estable entre plataformas para una misma semilla.
"""
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.excepciones import EspecificacionInvalida
from src.modelos.acceso_memoria import LIMITE_DIRECCION, TipoAcceso

TOLERANCIA_FILA = 1e-9
PC_BASE = 0x400000


class PoliticaPc(str, Enum):
    PC_UNICO = "pc_unico"
    PC_POR_FLUJO = "pc_por_flujo"


class _BaseGenerador(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    tipo_acceso: TipoAcceso = TipoAcceso.LECTURA
    fraccion_escrituras: float = Field(default=0.0, ge=0.0, le=1.0)
    semilla: int = Field(default=0, ge=0)


class GeneradorEstride(_BaseGenerador):
    tipo: Literal["estride"] = "estride"
    inicio: int = Field(ge=0)
    paso_bytes: int
    cantidad: int = Field(gt=0)

    @model_validator(mode="after")
    def _validar_rango(self) -> "GeneradorEstride":
        ultima = self.inicio + (self.cantidad - 1) * self.paso_bytes
        if not (0 <= self.inicio < LIMITE_DIRECCION and 0 <= ultima < LIMITE_DIRECCION):
            raise ValueError("las direcciones generadas salen del espacio de 48 bits")
        return self


class GeneradorMarkov(_BaseGenerador):
    tipo: Literal["markov"] = "markov"
    estados: List[int] = Field(min_length=1)
    matriz_transicion: List[List[float]]
    cantidad: int = Field(gt=0)
    estado_inicial: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _validar_matriz(self) -> "GeneradorMarkov":
        n = len(self.estados)
        if len(self.matriz_transicion) != n:
            raise ValueError(f"la matriz debe tener {n} filas")
        for i, fila in enumerate(self.matriz_transicion):
            if len(fila) != n:
                raise ValueError(f"la fila {i} debe tener {n} columnas")
            if any(p < 0 for p in fila):
                raise ValueError(f"la fila {i} tiene probabilidades negativas")
            if abs(sum(fila) - 1.0) > TOLERANCIA_FILA:
                raise ValueError(f"la fila {i} suma {sum(fila)!r}, no 1.0")
        if self.estado_inicial >= n:
            raise ValueError("estado_inicial fuera de rango")
        if any(not 0 <= d < LIMITE_DIRECCION for d in self.estados):
            raise ValueError("las direcciones de estado deben caber en 48 bits")
        return self


class GeneradorUniforme(_BaseGenerador):
    """Direcciones uniformes en [base, base + huella) alineadas a `alineacion_bytes`."""

    tipo: Literal["uniforme"] = "uniforme"
    huella_bytes: int = Field(gt=0)
    cantidad: int = Field(gt=0)
    base: int = Field(default=0, ge=0)
    alineacion_bytes: int = Field(default=1, gt=0)

    @model_validator(mode="after")
    def _validar_rango(self) -> "GeneradorUniforme":
        if self.base + self.huella_bytes > LIMITE_DIRECCION:
            raise ValueError("base + huella_bytes excede el espacio de 48 bits")
        if self.alineacion_bytes > self.huella_bytes:
            raise ValueError("alineacion_bytes no puede superar huella_bytes")
        return self


class GeneradorRafagas(_BaseGenerador):
    """
    Recorridos cortos de paso fijo que empiezan en bases aleatorias.

    La longitud de cada ráfaga se sortea entre `longitudes`; las bases se
    alinean a `alineacion_bytes` y la ráfaga completa cabe en la huella.
    """

    tipo: Literal["rafagas"] = "rafagas"
    huella_bytes: int = Field(gt=0)
    paso_bytes: int = Field(gt=0)
    longitudes: List[int] = Field(min_length=1)
    cantidad: int = Field(gt=0)
    base: int = Field(default=0, ge=0)
    alineacion_bytes: int = Field(default=64, gt=0)

    @model_validator(mode="after")
    def _validar_rafagas(self) -> "GeneradorRafagas":
        if any(n < 1 for n in self.longitudes):
            raise ValueError("las longitudes de ráfaga deben ser >= 1")
        if self.base + self.huella_bytes > LIMITE_DIRECCION:
            raise ValueError("base + huella_bytes excede el espacio de 48 bits")
        if self.huella_bytes - (max(self.longitudes) - 1) * self.paso_bytes < self.alineacion_bytes:
            raise ValueError("la huella no admite ni una ráfaga de la longitud máxima")
        return self


class GeneradorIntercalado(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    tipo: Literal["intercalado"] = "intercalado"
    sub_especificaciones: List["Generador"] = Field(min_length=1)
    granularidad: int = Field(default=1, gt=0)

    @property
    def cantidad(self) -> int:
        return sum(sub.cantidad for sub in self.sub_especificaciones)


Generador = Annotated[
    Union[GeneradorEstride, GeneradorMarkov, GeneradorUniforme, GeneradorRafagas, GeneradorIntercalado],
    Field(discriminator="tipo"),
]

GeneradorIntercalado.model_rebuild()


class EspecificacionTraza(BaseModel):
    """Generador raíz más la política de asignación de PCs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    generador: Generador
    politica_pc: PoliticaPc = PoliticaPc.PC_UNICO

    @property
    def cantidad(self) -> int:
        return self.generador.cantidad


def validar_especificacion(datos: Dict[str, Any]) -> EspecificacionTraza:
    """
    Valida un diccionario como especificación de traza.

    Acepta tanto la forma completa ({"generador": ..., "politica_pc": ...})
    como un generador suelto ({"tipo": "estride", ...}).

    Raises:
        EspecificacionInvalida: Si los datos no cumplen los invariantes.
    """
    if not isinstance(datos, dict):
        raise EspecificacionInvalida("La especificación de traza debe ser un objeto JSON")
    if "tipo" in datos:
        datos = {"generador": datos}
    try:
        return EspecificacionTraza.model_validate(datos)
    except ValidationError as e:
        detalles = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise EspecificacionInvalida(
            f"Especificación de traza inválida: {'; '.join(detalles)}", detalles
        ) from e
