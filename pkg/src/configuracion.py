"""
Configuración del simulador.

Los parámetros del modelo (geometrías, GHB, perceptrón, ventanas) viven en un
único archivo JSON validado con pydantic; todos los campos tienen por defecto
las constantes de referencia, así que un archivo vacío es válido. Los ajustes
operativos (hilos, cache de resultados, logging) se leen del entorno,
cargado desde `.env` con python-dotenv.
"""
import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.excepciones import ConfiguracionInvalida, EspecificacionInvalida
from src.modelos.especificacion_traza import EspecificacionTraza, validar_especificacion
from src.modelos.geometria_cache import GeometriaCache

load_dotenv()

PESO_MINIMO = -128
PESO_MAXIMO = 127
DURACION_MAXIMA = 256

GEOMETRIA_L1_DEFECTO = GeometriaCache(
    nombre="L1D", tamano_bytes=32 * 1024, bytes_linea=64, asociatividad=8, latencia_acierto_ciclos=4
)
GEOMETRIA_L2_DEFECTO = GeometriaCache(
    nombre="L2", tamano_bytes=256 * 1024, bytes_linea=64, asociatividad=8, latencia_acierto_ciclos=6
)
# 12MB no es potencia de dos; se usa la potencia inferior.
GEOMETRIA_L3_DEFECTO = GeometriaCache(
    nombre="L3", tamano_bytes=8 * 1024 * 1024, bytes_linea=64, asociatividad=16, latencia_acierto_ciclos=27
)


class TipoPrefetcher(str, Enum):
    NINGUNO = "ninguno"
    STRIDE = "S"
    STRIDE_PERCEPTRON = "SP"
    MARKOV = "M"
    MARKOV_PERCEPTRON = "MP"

    @property
    def usa_perceptron(self) -> bool:
        return self in (TipoPrefetcher.STRIDE_PERCEPTRON, TipoPrefetcher.MARKOV_PERCEPTRON)

    @property
    def es_stride(self) -> bool:
        return self in (TipoPrefetcher.STRIDE, TipoPrefetcher.STRIDE_PERCEPTRON)

    @property
    def es_markov(self) -> bool:
        return self in (TipoPrefetcher.MARKOV, TipoPrefetcher.MARKOV_PERCEPTRON)


class _Modelo(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConfigStride(_Modelo):
    grado: int = Field(default=2, ge=1)
    longitud_confirmacion: int = Field(default=3, ge=2)
    limitar_a_pagina: bool = False
    bytes_pagina: int = Field(default=4096, gt=0)


class ConfigMarkov(_Modelo):
    grado: int = Field(default=4, ge=1)


class TablaCuantizacion(_Modelo):
    """
    Límites de cubeta de cada característica.

    f1 y f4 usan escalas por umbrales: el valor crudo toma el valor de la
    última cubeta cuyo umbral no lo supera. f2 es lineal y f3 un hash
    multiplicativo a 4 bits con signo.
    """

    umbrales_f1: List[int] = [0, 1, 2, 4, 8, 16, 32, 64, 128]
    valores_f1: List[int] = [8, 6, 4, 2, 0, -2, -4, -6, -8]
    multiplicador_f3: int = Field(default=0x9E37, gt=0)
    umbrales_f4: List[int] = [0, 1, 2, 4, 8, 16, 32]
    valores_f4: List[int] = [-8, -6, -3, 0, 3, 6, 8]

    @model_validator(mode="after")
    def _validar_escalas(self) -> "TablaCuantizacion":
        for nombre, umbrales, valores, creciente in (
            ("f1", self.umbrales_f1, self.valores_f1, False),
            ("f4", self.umbrales_f4, self.valores_f4, True),
        ):
            if len(umbrales) != len(valores) or not umbrales:
                raise ValueError(f"umbrales y valores de {nombre} deben tener la misma longitud")
            if umbrales[0] != 0:
                raise ValueError(f"el primer umbral de {nombre} debe ser 0")
            if any(b <= a for a, b in zip(umbrales, umbrales[1:])):
                raise ValueError(f"los umbrales de {nombre} deben ser estrictamente crecientes")
            if any(not -8 <= v <= 8 for v in valores):
                raise ValueError(f"los valores de {nombre} deben estar en [-8, 8]")
            pares = list(zip(valores, valores[1:]))
            if creciente and any(b < a for a, b in pares):
                raise ValueError(f"los valores de {nombre} deben ser no decrecientes")
            if not creciente and any(b > a for a, b in pares):
                raise ValueError(f"los valores de {nombre} deben ser no crecientes")
        return self


class ConfigPerceptron(_Modelo):
    alfa: int = Field(default=1, ge=1)
    ventana_f2: int = Field(default=8, ge=1)
    pesos_iniciales: List[int] = Field(default=[0, 0, 0, 0, 0], min_length=5, max_length=5)
    capacidad_aceptacion: int = Field(default=256, ge=1)
    capacidad_denegacion: int = Field(default=32, ge=1)
    tabla_cuantizacion: TablaCuantizacion = TablaCuantizacion()

    @field_validator("pesos_iniciales")
    @classmethod
    def _validar_pesos(cls, pesos: List[int]) -> List[int]:
        if any(not PESO_MINIMO <= p <= PESO_MAXIMO for p in pesos):
            raise ValueError(f"los pesos deben estar en [{PESO_MINIMO}, {PESO_MAXIMO}]")
        return pesos


class ConfigJerarquia(_Modelo):
    l1: GeometriaCache = GEOMETRIA_L1_DEFECTO
    l2: GeometriaCache = GEOMETRIA_L2_DEFECTO
    l3: Optional[GeometriaCache] = None
    latencia_memoria_ciclos: int = Field(default=200, gt=0)
    nivel_prefetch: int = Field(default=1, ge=0)

    @property
    def niveles(self) -> List[GeometriaCache]:
        return [g for g in (self.l1, self.l2, self.l3) if g is not None]

    @property
    def bytes_linea(self) -> int:
        return self.l1.bytes_linea

    @model_validator(mode="after")
    def _validar_niveles(self) -> "ConfigJerarquia":
        niveles = self.niveles
        if len({g.bytes_linea for g in niveles}) != 1:
            raise ValueError("todos los niveles deben compartir el tamaño de línea")
        if self.nivel_prefetch >= len(niveles):
            raise ValueError(f"nivel_prefetch={self.nivel_prefetch} no existe en la jerarquía")
        return self


class ConfiguracionMotor(_Modelo):
    prefetcher: TipoPrefetcher = TipoPrefetcher.STRIDE_PERCEPTRON
    capacidad_ghb: int = Field(default=512, ge=1)
    stride: ConfigStride = ConfigStride()
    markov: ConfigMarkov = ConfigMarkov()
    perceptron: ConfigPerceptron = ConfigPerceptron()
    jerarquia: ConfigJerarquia = ConfigJerarquia()
    ventana_aceptacion: int = Field(default=256, gt=0, le=DURACION_MAXIMA)
    ventana_denegacion: int = Field(default=32, gt=0, le=DURACION_MAXIMA)

    @model_validator(mode="after")
    def _validar_ghb(self) -> "ConfiguracionMotor":
        if self.capacidad_ghb < self.stride.longitud_confirmacion:
            raise ValueError("capacidad_ghb debe ser >= stride.longitud_confirmacion")
        return self

    def con_prefetcher(self, prefetcher: Union[TipoPrefetcher, str]) -> "ConfiguracionMotor":
        return self.model_copy(update={"prefetcher": TipoPrefetcher(prefetcher)})

    def clave_canonica(self) -> str:
        return self.model_dump_json()


class ConfiguracionSimulacion(_Modelo):
    motor: ConfiguracionMotor = ConfiguracionMotor()
    traza: Optional[EspecificacionTraza] = None

    @field_validator("traza", mode="before")
    @classmethod
    def _aceptar_generador_suelto(cls, valor: Any) -> Any:
        if isinstance(valor, dict) and "tipo" in valor:
            return {"generador": valor}
        return valor


def _formatear_errores(error: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in error.errors()]


def configuracion_desde_dict(datos: Dict[str, Any]) -> ConfiguracionSimulacion:
    """
    Valida un diccionario como configuración completa.

    Raises:
        EspecificacionInvalida: Si sólo falla la sección `traza`.
        ConfiguracionInvalida: Para cualquier otro error de validación.
    """
    if not isinstance(datos, dict):
        raise ConfiguracionInvalida("La configuración debe ser un objeto JSON")
    try:
        return ConfiguracionSimulacion.model_validate(datos)
    except ValidationError as e:
        detalles = _formatear_errores(e)
        if all(err["loc"] and err["loc"][0] == "traza" for err in e.errors()):
            raise EspecificacionInvalida(f"Especificación de traza inválida: {'; '.join(detalles)}", detalles) from e
        raise ConfiguracionInvalida(f"Configuración inválida: {'; '.join(detalles)}", detalles) from e


def cargar_configuracion(ruta: Optional[Union[str, Path]] = None) -> ConfiguracionSimulacion:
    """
    Carga la configuración desde un archivo JSON.

    Args:
        ruta: Archivo de configuración. None devuelve los valores por defecto.

    Returns:
        ConfiguracionSimulacion: Configuración validada.

    Raises:
        ConfiguracionInvalida: Si el archivo no existe, no es JSON o no valida.
    """
    if ruta is None:
        return ConfiguracionSimulacion()
    ruta = Path(ruta)
    try:
        texto = ruta.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfiguracionInvalida(f"No se pudo leer la configuración {ruta}: {e}") from e
    if not texto.strip():
        return ConfiguracionSimulacion()
    try:
        datos = json.loads(texto)
    except json.JSONDecodeError as e:
        raise ConfiguracionInvalida(f"{ruta} no es JSON válido: {e}") from e
    return configuracion_desde_dict(datos)


def cargar_especificacion_traza(ruta: Union[str, Path]) -> EspecificacionTraza:
    """
    Lee la especificación de traza de un archivo: la sección `traza` de una
    configuración completa o un objeto de especificación suelto.
    """
    ruta = Path(ruta)
    try:
        datos = json.loads(ruta.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfiguracionInvalida(f"No se pudo leer {ruta}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfiguracionInvalida(f"{ruta} no es JSON válido: {e}") from e
    if isinstance(datos, dict) and ("traza" in datos or "motor" in datos):
        config = configuracion_desde_dict(datos)
        if config.traza is None:
            raise EspecificacionInvalida(f"{ruta} no contiene una sección 'traza'")
        return config.traza
    return validar_especificacion(datos)


def obtener_hilos_comparacion() -> int:
    """Número de procesos para `comparar` (SIMPREFETCH_HILOS); 1 ejecuta en serie."""
    valor = os.getenv("SIMPREFETCH_HILOS")
    if valor is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(valor))
    except ValueError:
        raise ConfiguracionInvalida(f"SIMPREFETCH_HILOS debe ser un entero, no {valor!r}")
