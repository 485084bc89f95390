"""
Contadores por nivel y reporte de una ejecución.

El reporte es la única interfaz entre el motor y las métricas: todo lo que
metricas.py calcula sale de aquí.
"""
import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Dict, List, Optional

VERSION_ESQUEMA = 1


@dataclass
class EstadisticasNivel:
    nombre: str
    accesos_demanda: int = 0
    aciertos_demanda: int = 0
    fallos_demanda: int = 0
    rellenos_prebusqueda: int = 0
    prebusquedas_utiles: int = 0
    prebusquedas_inutiles: int = 0
    prebusquedas_sin_uso_final: int = 0
    expulsiones: int = 0
    escrituras_retorno: int = 0

    @property
    def tasa_aciertos(self) -> Optional[float]:
        if self.accesos_demanda == 0:
            return None
        return self.aciertos_demanda / self.accesos_demanda


@dataclass
class ReporteEjecucion:
    """
    Resultado de simular una traza con una configuración.

    Todos los contadores son enteros salvo `amat` (racional exacto, None
    cuando no hubo accesos) y `tiempo_pared_s`, que no forma parte de la
    salida JSON por defecto para que dos ejecuciones sean idénticas byte a byte.
    """

    variante: str
    niveles: List[EstadisticasNivel] = field(default_factory=list)
    nivel_prefetch: int = 1
    disparos: int = 0
    sugerencias_emitidas: int = 0
    sugerencias_aceptadas: int = 0
    sugerencias_denegadas: int = 0
    rellenos_prebusqueda: int = 0
    prebusquedas_correctas: int = 0
    prebusquedas_erroneas: int = 0
    decisiones_registradas: int = 0
    decisiones_resueltas: int = 0
    aceptaciones_correctas: int = 0
    aceptaciones_erroneas: int = 0
    denegaciones_correctas: int = 0
    denegaciones_erroneas: int = 0
    actualizaciones_pesos: int = 0
    accesos_demanda: int = 0
    latencia_total_ciclos: int = 0
    amat: Optional[Fraction] = None
    pesos_finales: List[int] = field(default_factory=list)
    claves_vivas_indice_ghb: int = 0
    sobrecarga_bits: Dict[str, int] = field(default_factory=dict)
    tiempo_pared_s: float = 0.0

    def nivel(self, indice: int) -> EstadisticasNivel:
        return self.niveles[indice]

    def a_dict(self, incluir_tiempo: bool = False) -> Dict[str, Any]:
        datos: Dict[str, Any] = {"version_esquema": VERSION_ESQUEMA}
        for campo in fields(self):
            valor = getattr(self, campo.name)
            if campo.name == "niveles":
                valor = [asdict(n) for n in valor]
            elif campo.name == "amat":
                datos["amat_exacto"] = None if valor is None else f"{valor.numerator}/{valor.denominator}"
                valor = None if valor is None else float(valor)
            elif campo.name == "tiempo_pared_s" and not incluir_tiempo:
                continue
            datos[campo.name] = valor
        return datos

    def a_json(self, incluir_tiempo: bool = False) -> str:
        return json.dumps(self.a_dict(incluir_tiempo), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def a_fila(self) -> Dict[str, Any]:
        """Forma plana para CSV: un nivel por prefijo (l1_, l2_, ...)."""
        fila: Dict[str, Any] = {}
        for clave, valor in self.a_dict().items():
            if clave == "niveles":
                for indice, nivel in enumerate(valor, start=1):
                    for nombre, dato in nivel.items():
                        fila[f"l{indice}_{nombre}"] = dato
            elif clave == "pesos_finales":
                for indice, peso in enumerate(valor, start=1):
                    fila[f"w{indice}"] = peso
            elif clave == "sobrecarga_bits":
                for nombre, bits in valor.items():
                    fila[f"bits_{nombre}"] = bits
            else:
                fila[clave] = valor
        return fila

    @classmethod
    def desde_dict(cls, datos: Dict[str, Any]) -> "ReporteEjecucion":
        datos = dict(datos)
        version = datos.pop("version_esquema", VERSION_ESQUEMA)
        if version != VERSION_ESQUEMA:
            raise ValueError(f"Versión de esquema no soportada: {version}")
        exacto = datos.pop("amat_exacto", None)
        datos["amat"] = Fraction(exacto) if exacto is not None else None
        datos["niveles"] = [EstadisticasNivel(**n) for n in datos.get("niveles", [])]
        return cls(**datos)
