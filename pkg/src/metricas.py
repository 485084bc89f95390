"""
Métricas de comparación calculadas exclusivamente a partir de ReporteEjecucion,
más los emisores de tablas (CSV, JSON, Markdown).
"""
import json
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.configuracion import ConfiguracionMotor, TipoPrefetcher
from src.excepciones import SinRellenos, SuiteVacia
from src.modelos.reporte import ReporteEjecucion

BITS_BLOQUE = 45
BITS_ENLACE = 9
BITS_CARACTERISTICAS = 32
BITS_DURACION = 8
BITS_PESO = 8
BITS_INDICE_MARKOV = 1024 * 8

ORDEN_VARIANTES = ["S", "SP", "M", "MP"]
PARES_COMPARACION = [("S", "SP"), ("M", "MP")]


# --- Tasas por ejecución ---

def tasa_prebusqueda_correcta(reporte: ReporteEjecucion) -> float:
    if reporte.rellenos_prebusqueda == 0:
        raise SinRellenos(f"La variante {reporte.variante} no realizó rellenos")
    return reporte.prebusquedas_correctas / reporte.rellenos_prebusqueda


def tasa_error_prebusqueda(reporte: ReporteEjecucion) -> float:
    if reporte.rellenos_prebusqueda == 0:
        raise SinRellenos(f"La variante {reporte.variante} no realizó rellenos")
    return reporte.prebusquedas_erroneas / reporte.rellenos_prebusqueda


def tasa_denegacion(reporte: ReporteEjecucion) -> float:
    if reporte.sugerencias_emitidas == 0:
        raise ValueError(f"La variante {reporte.variante} no emitió sugerencias")
    return reporte.sugerencias_denegadas / reporte.sugerencias_emitidas


def tasa_aceptacion(reporte: ReporteEjecucion) -> float:
    if reporte.sugerencias_emitidas == 0:
        raise ValueError(f"La variante {reporte.variante} no emitió sugerencias")
    return reporte.sugerencias_aceptadas / reporte.sugerencias_emitidas


def disminucion_sugerencias(base: ReporteEjecucion, variante: ReporteEjecucion) -> float:
    """
    (aceptadas_base − aceptadas_variante) / aceptadas_base; puede ser negativa.

    Cuenta las sugerencias que llegan a emitirse como petición de
    prebúsqueda: la base sin filtro acepta todo lo que sugiere, la variante
    sólo lo que el perceptrón deja pasar.
    """
    if base.sugerencias_aceptadas == 0:
        raise ValueError(f"La variante base {base.variante} no emitió peticiones de prebúsqueda")
    return (base.sugerencias_aceptadas - variante.sugerencias_aceptadas) / base.sugerencias_aceptadas


def disminucion_rellenos(base: ReporteEjecucion, variante: ReporteEjecucion) -> float:
    if base.rellenos_prebusqueda == 0:
        raise SinRellenos(f"La variante base {base.variante} no realizó rellenos")
    return (base.rellenos_prebusqueda - variante.rellenos_prebusqueda) / base.rellenos_prebusqueda


def tasa_aciertos(reporte: ReporteEjecucion, nivel: Optional[int] = None) -> float:
    """Aciertos de demanda / accesos de demanda; por defecto en el nivel del prebuscador."""
    stats = reporte.nivel(reporte.nivel_prefetch if nivel is None else nivel)
    if stats.accesos_demanda == 0:
        raise ValueError(f"El nivel {stats.nombre} no recibió accesos de demanda")
    return stats.aciertos_demanda / stats.accesos_demanda


def _o_ausente(funcion, *args) -> Optional[float]:
    try:
        return funcion(*args)
    except ValueError:
        return None


# --- Agregados sobre suites ---

def media_aritmetica(valores: Iterable[float]) -> float:
    datos = np.asarray(list(valores), dtype=np.float64)
    if datos.size == 0:
        raise SuiteVacia("No hay valores que promediar")
    return float(datos.mean())


def media_geometrica(valores: Iterable[float]) -> float:
    datos = np.asarray(list(valores), dtype=np.float64)
    if datos.size == 0:
        raise SuiteVacia("No hay valores que promediar")
    if np.any(datos <= 0):
        raise ValueError("La media geométrica requiere valores positivos")
    return float(np.exp(np.log(datos).mean()))


def disminucion_media_geometrica(pares: Sequence[Tuple[ReporteEjecucion, ReporteEjecucion]]) -> float:
    """1 − media geométrica de aceptadas_variante / aceptadas_base sobre una suite."""
    if not pares:
        raise SuiteVacia("No hay pares de ejecuciones")
    cocientes = []
    for base, variante in pares:
        if base.sugerencias_aceptadas == 0:
            raise ValueError(f"La variante base {base.variante} no emitió peticiones de prebúsqueda")
        cocientes.append(variante.sugerencias_aceptadas / base.sugerencias_aceptadas)
    return 1.0 - media_geometrica(cocientes)


def resumen_suite(reportes_por_benchmark: Mapping[str, Mapping[str, ReporteEjecucion]]) -> Dict[str, Dict[str, Optional[float]]]:
    """
    Agrega una suite de benchmarks por par de comparación.

    Las diferencias de tasas se promedian aritméticamente y las reducciones
    de peticiones con media geométrica de los cocientes.
    """
    if not reportes_por_benchmark:
        raise SuiteVacia("La suite no contiene benchmarks")
    resumen: Dict[str, Dict[str, Optional[float]]] = {}
    for nombre_base, nombre_variante in PARES_COMPARACION:
        pares = [
            (reportes[nombre_base], reportes[nombre_variante])
            for reportes in reportes_por_benchmark.values()
            if nombre_base in reportes and nombre_variante in reportes
        ]
        if not pares:
            continue
        deltas = [_deltas_par(base, variante) for base, variante in pares]
        resumen[f"{nombre_variante}_vs_{nombre_base}"] = {
            clave: _media_de_presentes([d[clave] for d in deltas])
            for clave in deltas[0]
            if clave != "disminucion_sugerencias"
        }
        validos = [(b, v) for b, v in pares if b.sugerencias_aceptadas > 0 and v.sugerencias_aceptadas > 0]
        resumen[f"{nombre_variante}_vs_{nombre_base}"]["disminucion_sugerencias_geomedia"] = (
            disminucion_media_geometrica(validos) if validos else None
        )
    return resumen


def _media_de_presentes(valores: List[Optional[float]]) -> Optional[float]:
    presentes = [v for v in valores if v is not None]
    return media_aritmetica(presentes) if presentes else None


# --- Sobrecarga de almacenamiento ---

def sobrecarga_almacenamiento(config: ConfiguracionMotor) -> Dict[str, int]:
    """Bits de hardware que requiere la variante, desglosados por estructura."""
    tipo = config.prefetcher
    if tipo is TipoPrefetcher.NINGUNO:
        return {}
    bits = {"ghb": config.capacidad_ghb * (BITS_BLOQUE + BITS_ENLACE)}
    if tipo.es_markov:
        bits["indice_markov"] = BITS_INDICE_MARKOV
    if tipo.usa_perceptron:
        por_entrada = BITS_BLOQUE + BITS_CARACTERISTICAS + BITS_DURACION
        bits["tabla_aceptacion"] = config.perceptron.capacidad_aceptacion * por_entrada
        bits["tabla_denegacion"] = config.perceptron.capacidad_denegacion * por_entrada
        bits["pesos"] = 5 * BITS_PESO
    return bits


def kilobytes(bits: int) -> float:
    return bits / 8 / 1024


# --- Tablas ---

def _metricas_fila(reporte: ReporteEjecucion) -> Dict[str, Optional[float]]:
    return {
        "variante": reporte.variante,
        "disparos": reporte.disparos,
        "sugerencias_emitidas": reporte.sugerencias_emitidas,
        "sugerencias_aceptadas": reporte.sugerencias_aceptadas,
        "sugerencias_denegadas": reporte.sugerencias_denegadas,
        "rellenos_prebusqueda": reporte.rellenos_prebusqueda,
        "tasa_correcta": _o_ausente(tasa_prebusqueda_correcta, reporte),
        "tasa_error": _o_ausente(tasa_error_prebusqueda, reporte),
        "tasa_denegacion": _o_ausente(tasa_denegacion, reporte),
        "tasa_aciertos_l1": _o_ausente(tasa_aciertos, reporte, 0),
        "tasa_aciertos_prefetch": _o_ausente(tasa_aciertos, reporte),
        "amat": None if reporte.amat is None else float(reporte.amat),
        "sobrecarga_kb": kilobytes(sum(reporte.sobrecarga_bits.values())),
    }


def tabla_metricas(reportes: Sequence[ReporteEjecucion]) -> pd.DataFrame:
    """Una fila por variante con la familia completa de métricas."""
    return pd.DataFrame([_metricas_fila(r) for r in reportes])


def _diferencia(a: Optional[float], b: Optional[float]) -> Optional[float]:
    return None if a is None or b is None else a - b


def _deltas_par(base: ReporteEjecucion, variante: ReporteEjecucion) -> Dict[str, Optional[float]]:
    correcta_base = _o_ausente(tasa_prebusqueda_correcta, base)
    correcta_var = _o_ausente(tasa_prebusqueda_correcta, variante)
    error_base = _o_ausente(tasa_error_prebusqueda, base)
    error_var = _o_ausente(tasa_error_prebusqueda, variante)
    return {
        "aumento_tasa_correcta": _diferencia(correcta_var, correcta_base),
        "disminucion_tasa_error": _diferencia(error_base, error_var),
        "tasa_denegacion": _o_ausente(tasa_denegacion, variante),
        "disminucion_sugerencias": _o_ausente(disminucion_sugerencias, base, variante),
        "disminucion_rellenos": _o_ausente(disminucion_rellenos, base, variante),
        "delta_tasa_aciertos": _diferencia(
            _o_ausente(tasa_aciertos, variante), _o_ausente(tasa_aciertos, base)
        ),
    }


def tabla_deltas(reportes: Sequence[ReporteEjecucion]) -> pd.DataFrame:
    """Diferencias SP−S y MP−M para las variantes presentes."""
    por_variante = {r.variante: r for r in reportes}
    filas = []
    for nombre_base, nombre_variante in PARES_COMPARACION:
        if nombre_base in por_variante and nombre_variante in por_variante:
            fila = {"comparacion": f"{nombre_variante} vs {nombre_base}"}
            fila.update(_deltas_par(por_variante[nombre_base], por_variante[nombre_variante]))
            filas.append(fila)
    return pd.DataFrame(filas)


def tabla_sobrecarga(configuraciones: Sequence[ConfiguracionMotor]) -> pd.DataFrame:
    filas = []
    for config in configuraciones:
        bits = sobrecarga_almacenamiento(config)
        fila = {"variante": config.prefetcher.value}
        fila.update({f"{nombre}_bits": valor for nombre, valor in bits.items()})
        fila["total_kb"] = kilobytes(sum(bits.values()))
        filas.append(fila)
    return pd.DataFrame(filas)


# --- Emisores ---

def a_csv(tabla: pd.DataFrame) -> str:
    return tabla.to_csv(index=False)


def a_json(tabla: pd.DataFrame) -> str:
    registros = tabla.astype(object).where(pd.notna(tabla), None).to_dict(orient="records")
    return json.dumps(registros, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def _celda(valor) -> str:
    if valor is None or (isinstance(valor, float) and np.isnan(valor)):
        return "n/d"
    if isinstance(valor, float):
        return f"{valor:.4f}"
    return str(valor)


def a_markdown(tabla: pd.DataFrame) -> str:
    columnas = [str(c) for c in tabla.columns]
    lineas = [
        "| " + " | ".join(columnas) + " |",
        "|" + "|".join("---" for _ in columnas) + "|",
    ]
    for fila in tabla.itertuples(index=False):
        lineas.append("| " + " | ".join(_celda(v) for v in fila) + " |")
    return "\n".join(lineas) + "\n"
