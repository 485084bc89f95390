"""
Línea de comandos del simulador de prebúsqueda.

    python -m src.cli generar configuraciones/estride.json traza.txt.gz
    python -m src.cli ejecutar traza.txt.gz --config configuraciones/defecto.json --json
    python -m src.cli comparar traza.txt.gz --formato markdown
    python -m src.cli sobrecarga

Códigos de salida: 0 éxito, 2 configuración o especificación inválida,
3 error de traza (archivo inexistente, línea malformada, valor fuera de rango,
UTF-8 inválido o gzip truncado).
"""
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

import click
import pandas as pd
from rich.console import Console
from rich.table import Table

from src.configuracion import (
    ConfiguracionMotor,
    ConfiguracionSimulacion,
    cargar_configuracion,
    cargar_especificacion_traza,
    obtener_hilos_comparacion,
)
from src.excepciones import ConfiguracionInvalida, EspecificacionInvalida, ErrorTraza
from src.metricas import (
    ORDEN_VARIANTES,
    a_csv,
    a_json,
    a_markdown,
    tabla_deltas,
    tabla_metricas,
    tabla_sobrecarga,
    tasa_aciertos,
)
from src.modelos.reporte import VERSION_ESQUEMA, ReporteEjecucion
from src.motor import MotorSimulacion
from src.perceptron import RegistroEntrenamiento
from src.traza import escribir_traza, iterar_traza, leer_traza
from src.utils.cache_resultados import GestorCacheResultados, huella_archivo
from src.utils.fabrica_variantes import FabricaVariantes
from src.utils.sistema_logging import (
    ConfiguradorLogging,
    ManejadorErrores,
    RegistradorEstadisticas,
    log_fin_aplicacion,
    log_inicio_aplicacion,
)

SALIDA_EXITO = 0
SALIDA_CONFIGURACION = 2
SALIDA_TRAZA = 3

logger = ConfiguradorLogging.obtener_logger("CLI")
manejador_errores = ManejadorErrores("CLI")


def _abortar_configuracion(error: Exception):
    manejador_errores.manejar_error_configuracion(error)
    click.echo(f"Error de configuración: {error}", err=True)
    sys.exit(SALIDA_CONFIGURACION)


def _abortar_traza(error: Exception, ruta: Optional[str] = None):
    manejador_errores.manejar_error_traza(error, ruta)
    click.echo(f"Error de traza: {error}", err=True)
    sys.exit(SALIDA_TRAZA)


def _cargar(config: Optional[str]) -> ConfiguracionSimulacion:
    try:
        return cargar_configuracion(config)
    except (ConfiguracionInvalida, EspecificacionInvalida) as e:
        _abortar_configuracion(e)


def _simular(config_motor: ConfiguracionMotor, ruta_traza: str) -> ReporteEjecucion:
    """Ejecuta una variante con el cache de resultados delante, si está habilitado."""
    gestor = GestorCacheResultados()
    huella = huella_archivo(ruta_traza) if gestor.cache_habilitado else None
    if huella is not None:
        cacheado = gestor.obtener(config_motor, huella)
        if cacheado is not None:
            logger.info(f"Reporte {config_motor.prefetcher.value} servido desde cache")
            return cacheado
    reporte = MotorSimulacion(config_motor).ejecutar(leer_traza(ruta_traza))
    if huella is not None:
        gestor.guardar(config_motor, huella, reporte)
    return reporte


def _simular_variante(config_motor: ConfiguracionMotor, ruta_traza: str) -> Dict:
    """Punto de entrada de cada proceso de `comparar`; devuelve el reporte como dict."""
    return _simular(config_motor, ruta_traza).a_dict()


def _emitir(texto: str, salida: Optional[str]):
    if salida is None:
        click.echo(texto, nl=False)
    else:
        Path(salida).write_text(texto, encoding="utf-8")
        logger.info(f"Salida escrita en {salida}")


def _tabla_rich(tabla: pd.DataFrame, titulo: str) -> Table:
    resultado = Table(title=titulo, show_lines=False)
    for columna in tabla.columns:
        resultado.add_column(str(columna), justify="left" if columna in ("variante", "comparacion") else "right")
    for fila in tabla.itertuples(index=False):
        resultado.add_row(*(_celda_rich(v) for v in fila))
    return resultado


def _celda_rich(valor) -> str:
    if valor is None or (isinstance(valor, float) and pd.isna(valor)):
        return "n/d"
    if isinstance(valor, float):
        return f"{valor:.4f}"
    return str(valor)


def _resumen_reporte(reporte: ReporteEjecucion) -> Table:
    resumen = Table(title=f"Simulación - variante {reporte.variante}", show_header=False)
    resumen.add_column("métrica")
    resumen.add_column("valor", justify="right")
    resumen.add_row("accesos de demanda", str(reporte.accesos_demanda))
    resumen.add_row("disparos", str(reporte.disparos))
    resumen.add_row("sugerencias emitidas", str(reporte.sugerencias_emitidas))
    resumen.add_row("sugerencias aceptadas", str(reporte.sugerencias_aceptadas))
    resumen.add_row("sugerencias denegadas", str(reporte.sugerencias_denegadas))
    resumen.add_row("rellenos por prebúsqueda", str(reporte.rellenos_prebusqueda))
    resumen.add_row("prebúsquedas correctas", str(reporte.prebusquedas_correctas))
    resumen.add_row("prebúsquedas erróneas", str(reporte.prebusquedas_erroneas))
    for indice, nivel in enumerate(reporte.niveles):
        try:
            tasa = f"{tasa_aciertos(reporte, indice):.4f}"
        except ValueError:
            tasa = "n/d"
        resumen.add_row(f"tasa de aciertos {nivel.nombre}", tasa)
    resumen.add_row("AMAT (ciclos)", "n/d" if reporte.amat is None else f"{float(reporte.amat):.4f}")
    resumen.add_row("pesos finales", str(reporte.pesos_finales))
    return resumen


@click.group()
@click.version_option("1.0.0", prog_name="simprefetch")
def simprefetch():
    """Simulador de caché con prebuscadores GHB y filtro por perceptrón."""


@simprefetch.command()
@click.argument("especificacion", type=click.Path(dir_okay=False))
@click.argument("salida", type=click.Path(dir_okay=False))
def generar(especificacion: str, salida: str):
    """Genera una traza sintética a partir de ESPECIFICACION y la escribe en SALIDA."""
    log_inicio_aplicacion("generar")
    try:
        spec = cargar_especificacion_traza(especificacion)
    except (ConfiguracionInvalida, EspecificacionInvalida) as e:
        _abortar_configuracion(e)
    try:
        cantidad = escribir_traza(iterar_traza(spec), salida)
    except EspecificacionInvalida as e:
        _abortar_configuracion(e)
    except OSError as e:
        _abortar_traza(e, salida)
    click.echo(f"{cantidad} registros escritos en {salida}", err=True)
    log_fin_aplicacion()


@simprefetch.command()
@click.argument("traza", type=click.Path(dir_okay=False))
@click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
              help="Archivo JSON de configuración (por defecto, constantes de referencia).")
@click.option("--variante", type=click.Choice(FabricaVariantes.variantes_soportadas()), default=None,
              help="Sustituye el prebuscador de la configuración.")
@click.option("--json", "formato", flag_value="json", help="Reporte JSON versionado en stdout.")
@click.option("--csv", "formato", flag_value="csv", help="Reporte en una fila CSV.")
@click.option("--salida", type=click.Path(dir_okay=False), default=None, help="Escribe el reporte en un archivo.")
@click.option("--debug-perceptron", "debug_perceptron", type=click.Path(dir_okay=False), default=None,
              help="CSV con una fila por resolución de las tablas y los pesos tras aplicarla.")
@click.option("--latencias", type=click.Path(dir_okay=False), default=None,
              help="CSV con la latencia de cada acceso de demanda.")
@click.option("--incluir-tiempo", is_flag=True, default=False, help="Añade el tiempo de pared al JSON.")
def ejecutar(
    traza: str,
    config: Optional[str],
    variante: Optional[str],
    formato: Optional[str],
    salida: Optional[str],
    debug_perceptron: Optional[str],
    latencias: Optional[str],
    incluir_tiempo: bool,
):
    """Simula TRAZA con una variante y emite su reporte."""
    log_inicio_aplicacion("ejecutar")
    configuracion = _cargar(config)
    motor_config = configuracion.motor
    if variante is not None:
        motor_config = FabricaVariantes(motor_config).crear_configuracion(variante)

    try:
        if debug_perceptron is None and latencias is None:
            reporte = _simular(motor_config, traza)
        else:
            registro = RegistroEntrenamiento() if debug_perceptron else None
            motor = FabricaVariantes(motor_config).crear_motor(
                motor_config.prefetcher.value,
                registrar_latencias=latencias is not None,
                registro_entrenamiento=registro,
            )
            reporte = motor.ejecutar(leer_traza(traza))
            if registro is not None:
                registro.escribir_csv(debug_perceptron)
            if latencias is not None:
                motor.jerarquia.escribir_registro_latencias(latencias)
    except (ErrorTraza, OSError) as e:
        _abortar_traza(e, traza)

    RegistradorEstadisticas().registrar_resumen_ejecucion(reporte)
    if formato == "json":
        _emitir(reporte.a_json(incluir_tiempo), salida)
    elif formato == "csv":
        fila = reporte.a_fila()
        if incluir_tiempo:
            fila["tiempo_pared_s"] = reporte.tiempo_pared_s
        _emitir(a_csv(pd.DataFrame([fila])), salida)
    elif salida is not None:
        _emitir(reporte.a_json(incluir_tiempo), salida)
    else:
        Console().print(_resumen_reporte(reporte))
    log_fin_aplicacion()


def _ejecutar_variantes(motor_config: ConfiguracionMotor, traza: str) -> List[ReporteEjecucion]:
    fabrica = FabricaVariantes(motor_config)
    configuraciones = fabrica.crear_multiples(ORDEN_VARIANTES)
    hilos = obtener_hilos_comparacion()
    if hilos == 1:
        return [_simular(c, traza) for c in configuraciones]
    with ProcessPoolExecutor(max_workers=min(hilos, len(configuraciones))) as ejecutor:
        futuros = [ejecutor.submit(_simular_variante, c, traza) for c in configuraciones]
        return [ReporteEjecucion.desde_dict(f.result()) for f in futuros]


@simprefetch.command()
@click.argument("traza", type=click.Path(dir_okay=False))
@click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
              help="Archivo JSON de configuración compartido por las cuatro variantes.")
@click.option("--formato", type=click.Choice(["tabla", "markdown", "csv", "json"]), default="tabla",
              show_default=True)
def comparar(traza: str, config: Optional[str], formato: str):
    """Ejecuta S, SP, M y MP sobre TRAZA y emite métricas y diferencias."""
    log_inicio_aplicacion("comparar")
    configuracion = _cargar(config)
    try:
        hilos = obtener_hilos_comparacion()
    except ConfiguracionInvalida as e:
        _abortar_configuracion(e)
    logger.info(f"Comparando {ORDEN_VARIANTES} con {hilos} proceso(s)")
    try:
        reportes = _ejecutar_variantes(configuracion.motor, traza)
    except (ErrorTraza, OSError) as e:
        _abortar_traza(e, traza)

    metricas = tabla_metricas(reportes)
    deltas = tabla_deltas(reportes)
    if formato == "tabla":
        consola = Console()
        consola.print(_tabla_rich(metricas, "Métricas por variante"))
        consola.print(_tabla_rich(deltas, "Diferencias frente a la base"))
    elif formato == "markdown":
        click.echo(a_markdown(metricas) + "\n" + a_markdown(deltas), nl=False)
    elif formato == "csv":
        click.echo(a_csv(metricas) + "\n" + a_csv(deltas), nl=False)
    else:
        documento = {
            "version_esquema": VERSION_ESQUEMA,
            "metricas": json.loads(a_json(metricas)),
            "deltas": json.loads(a_json(deltas)),
        }
        click.echo(json.dumps(documento, indent=2, ensure_ascii=False))
    log_fin_aplicacion()


@simprefetch.command()
@click.option("--config", "config", type=click.Path(dir_okay=False), default=None)
@click.option("--formato", type=click.Choice(["tabla", "markdown", "csv", "json"]), default="tabla",
              show_default=True)
def sobrecarga(config: Optional[str], formato: str):
    """Bits de almacenamiento que requiere cada variante."""
    configuracion = _cargar(config)
    fabrica = FabricaVariantes(configuracion.motor)
    tabla = tabla_sobrecarga(fabrica.crear_multiples(ORDEN_VARIANTES)).fillna(0)
    columnas_bits = [c for c in tabla.columns if c.endswith("_bits")]
    tabla[columnas_bits] = tabla[columnas_bits].astype(int)
    if formato == "tabla":
        Console().print(_tabla_rich(tabla, "Sobrecarga de almacenamiento"))
    elif formato == "markdown":
        click.echo(a_markdown(tabla), nl=False)
    elif formato == "csv":
        click.echo(a_csv(tabla), nl=False)
    else:
        click.echo(a_json(tabla), nl=False)


if __name__ == "__main__":
    simprefetch()
