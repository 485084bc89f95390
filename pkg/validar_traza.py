from pathlib import Path
import sys

from src.excepciones import ErrorTraza, TrazaIlegible
from src.traza import abrir_como_texto, lineas_legibles, parsear_linea

"""
Script de validación aislado para revisar el formato de los archivos de traza
antes de simularlos.

A diferencia del lector del simulador, que se detiene en la primera línea
inválida, este script recorre el archivo completo y reporta todos los
problemas. NO MODIFICA los archivos, solo genera un reporte en la consola.

Ejecución desde la terminal (en la raíz del proyecto):
python validar_traza.py trazas/mi_traza.txt.gz [otra_traza.txt ...]
Sin argumentos revisa todos los archivos de RUTA_BASE_TRAZAS.
"""

# --- Configuración ---

RUTA_BASE_TRAZAS = Path("trazas/")
PATRONES_TRAZA = ("*.txt", "*.txt.gz", "*.trace", "*.trace.gz")
MAXIMO_ERRORES_MOSTRADOS = 5


def validar_archivo(ruta: Path) -> dict:
    """
    Recorre una traza completa y acumula los errores de formato y de rango.

    Returns:
        dict: {'registros', 'escrituras', 'comentarios', 'errores': [str, ...]}
    """
    resultado = {'registros': 0, 'escrituras': 0, 'comentarios': 0, 'errores': []}

    try:
        flujo_binario = open(ruta, "rb")
    except OSError as e:
        resultado['errores'].append(f"Error Crítico: no se pudo abrir '{ruta}': {e}")
        return resultado

    with flujo_binario:
        try:
            for numero, linea in lineas_legibles(abrir_como_texto(flujo_binario)):
                try:
                    acceso = parsear_linea(linea, numero)
                except ErrorTraza as e:
                    resultado['errores'].append(f"Línea {numero}: {e}")
                    continue
                if acceso is None:
                    resultado['comentarios'] += 1
                    continue
                resultado['registros'] += 1
                if acceso.es_escritura:
                    resultado['escrituras'] += 1
        except (OSError, TrazaIlegible) as e:
            # gzip truncado o bytes no UTF-8: no se puede seguir leyendo
            resultado['errores'].append(f"Error Crítico: lectura interrumpida: {e}")

    return resultado


def archivos_a_validar(argumentos: list) -> list:
    if argumentos:
        return [Path(a) for a in argumentos]
    encontrados = []
    for patron in PATRONES_TRAZA:
        encontrados.extend(sorted(RUTA_BASE_TRAZAS.glob(patron)))
    return encontrados


def main(argumentos: list = None) -> int:
    """Función principal que ejecuta todas las validaciones. Devuelve el código de salida."""
    argumentos = sys.argv[1:] if argumentos is None else argumentos
    print("--- INICIANDO VALIDACIÓN DE TRAZAS ---")

    archivos = archivos_a_validar(argumentos)
    if not archivos:
        print(f"No se encontraron trazas en '{RUTA_BASE_TRAZAS}'.")
        return 0

    total_errores = 0
    for ruta in archivos:
        print(f"\n[+] Validando traza: {ruta}...")
        resultado = validar_archivo(ruta)
        errores = resultado['errores']

        if not errores:
            print(
                f"    └─ [✓] ¡Traza saludable! {resultado['registros']} registros "
                f"({resultado['escrituras']} escrituras, {resultado['comentarios']} líneas ignoradas)."
            )
        else:
            print(f"    └─ [✗] Se encontraron {len(errores)} problemas en {resultado['registros']} registros válidos:")
            total_errores += len(errores)
            for error in errores[:MAXIMO_ERRORES_MOSTRADOS]:
                print(f"        - {error}")
            if len(errores) > MAXIMO_ERRORES_MOSTRADOS:
                print("        - ... (y más errores)")

    print("\n--- VALIDACIÓN FINALIZADA ---")
    print(f"Se revisaron {len(archivos)} trazas.")
    if total_errores == 0:
        print("¡Excelente! Todas las trazas revisadas pasaron las validaciones.")
        return 0
    print(f"Se encontró un total de {total_errores} problemas en las trazas.")
    return 3


if __name__ == "__main__":
    sys.exit(main())
