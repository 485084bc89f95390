"""
Escenarios de extremo a extremo sobre trazas sintéticas: cada prueba fija
un patrón de acceso y comprueba el comportamiento esperado de las variantes.
"""
import pytest

from src.configuracion import ConfigJerarquia, ConfigMarkov, ConfiguracionMotor
from src.ghb import BufferHistorialGlobal, ModoIndice
from src.metricas import disminucion_sugerencias, tasa_aciertos, tasa_prebusqueda_correcta
from src.modelos.especificacion_traza import validar_especificacion
from src.modelos.geometria_cache import GeometriaCache
from src.motor import MotorSimulacion, ejecutar_simulacion
from src.prefetch_primer_nivel import sugerir_markov
from src.traza import generar_traza, iterar_traza

# orden de recorrido de la cadena; no es aritmético para que el stride no lo confirme
PERMUTACION = [0, 5, 1, 12, 3, 9, 14, 2, 7, 11, 4, 15, 8, 13, 6, 10]
SEPARACION_CONJUNTO = 32 * 1024


def _simular(variante, traza):
    return ejecutar_simulacion(ConfiguracionMotor().con_prefetcher(variante), traza)


def _matriz_permutada(p):
    n = len(PERMUTACION)
    matriz = [[0.0] * n for _ in range(n)]
    for k, estado in enumerate(PERMUTACION):
        matriz[estado][PERMUTACION[(k + 1) % n]] = p
        matriz[estado][PERMUTACION[(k + 2) % n]] = 1.0 - p
    return matriz


def _matriz_sucesor_siguiente(n, p):
    matriz = []
    for s in range(n):
        fila = [(1.0 - p) / (n - 1)] * n
        fila[(s + 1) % n] = p
        matriz.append(fila)
    return matriz


def _aceptacion_tras_calentamiento(variante, traza, disparos_calentamiento=10_000):
    """Simula la traza y devuelve (emitidas, aceptadas) posteriores al calentamiento, más el reporte."""
    motor = MotorSimulacion(ConfiguracionMotor().con_prefetcher(variante))
    instantanea = None
    for acceso in traza:
        motor.paso(acceso)
        if instantanea is None and motor.disparos >= disparos_calentamiento:
            instantanea = (motor.sugerencias_emitidas, motor.sugerencias_aceptadas)
    motor.finalizar()
    assert instantanea is not None, "la traza no alcanza los disparos de calentamiento"
    return (
        motor.sugerencias_emitidas - instantanea[0],
        motor.sugerencias_aceptadas - instantanea[1],
        motor.reporte(),
    )


class _MotorQueAnotaPrimeraSugerencia(MotorSimulacion):

    def __init__(self, config):
        super().__init__(config)
        self.primeras = []

    def _sugerir(self, bloque, pc):
        sugerencias = super()._sugerir(bloque, pc)
        self.primeras.append((bloque, sugerencias[0].bloque if sugerencias else None))
        return sugerencias


class TestPatronEstride:

    def setup_method(self):
        spec = validar_especificacion({"tipo": "estride", "inicio": 1 << 28, "paso_bytes": 256, "cantidad": 100_000})
        self.traza = generar_traza(spec)

    def test_stride_acierta_y_el_filtro_no_pierde_aciertos(self):
        s = _simular("S", self.traza)
        sp = _simular("SP", self.traza)
        assert tasa_prebusqueda_correcta(s) >= 0.95
        assert abs(tasa_aciertos(sp) - tasa_aciertos(s)) <= 0.02


class TestPatronAleatorio:

    def test_rafagas_cortas_el_filtro_deniega_y_rellena_menos(self):
        # ráfagas de 3 o 4 accesos: el stride se confirma en el tercero y casi todo lo que sugiere sobra
        spec = validar_especificacion({
            "tipo": "rafagas", "huella_bytes": 64 << 20, "paso_bytes": 256,
            "longitudes": [3, 4], "cantidad": 100_000, "semilla": 1,
        })
        traza = generar_traza(spec)

        emitidas, aceptadas, sp = _aceptacion_tras_calentamiento("SP", traza)
        assert emitidas > 0
        assert aceptadas / emitidas <= 0.4

        s = _simular("S", traza)
        assert s.rellenos_prebusqueda > 0
        assert sp.rellenos_prebusqueda <= 0.5 * s.rellenos_prebusqueda

    def test_markov_aprende_a_denegar_sucesores_inutiles(self):
        # 1024 ranuras de 32KB: todas caen en el mismo conjunto y se repiten dentro del GHB
        spec = validar_especificacion({
            "tipo": "uniforme", "huella_bytes": 1024 * SEPARACION_CONJUNTO,
            "alineacion_bytes": SEPARACION_CONJUNTO, "cantidad": 60_000, "semilla": 2,
        })
        traza = generar_traza(spec)

        emitidas, aceptadas, mp = _aceptacion_tras_calentamiento("MP", traza)
        assert emitidas > 0
        assert aceptadas / emitidas <= 0.4

        m = _simular("M", traza)
        assert m.rellenos_prebusqueda > 0
        assert mp.rellenos_prebusqueda <= 0.5 * m.rellenos_prebusqueda


class TestPatronMarkov:

    def test_sucesor_dominante_en_primer_lugar(self):
        estados = 16
        spec = validar_especificacion({
            "tipo": "markov",
            "estados": [i * 4096 for i in range(estados)],
            "matriz_transicion": _matriz_sucesor_siguiente(estados, 0.9),
            "cantidad": 3000,
            "semilla": 13,
        })
        ghb = BufferHistorialGlobal(512, ModoIndice.BLOQUE)
        aciertos = consultas = 0
        for posicion, acceso in enumerate(iterar_traza(spec)):
            bloque = acceso.direccion // 64
            ghb.insertar(bloque, acceso.pc)
            if posicion < 512:
                continue
            sugerencias = sugerir_markov(ghb, bloque, acceso.pc, ConfigMarkov())
            consultas += 1
            dominante = ((bloque // 64 + 1) % estados) * 64
            if sugerencias and sugerencias[0].bloque == dominante:
                aciertos += 1
        assert aciertos / consultas >= 0.85

    def test_sucesor_dominante_a_traves_del_motor(self):
        # caches de correspondencia directa: cada estado expulsa al anterior y todo acceso dispara
        config = ConfiguracionMotor(
            prefetcher="M",
            jerarquia=ConfigJerarquia(
                l1=GeometriaCache(nombre="L1D", tamano_bytes=4096, asociatividad=1, latencia_acierto_ciclos=4),
                l2=GeometriaCache(nombre="L2", tamano_bytes=32 * 1024, asociatividad=1, latencia_acierto_ciclos=6),
            ),
        )

        estados = 16
        spec = validar_especificacion({
            "tipo": "markov",
            "estados": [i * SEPARACION_CONJUNTO for i in range(estados)],
            "matriz_transicion": _matriz_sucesor_siguiente(estados, 0.9),
            "cantidad": 4000,
            "semilla": 13,
        })
        motor = _MotorQueAnotaPrimeraSugerencia(config)
        motor.ejecutar(iterar_traza(spec))

        bloques_por_estado = SEPARACION_CONJUNTO // 64
        consultas = motor.primeras[1000:]
        assert len(consultas) >= 2000
        aciertos = sum(
            1 for bloque, primera in consultas
            if primera == ((bloque // bloques_por_estado + 1) % estados) * bloques_por_estado
        )
        assert aciertos / len(consultas) >= 0.85


def _traza_mixta(semilla):
    cadena = 1 << 32
    return generar_traza(validar_especificacion({
        "generador": {
            "tipo": "intercalado",
            "granularidad": 32,
            "sub_especificaciones": [
                {"tipo": "estride", "inicio": 1 << 28, "paso_bytes": 128, "cantidad": 600},
                {"tipo": "rafagas", "base": 1 << 29, "huella_bytes": 64 << 20, "paso_bytes": 256,
                 "longitudes": [3], "cantidad": 600, "semilla": semilla},
                {"tipo": "markov", "estados": [cadena + i * SEPARACION_CONJUNTO for i in range(16)],
                 "matriz_transicion": _matriz_permutada(0.9), "cantidad": 6000, "semilla": 100 + semilla},
                # ruido en el conjunto vecino de la cadena
                {"tipo": "uniforme", "base": (2 << 32) + 64, "huella_bytes": 256 * SEPARACION_CONJUNTO,
                 "alineacion_bytes": SEPARACION_CONJUNTO, "cantidad": 6000, "semilla": 200 + semilla},
                {"tipo": "uniforme", "base": 1 << 30, "huella_bytes": 64 << 20, "cantidad": 12_000,
                 "semilla": 300 + semilla, "fraccion_escrituras": 0.25},
            ],
        },
        "politica_pc": "pc_por_flujo",
    }))


class TestPatronMixto:

    @pytest.mark.parametrize("semilla", [1, 2, 3, 4, 5])
    def test_filtro_reduce_peticiones_y_conserva_aciertos(self, semilla):
        traza = _traza_mixta(semilla)
        reportes = {v: _simular(v, traza) for v in ("S", "SP", "M", "MP")}

        for base, filtrada in (("S", "SP"), ("M", "MP")):
            assert reportes[base].sugerencias_emitidas > 0
            assert disminucion_sugerencias(reportes[base], reportes[filtrada]) > 0
            assert abs(tasa_aciertos(reportes[filtrada]) - tasa_aciertos(reportes[base])) <= 0.025
