"""
Motor de simulación: recorre la traza y aplica, por cada acceso, la ruta de
datos jerarquía → (fallo en el nivel del prebuscador) → GHB → sugerencias →
características → voto → relleno o registro de denegación → entrenamiento.
"""
import time
from dataclasses import replace
from typing import Iterable, List, Optional, Set

from src.configuracion import ConfiguracionMotor, TipoPrefetcher
from src.ghb import BufferHistorialGlobal, ModoIndice
from src.metricas import sobrecarga_almacenamiento
from src.modelos.acceso_memoria import AccesoMemoria, DireccionBloque
from src.modelos.reporte import ReporteEjecucion
from src.modelos.sugerencia import SugerenciaPrefetch
from src.perceptron import (
    AccesoDemanda,
    FalloCache,
    Perceptron,
    RegistroEntrenamiento,
    Resolucion,
    TablasDecision,
    cuantizar,
    extraer_caracteristicas,
)
from src.prefetch_primer_nivel import sugerir_markov, sugerir_stride
from src.traza import desplazamiento_linea
from src.utils.constructor_jerarquia import ConstructorJerarquia
from src.utils.sistema_logging import ConfiguradorLogging, RegistradorEstadisticas, registrar_operacion


class MotorSimulacion:
    """
    Estado completo de una simulación: jerarquía, GHB, perceptrón y tablas.

    Una instancia no se comparte entre hilos; para comparar variantes se crea
    un motor por variante.
    """

    def __init__(
        self,
        config: ConfiguracionMotor,
        registrar_latencias: bool = False,
        registrar_eventos: bool = False,
        registro_entrenamiento: Optional[RegistroEntrenamiento] = None,
    ):
        self.config = config
        self.tipo = config.prefetcher
        self.logger = ConfiguradorLogging.obtener_logger("MotorSimulacion")
        self.estadisticas_sistema = RegistradorEstadisticas()

        self.jerarquia = ConstructorJerarquia.desde_configuracion(
            config.jerarquia, registrar_latencias=registrar_latencias, registrar_eventos=registrar_eventos
        )
        self.nivel_prefetch = config.jerarquia.nivel_prefetch
        self._desplazamiento = desplazamiento_linea(config.jerarquia.bytes_linea)

        self.ghb: Optional[BufferHistorialGlobal] = None
        if self.tipo is not TipoPrefetcher.NINGUNO:
            modo = ModoIndice.PC if self.tipo.es_stride else ModoIndice.BLOQUE
            self.ghb = BufferHistorialGlobal(config.capacidad_ghb, modo)

        parametros = config.perceptron
        self.perceptron = Perceptron(parametros.pesos_iniciales, parametros.alfa)
        self.tablas = TablasDecision(
            capacidad_aceptacion=parametros.capacidad_aceptacion,
            capacidad_denegacion=parametros.capacidad_denegacion,
            ventana_aceptacion=config.ventana_aceptacion,
            ventana_denegacion=config.ventana_denegacion,
        )
        self.registro_entrenamiento = registro_entrenamiento

        self.accesos = 0
        self.disparos = 0
        self.sugerencias_emitidas = 0
        self.sugerencias_aceptadas = 0
        self.sugerencias_denegadas = 0
        self.finalizado = False
        self.tiempo_pared_s = 0.0

        self.logger.debug(f"Motor creado para la variante {self.tipo.value}")

    # --- Ruta de datos ---
    def paso(self, acceso: AccesoMemoria):
        """Procesa un registro de la traza."""
        bloque = acceso.direccion >> self._desplazamiento
        self.accesos += 1
        resultado = self.jerarquia.acceder_demanda(bloque, acceso.tipo)

        if resultado.nivel_servidor < self.nivel_prefetch:
            return
        self._resolver(self.tablas.avanzar(AccesoDemanda(bloque)))
        if resultado.nivel_servidor == self.nivel_prefetch:
            return

        self.disparos += 1
        self._resolver(self.tablas.avanzar(FalloCache(bloque)))
        if self.ghb is None:
            return

        self.ghb.insertar(bloque, acceso.pc)
        nivel = self.jerarquia.nivel(self.nivel_prefetch)
        aceptados_en_paso: Set[DireccionBloque] = set()
        for sugerencia in self._sugerir(bloque, acceso.pc):
            self.sugerencias_emitidas += 1
            x = cuantizar(
                extraer_caracteristicas(self.ghb, sugerencia, bloque, acceso.pc, self.config.perceptron.ventana_f2),
                self.config.perceptron.tabla_cuantizacion,
            )
            acepta = self.perceptron.decidir(x).acepta if self.tipo.usa_perceptron else True

            expulsada = self.tablas.registrar_decision(sugerencia.bloque, x, acepta)
            if expulsada is not None:
                self._resolver([expulsada])

            if not acepta:
                self.sugerencias_denegadas += 1
                continue
            self.sugerencias_aceptadas += 1
            if sugerencia.bloque not in aceptados_en_paso and not nivel.contiene(sugerencia.bloque):
                nivel.rellenar_prebusqueda(sugerencia.bloque)
            aceptados_en_paso.add(sugerencia.bloque)

    def _sugerir(self, bloque: DireccionBloque, pc: int) -> List[SugerenciaPrefetch]:
        if self.tipo.es_stride:
            return sugerir_stride(self.ghb, bloque, pc, self.config.stride, self.config.jerarquia.bytes_linea)
        return sugerir_markov(self.ghb, bloque, pc, self.config.markov)

    def _resolver(self, resoluciones: Iterable[Resolucion]):
        for resolucion in resoluciones:
            if self.tipo.usa_perceptron and resolucion.requiere_entrenamiento:
                self.perceptron.entrenar(resolucion.caracteristicas, resolucion.real, resolucion.deseado)
            if self.registro_entrenamiento is not None:
                self.registro_entrenamiento.registrar(self.accesos, resolucion, self.perceptron.pesos)

    # --- Ejecución completa ---
    def finalizar(self):
        """Vacía las tablas de decisión y cierra el censo de prebúsquedas sin uso."""
        if self.finalizado:
            return
        self._resolver(self.tablas.vaciar())
        self.jerarquia.cerrar_censo()
        self.finalizado = True

    @registrar_operacion("simulación de traza")
    def ejecutar(self, traza: Iterable[AccesoMemoria]) -> ReporteEjecucion:
        """
        Aplica `paso` a toda la traza, vacía las tablas y devuelve el reporte.

        Los errores de lectura de la traza se propagan sin capturar.
        """
        inicio = time.perf_counter()
        for acceso in traza:
            self.paso(acceso)
        self.finalizar()
        self.tiempo_pared_s = time.perf_counter() - inicio
        self.estadisticas_sistema.registrar_rendimiento_simulacion(
            self.tipo.value, self.accesos, self.tiempo_pared_s
        )
        self.estadisticas_sistema.registrar_uso_memoria_proceso()
        return self.reporte()

    def reporte(self) -> ReporteEjecucion:
        """Instantánea de los contadores; antes de `finalizar` puede haber decisiones pendientes."""
        niveles = [replace(stats) for stats in self.jerarquia.estadisticas()]
        observado = niveles[self.nivel_prefetch]
        amat = self.jerarquia.amat() if self.jerarquia.accesos_demanda else None
        return ReporteEjecucion(
            variante=self.tipo.value,
            niveles=niveles,
            nivel_prefetch=self.nivel_prefetch,
            disparos=self.disparos,
            sugerencias_emitidas=self.sugerencias_emitidas,
            sugerencias_aceptadas=self.sugerencias_aceptadas,
            sugerencias_denegadas=self.sugerencias_denegadas,
            rellenos_prebusqueda=observado.rellenos_prebusqueda,
            prebusquedas_correctas=observado.prebusquedas_utiles,
            prebusquedas_erroneas=observado.prebusquedas_inutiles + observado.prebusquedas_sin_uso_final,
            decisiones_registradas=self.tablas.total_registradas,
            decisiones_resueltas=self.tablas.total_resueltas,
            aceptaciones_correctas=self.tablas.aceptaciones_correctas,
            aceptaciones_erroneas=self.tablas.aceptaciones_erroneas,
            denegaciones_correctas=self.tablas.denegaciones_correctas,
            denegaciones_erroneas=self.tablas.denegaciones_erroneas,
            actualizaciones_pesos=self.perceptron.actualizaciones,
            accesos_demanda=self.jerarquia.accesos_demanda,
            latencia_total_ciclos=self.jerarquia.latencia_total_ciclos,
            amat=amat,
            pesos_finales=list(self.perceptron.pesos),
            claves_vivas_indice_ghb=self.ghb.claves_vivas if self.ghb is not None else 0,
            sobrecarga_bits=sobrecarga_almacenamiento(self.config),
            tiempo_pared_s=self.tiempo_pared_s,
        )


def ejecutar_simulacion(
    config: ConfiguracionMotor,
    traza: Iterable[AccesoMemoria],
    registro_entrenamiento: Optional[RegistroEntrenamiento] = None,
) -> ReporteEjecucion:
    """Crea un motor, simula la traza completa y devuelve su reporte."""
    motor = MotorSimulacion(config, registro_entrenamiento=registro_entrenamiento)
    return motor.ejecutar(traza)
