from typing import List, Optional, Sequence

from src.configuracion import ConfiguracionMotor, TipoPrefetcher
from src.motor import MotorSimulacion
from src.perceptron import RegistroEntrenamiento
from src.utils.sistema_logging import (
    ConfiguradorLogging,
    ManejadorErrores,
    registrar_operacion,
)


class FabricaVariantes:
    """
    Patrón Factory para crear configuraciones y motores de cada variante.

    Centraliza la traducción de los nombres cortos de variante (S, SP, M,
    MP) a configuraciones completas, partiendo de una configuración base
    común para que todas compartan geometrías y parámetros.
    """

    # Registro de variantes disponibles
    _tipos_variante = {
        'ninguno': TipoPrefetcher.NINGUNO,
        'S': TipoPrefetcher.STRIDE,
        'SP': TipoPrefetcher.STRIDE_PERCEPTRON,
        'M': TipoPrefetcher.MARKOV,
        'MP': TipoPrefetcher.MARKOV_PERCEPTRON,
    }

    def __init__(self, base: Optional[ConfiguracionMotor] = None):
        """Inicializa la fábrica con una configuración base y logging."""
        self.base = base or ConfiguracionMotor()
        self.logger = ConfiguradorLogging.obtener_logger("FabricaVariantes")
        self.manejador_errores = ManejadorErrores("FabricaVariantes")
        self.contador_motores_creados = 0
        self.logger.debug(f"Variantes soportadas: {list(self._tipos_variante.keys())}")

    @classmethod
    def variantes_soportadas(cls) -> List[str]:
        return list(cls._tipos_variante.keys())

    def crear_configuracion(self, variante: str) -> ConfiguracionMotor:
        """
        Crea la configuración de una variante a partir de la base.

        Args:
            variante (str): 'ninguno', 'S', 'SP', 'M' o 'MP'.

        Returns:
            ConfiguracionMotor: Copia de la base con el prebuscador indicado.

        Raises:
            ValueError: Si la variante no es válida.
        """
        if variante not in self._tipos_variante:
            error_msg = f"Variante '{variante}' no soportada. Variantes disponibles: {self.variantes_soportadas()}"
            self.manejador_errores.manejar_error_validacion("variante", variante, "variante registrada")
            raise ValueError(error_msg)
        return self.base.con_prefetcher(self._tipos_variante[variante])

    def crear_motor(
        self,
        variante: str,
        registrar_latencias: bool = False,
        registrar_eventos: bool = False,
        registro_entrenamiento: Optional[RegistroEntrenamiento] = None,
    ) -> MotorSimulacion:
        motor = MotorSimulacion(
            self.crear_configuracion(variante),
            registrar_latencias=registrar_latencias,
            registrar_eventos=registrar_eventos,
            registro_entrenamiento=registro_entrenamiento,
        )
        self.contador_motores_creados += 1
        self.logger.debug(f"Motor {variante} creado (total: {self.contador_motores_creados})")
        return motor

    @registrar_operacion("creación múltiple de configuraciones")
    def crear_multiples(self, variantes: Sequence[str]) -> List[ConfiguracionMotor]:
        configuraciones = []
        errores = []
        for variante in variantes:
            try:
                configuraciones.append(self.crear_configuracion(variante))
            except ValueError as e:
                errores.append(str(e))
        if errores:
            self.logger.warning(f"Se omitieron {len(errores)} variantes inválidas")
        return configuraciones
