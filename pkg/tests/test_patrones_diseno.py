import logging

import pytest
from unittest.mock import patch

# Imports del proyecto
from src.configuracion import ConfiguracionMotor, TipoPrefetcher
from src.modelos.acceso_memoria import AccesoMemoria
from src.modelos.geometria_cache import GeometriaCache
from src.motor import MotorSimulacion, ejecutar_simulacion
from src.utils.cache_resultados import GestorCacheResultados, huella_archivo
from src.utils.constructor_jerarquia import ConstructorJerarquia
from src.utils.fabrica_variantes import FabricaVariantes
from src.utils.sistema_logging import NOMBRE_RAIZ, ConfiguradorLogging


class TestPatronSingleton:
    """
    Conjunto de pruebas para validar la correcta implementación
    del patrón Singleton en ConfiguradorLogging y GestorCacheResultados.
    """

    def test_singleton_logging_misma_instancia(self):
        """Verifica que múltiples instanciaciones retornen el mismo objeto."""
        configurador_1 = ConfiguradorLogging()
        configurador_2 = ConfiguradorLogging()
        assert configurador_1 is configurador_2

    def test_logger_bajo_la_raiz_del_proyecto(self):
        logger = ConfiguradorLogging.obtener_logger("Prueba")
        assert logger.name == f"{NOMBRE_RAIZ}.Prueba"
        assert logging.getLogger(NOMBRE_RAIZ).handlers

    def test_singleton_cache_misma_instancia(self):
        gestor_1 = GestorCacheResultados()
        gestor_2 = GestorCacheResultados()
        gestor_3 = GestorCacheResultados()

        assert gestor_1 is gestor_2
        assert gestor_2 is gestor_3
        assert id(gestor_1) == id(gestor_2) == id(gestor_3)

    def test_cache_deshabilitado_por_defecto(self):
        gestor = GestorCacheResultados()
        assert gestor.cache_habilitado is False
        assert gestor.obtener(ConfiguracionMotor(), "0" * 64) is None

    @patch.dict('os.environ', {'CACHE_RESULTADOS_HABILITADO': 'True'})
    def test_cache_guarda_y_recupera_reportes(self, tmp_path, monkeypatch):
        """Verifica que el singleton use las variables de entorno y sirva reportes repetidos."""
        monkeypatch.setenv('CACHE_RESULTADOS_DIRECTORIO', str(tmp_path / "cache"))
        GestorCacheResultados._instancia = None
        gestor = GestorCacheResultados()
        config = ConfiguracionMotor().con_prefetcher("S")
        reporte = ejecutar_simulacion(config, [AccesoMemoria(0x400000, 256 * i) for i in range(5)])

        gestor.guardar(config, "ab" * 32, reporte)
        recuperado = gestor.obtener(config, "ab" * 32)

        assert recuperado is not None
        assert recuperado.a_json() == reporte.a_json()
        assert gestor.obtener(config.con_prefetcher("M"), "ab" * 32) is None
        estadisticas = gestor.obtener_estadisticas_cache()
        assert estadisticas['hits_cache'] == 1
        assert estadisticas['archivos_en_disco'] == 1

        gestor.invalidar_cache()
        assert gestor.obtener_estadisticas_cache()['archivos_en_disco'] == 0

    def test_clave_depende_de_configuracion_y_traza(self):
        gestor = GestorCacheResultados()
        base = ConfiguracionMotor()
        assert gestor.generar_clave(base, "a") == gestor.generar_clave(ConfiguracionMotor(), "a")
        assert gestor.generar_clave(base, "a") != gestor.generar_clave(base, "b")
        assert len(gestor.generar_clave(base, "a")) == 16

    def test_huella_de_archivo(self, tmp_path):
        ruta = tmp_path / "traza.txt"
        ruta.write_text("400000 40 R\n")
        assert huella_archivo(ruta) == huella_archivo(ruta)
        assert len(huella_archivo(ruta)) == 64


class TestPatronFactory:
    """
    Conjunto de pruebas para validar la correcta implementación
    del patrón Factory en la clase FabricaVariantes.
    """

    def setup_method(self):
        """Este método se ejecuta antes de cada test en esta clase."""
        self.fabrica = FabricaVariantes()

    def test_fabrica_crear_configuracion(self):
        config = self.fabrica.crear_configuracion('MP')
        assert config.prefetcher is TipoPrefetcher.MARKOV_PERCEPTRON
        assert config.capacidad_ghb == self.fabrica.base.capacidad_ghb

    def test_fabrica_conserva_la_base(self):
        base = ConfiguracionMotor(capacidad_ghb=128)
        fabrica = FabricaVariantes(base)
        assert all(c.capacidad_ghb == 128 for c in fabrica.crear_multiples(['S', 'SP', 'M', 'MP']))

    def test_fabrica_crear_motor(self):
        motor = self.fabrica.crear_motor('S')
        assert isinstance(motor, MotorSimulacion)
        assert motor.tipo is TipoPrefetcher.STRIDE
        assert self.fabrica.contador_motores_creados == 1

    def test_fabrica_crear_multiples_omite_invalidas(self):
        configuraciones = self.fabrica.crear_multiples(['S', 'XYZ', 'M'])
        assert [c.prefetcher.value for c in configuraciones] == ['S', 'M']

    def test_fabrica_variantes_soportadas(self):
        assert FabricaVariantes.variantes_soportadas() == ['ninguno', 'S', 'SP', 'M', 'MP']

    def test_fabrica_tipo_variante_invalido(self):
        """Verifica manejo de errores para variantes no soportadas."""
        with pytest.raises(ValueError) as excinfo:
            self.fabrica.crear_configuracion('variante_inexistente')

        assert 'variante_inexistente' in str(excinfo.value)
        assert 'no soportada' in str(excinfo.value).lower()


class TestPatronBuilder:
    """
    Conjunto de pruebas para validar la correcta implementación
    del patrón Builder en la clase ConstructorJerarquia.
    """

    def test_constructor_jerarquia_basica(self):
        jerarquia = (ConstructorJerarquia()
                     .l1()
                     .l2()
                     .latencia_memoria(200)
                     .construir())
        assert [n.nombre for n in jerarquia.niveles] == ["L1D", "L2"]
        assert jerarquia.nivel(0).numero_conjuntos == 64
        assert jerarquia.nivel(1).numero_conjuntos == 512

    def test_constructor_con_l3(self):
        jerarquia = ConstructorJerarquia().l1().l2().l3().construir()
        assert jerarquia.numero_niveles == 3
        assert jerarquia.nivel(2).geometria.tamano_bytes == 8 * 1024 * 1024

    def test_constructor_reutilizable(self):
        constructor = ConstructorJerarquia()
        primera = constructor.l1().l2().construir()
        segunda = constructor.reiniciar().nivel("Unico", 4096, 4, 3).construir()
        assert primera.numero_niveles == 2
        assert segunda.numero_niveles == 1
        assert segunda.nivel(0).nombre == "Unico"

    def test_constructor_validacion(self):
        with pytest.raises(ValueError) as excinfo:
            ConstructorJerarquia().construir()
        assert "al menos un nivel" in str(excinfo.value)

        with pytest.raises(ValueError):
            ConstructorJerarquia().l1(bytes_linea=64).l2(bytes_linea=128).construir()

        with pytest.raises(ValueError):
            ConstructorJerarquia().l1().latencia_memoria(0).construir()

    def test_constructor_desde_configuracion(self):
        config = ConfiguracionMotor().jerarquia.model_copy(update={
            "l3": GeometriaCache(nombre="L3", tamano_bytes=1 << 20, asociatividad=16, latencia_acierto_ciclos=20),
            "latencia_memoria_ciclos": 300,
        })
        jerarquia = ConstructorJerarquia.desde_configuracion(config, registrar_latencias=True)
        assert jerarquia.numero_niveles == 3
        assert jerarquia.latencia_memoria == 300
        assert jerarquia.registro_latencias == []


class TestIntegracionPatrones:
    """
    Pruebas de integración que verifican que los patrones trabajen correctamente juntos.
    """

    def test_fabrica_y_constructor_comparten_geometria(self):
        motor = FabricaVariantes().crear_motor('SP')
        referencia = ConstructorJerarquia().l1().l2().construir()
        assert [n.geometria for n in motor.jerarquia.niveles] == [n.geometria for n in referencia.niveles]


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
