from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from src.excepciones import SinAccesos
from src.jerarquia_cache import JerarquiaCache, NivelCache, calcular_amat
from src.modelos.acceso_memoria import TipoAcceso
from src.modelos.geometria_cache import GeometriaCache
from src.utils.constructor_jerarquia import ConstructorJerarquia
from tests.oraculos import JerarquiaLru


def _geometria(tamano=1024, vias=2, latencia=4, nombre="T"):
    return GeometriaCache(nombre=nombre, tamano_bytes=tamano, bytes_linea=64, asociatividad=vias, latencia_acierto_ciclos=latencia)


class TestGeometria:

    def test_numero_de_conjuntos(self):
        assert _geometria(32 * 1024, 8).numero_conjuntos == 64

    @pytest.mark.parametrize("tamano,vias", [(3000, 2), (1024, 3), (64, 2)])
    def test_geometrias_invalidas(self, tamano, vias):
        with pytest.raises(ValidationError):
            _geometria(tamano, vias)


class TestNivelCache:

    def setup_method(self):
        # 2 conjuntos x 2 vías
        self.nivel = NivelCache(_geometria(256, 2), latencia_memoria=100)

    def test_fallo_y_acierto(self):
        primero = self.nivel.acceder(0)
        segundo = self.nivel.acceder(0)
        assert not primero.acierto and primero.latencia_ciclos == 104
        assert primero.nivel_servidor == 1
        assert segundo.acierto and segundo.latencia_ciclos == 4
        stats = self.nivel.estadisticas
        assert (stats.accesos_demanda, stats.aciertos_demanda, stats.fallos_demanda) == (2, 1, 1)

    def test_victima_lru(self):
        # Bloques 0, 2, 4 caen en el conjunto 0
        self.nivel.acceder(0)
        self.nivel.acceder(2)
        self.nivel.acceder(0)
        resultado = self.nivel.acceder(4)
        assert resultado.expulsado.bloque == 2
        assert self.nivel.contiene(0) and self.nivel.contiene(4) and not self.nivel.contiene(2)

    def test_asociatividad_respetada(self):
        for bloque in range(0, 40, 2):
            self.nivel.acceder(bloque)
        assert len(self.nivel.lineas_del_conjunto(0)) == 2
        assert len(self.nivel.lineas_del_conjunto(1)) == 0

    def test_escritura_marca_sucia_y_cuenta_retorno(self):
        self.nivel.acceder(0, TipoAcceso.ESCRITURA)
        self.nivel.acceder(2)
        resultado = self.nivel.acceder(4)
        assert resultado.expulsado.sucia
        assert self.nivel.estadisticas.escrituras_retorno == 1

    def test_relleno_no_toca_contadores_de_demanda(self):
        self.nivel.rellenar_prebusqueda(6)
        stats = self.nivel.estadisticas
        assert stats.accesos_demanda == 0 and stats.rellenos_prebusqueda == 1
        assert self.nivel.linea(6).prebuscada

    def test_relleno_de_bloque_residente_no_cuenta(self):
        self.nivel.acceder(6)
        resultado = self.nivel.rellenar_prebusqueda(6)
        assert resultado.acierto
        assert self.nivel.estadisticas.rellenos_prebusqueda == 0

    def test_prebusqueda_util_cuenta_una_vez(self):
        self.nivel.rellenar_prebusqueda(6)
        self.nivel.acceder(6)
        self.nivel.acceder(6)
        assert self.nivel.estadisticas.prebusquedas_utiles == 1

    def test_prebusqueda_expulsada_sin_uso(self):
        self.nivel.rellenar_prebusqueda(0)
        self.nivel.acceder(2)
        self.nivel.acceder(4)
        assert self.nivel.estadisticas.prebusquedas_inutiles == 1

    def test_relleno_insertado_como_mru(self):
        self.nivel.acceder(0)
        self.nivel.rellenar_prebusqueda(2)
        resultado = self.nivel.acceder(4)
        assert resultado.expulsado.bloque == 0

    def test_censo_final_idempotente(self):
        self.nivel.rellenar_prebusqueda(1)
        self.nivel.rellenar_prebusqueda(3)
        self.nivel.acceder(3)
        assert self.nivel.censo_prebusquedas_sin_uso() == 1
        assert self.nivel.cerrar_censo() == 1
        assert self.nivel.cerrar_censo() == 1
        assert self.nivel.estadisticas.prebusquedas_sin_uso_final == 1

    def test_eventos_registrados(self):
        nivel = NivelCache(_geometria(256, 2), registrar_eventos=True)
        nivel.rellenar_prebusqueda(0)
        nivel.acceder(0)
        nivel.rellenar_prebusqueda(2)
        nivel.cerrar_censo()
        assert nivel.eventos == [("relleno", 0), ("uso", 0), ("relleno", 2), ("vaciado_sin_uso", 2)]

    def test_cierre_cuenta_lo_mismo_que_el_censo(self):
        nivel = NivelCache(_geometria(256, 2), registrar_eventos=True)
        for bloque in (1, 3, 2):
            nivel.rellenar_prebusqueda(bloque)
        nivel.acceder(2)
        censo = nivel.censo_prebusquedas_sin_uso()
        assert censo == 2
        assert nivel.cerrar_censo() == censo
        assert sorted(b for evento, b in nivel.eventos if evento == "vaciado_sin_uso") == [1, 3]


class TestJerarquia:

    def test_latencia_acumulada_y_amat(self):
        jerarquia = ConstructorJerarquia().l1().l2().latencia_memoria(200).construir()
        assert jerarquia.acceder_demanda(0x40).latencia_ciclos == 210
        assert jerarquia.acceder_demanda(0x40).latencia_ciclos == 4
        assert jerarquia.amat() == Fraction(214, 2)

    def test_l2_recibe_solo_fallos_de_l1(self):
        jerarquia = ConstructorJerarquia().l1().l2().construir()
        for _ in range(3):
            jerarquia.acceder_demanda(7)
        l1, l2 = jerarquia.estadisticas()
        assert l1.accesos_demanda == 3 and l2.accesos_demanda == 1

    def test_nivel_servidor(self):
        jerarquia = ConstructorJerarquia().l1().l2().l3().construir()
        assert jerarquia.acceder_demanda(5).nivel_servidor == 3
        assert jerarquia.acceder_demanda(5).nivel_servidor == 0
        jerarquia.rellenar_prebusqueda(1, 9)
        assert jerarquia.acceder_demanda(9).nivel_servidor == 1

    def test_conformidad_con_lru_de_referencia(self):
        geometrias = [_geometria(4096, 4, 4, "A"), _geometria(16384, 8, 10, "B")]
        jerarquia = JerarquiaCache(geometrias, latencia_memoria=100)
        oraculo = JerarquiaLru([(4096, 4, 64), (16384, 8, 64)])
        rng = np.random.default_rng(2024)
        # mezcla de localidad: bloques cercanos y saltos a una huella mayor
        bloques = np.where(rng.random(100_000) < 0.6, rng.integers(0, 96, 100_000), rng.integers(0, 2048, 100_000))
        for bloque in bloques.tolist():
            jerarquia.acceder_demanda(bloque, TipoAcceso.LECTURA)
            oraculo.acceder(bloque)
        obtenidos = [(s.aciertos_demanda, s.fallos_demanda) for s in jerarquia.estadisticas()]
        assert obtenidos == oraculo.conteos()
        for stats in jerarquia.estadisticas():
            assert stats.aciertos_demanda + stats.fallos_demanda == stats.accesos_demanda

    def test_registro_de_latencias(self, tmp_path):
        jerarquia = ConstructorJerarquia().l1().l2().con_registro_latencias().construir()
        jerarquia.acceder_demanda(1)
        jerarquia.acceder_demanda(1)
        ruta = tmp_path / "latencias.csv"
        jerarquia.escribir_registro_latencias(ruta)
        tabla = pd.read_csv(ruta)
        assert list(tabla.columns) == ["acceso", "latencia_ciclos"]
        assert tabla["latencia_ciclos"].tolist() == [210, 4]

    def test_registro_de_latencias_no_habilitado(self, tmp_path):
        jerarquia = ConstructorJerarquia().l1().construir()
        with pytest.raises(ValueError):
            jerarquia.escribir_registro_latencias(tmp_path / "x.csv")


class TestAmat:

    def test_amat_exacto(self):
        assert calcular_amat(650, 5) == Fraction(130)

    def test_amat_sin_accesos(self):
        with pytest.raises(SinAccesos):
            calcular_amat(0, 0)

    def test_amat_desde_jerarquia_vacia(self):
        with pytest.raises(SinAccesos):
            ConstructorJerarquia().l1().construir().amat()
