import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from src.cli import SALIDA_CONFIGURACION, SALIDA_TRAZA, simprefetch
from src.modelos.acceso_memoria import AccesoMemoria
from src.traza import escribir_traza
from src.utils.cache_resultados import GestorCacheResultados
from src.utils.fabrica_variantes import FabricaVariantes
import validar_traza

ESPEC_ESTRIDE = {"traza": {"tipo": "estride", "inicio": 1 << 20, "paso_bytes": 256, "cantidad": 2000}}
DATOS = Path(__file__).parent / "datos"


def _runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture
def traza_estride(tmp_path):
    ruta = tmp_path / "estride.txt"
    escribir_traza([AccesoMemoria(0x400000, (1 << 20) + 256 * i) for i in range(2000)], ruta)
    return ruta


@pytest.fixture(autouse=True)
def serie(monkeypatch, tmp_path):
    monkeypatch.setenv("SIMPREFETCH_HILOS", "1")
    monkeypatch.setenv("CACHE_RESULTADOS_DIRECTORIO", str(tmp_path / "cache"))


class TestGenerar:

    def test_generar_es_reproducible(self, tmp_path):
        espec = tmp_path / "espec.json"
        espec.write_text(json.dumps({"traza": {
            "tipo": "markov", "estados": [0, 64, 128], "cantidad": 500, "semilla": 4,
            "matriz_transicion": [[0.2, 0.4, 0.4], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]],
        }}))
        salidas = []
        for carpeta in ("a", "b"):
            (tmp_path / carpeta).mkdir()
            salida = tmp_path / carpeta / "traza.txt.gz"
            resultado = _runner().invoke(simprefetch, ["generar", str(espec), str(salida)])
            assert resultado.exit_code == 0
            salidas.append(salida.read_bytes())
        assert salidas[0] == salidas[1]
        assert salidas[0][:2] == b"\x1f\x8b"

    def test_especificacion_invalida(self, tmp_path):
        espec = tmp_path / "mala.json"
        espec.write_text(json.dumps({"tipo": "markov", "estados": [0, 64], "cantidad": 5,
                                     "matriz_transicion": [[0.5, 0.4], [0.5, 0.5]]}))
        resultado = _runner().invoke(simprefetch, ["generar", str(espec), str(tmp_path / "t.txt")])
        assert resultado.exit_code == SALIDA_CONFIGURACION


class TestEjecutar:

    def test_json_identico_entre_ejecuciones(self, traza_estride):
        salidas = [
            _runner().invoke(simprefetch, ["ejecutar", str(traza_estride), "--variante", "SP", "--json"])
            for _ in range(2)
        ]
        assert all(s.exit_code == 0 for s in salidas)
        assert salidas[0].stdout == salidas[1].stdout
        reporte = json.loads(salidas[0].stdout)
        assert reporte["version_esquema"] == 1
        assert reporte["variante"] == "SP"
        assert "tiempo_pared_s" not in reporte

    def test_reporte_json_de_referencia(self, tmp_path):
        # cinco accesos a 256B: el stride se confirma en el tercero y sus dos sugerencias aciertan
        ruta = tmp_path / "corta.txt"
        escribir_traza([AccesoMemoria(0x400000, 256 * i) for i in range(5)], ruta)
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(ruta), "--variante", "S", "--json"])
        assert resultado.exit_code == 0
        esperado = (DATOS / "ejecutar_estride_S.json").read_text(encoding="utf-8")
        assert json.loads(resultado.stdout) == json.loads(esperado)
        assert resultado.stdout == esperado

    def test_sin_prebuscador_no_sugiere(self, traza_estride):
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(traza_estride), "--variante", "ninguno", "--json"])
        reporte = json.loads(resultado.stdout)
        assert reporte["sugerencias_emitidas"] == 0
        assert reporte["rellenos_prebusqueda"] == 0

    def test_csv_de_una_fila(self, traza_estride):
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(traza_estride), "--variante", "S", "--csv"])
        lineas = resultado.stdout.strip().splitlines()
        assert len(lineas) == 2
        assert "l2_aciertos_demanda" in lineas[0].split(",")

    def test_archivos_de_depuracion(self, traza_estride, tmp_path):
        entrenamiento = tmp_path / "entrenamiento.csv"
        latencias = tmp_path / "latencias.csv"
        salida = tmp_path / "reporte.json"
        resultado = _runner().invoke(simprefetch, [
            "ejecutar", str(traza_estride), "--variante", "SP",
            "--debug-perceptron", str(entrenamiento), "--latencias", str(latencias), "--salida", str(salida),
        ])
        assert resultado.exit_code == 0
        assert entrenamiento.read_text().startswith("tick,evento,bloque")
        assert len(latencias.read_text().splitlines()) == 2001
        assert json.loads(salida.read_text())["accesos_demanda"] == 2000

    def test_depuracion_crea_el_motor_desde_la_fabrica(self, traza_estride, tmp_path, mocker):
        espia = mocker.spy(FabricaVariantes, "crear_motor")
        resultado = _runner().invoke(simprefetch, [
            "ejecutar", str(traza_estride), "--variante", "MP", "--debug-perceptron", str(tmp_path / "e.csv"),
        ])
        assert resultado.exit_code == 0
        assert espia.call_count == 1
        assert espia.call_args.args[1] == "MP"

    def test_traza_inexistente(self, tmp_path):
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(tmp_path / "no_existe.txt")])
        assert resultado.exit_code == SALIDA_TRAZA

    def test_traza_malformada(self, tmp_path):
        ruta = tmp_path / "rota.txt"
        ruta.write_text("400000 40 R\n400000 zz R\n")
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(ruta), "--json"])
        assert resultado.exit_code == SALIDA_TRAZA
        assert resultado.stdout == ""

    def test_traza_con_utf8_invalido(self, tmp_path):
        ruta = tmp_path / "binaria.txt"
        ruta.write_bytes(b"400000 40 R\n400000 \xff\xfe R\n")
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(ruta), "--json"])
        assert resultado.exit_code == SALIDA_TRAZA
        assert resultado.stdout == ""

    def test_traza_gzip_truncada(self, tmp_path):
        completa = tmp_path / "completa.txt.gz"
        escribir_traza([AccesoMemoria(0x400000, 64 * i) for i in range(5000)], completa)
        datos = completa.read_bytes()
        ruta = tmp_path / "truncada.txt.gz"
        ruta.write_bytes(datos[: len(datos) // 2])
        for comando in ("ejecutar", "comparar"):
            resultado = _runner().invoke(simprefetch, [comando, str(ruta)])
            assert resultado.exit_code == SALIDA_TRAZA, comando

    def test_configuracion_invalida(self, traza_estride, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"motor": {"capacidad_ghb": -1}}))
        resultado = _runner().invoke(simprefetch, ["ejecutar", str(traza_estride), "--config", str(config)])
        assert resultado.exit_code == SALIDA_CONFIGURACION

    def test_cache_de_resultados(self, traza_estride, monkeypatch):
        monkeypatch.setenv("CACHE_RESULTADOS_HABILITADO", "True")
        GestorCacheResultados._instancia = None
        argumentos = ["ejecutar", str(traza_estride), "--variante", "M", "--json"]
        primero = _runner().invoke(simprefetch, argumentos)
        segundo = _runner().invoke(simprefetch, argumentos)
        assert primero.stdout == segundo.stdout
        assert GestorCacheResultados().hits_cache == 1


class TestComparar:

    def test_json_con_cuatro_variantes(self, traza_estride):
        resultado = _runner().invoke(simprefetch, ["comparar", str(traza_estride), "--formato", "json"])
        assert resultado.exit_code == 0
        documento = json.loads(resultado.stdout)
        assert [fila["variante"] for fila in documento["metricas"]] == ["S", "SP", "M", "MP"]
        assert [fila["comparacion"] for fila in documento["deltas"]] == ["SP vs S", "MP vs M"]

    def test_stride_puro_casi_no_deniega(self, traza_estride):
        resultado = _runner().invoke(simprefetch, ["comparar", str(traza_estride), "--formato", "json"])
        filas = {fila["variante"]: fila for fila in json.loads(resultado.stdout)["metricas"]}
        assert filas["SP"]["sugerencias_emitidas"] > 0
        assert filas["SP"]["tasa_denegacion"] < 0.2

    def test_procesos_paralelos_igual_que_serie(self, traza_estride, monkeypatch):
        argumentos = ["comparar", str(traza_estride), "--formato", "csv"]
        en_serie = _runner().invoke(simprefetch, argumentos)
        monkeypatch.setenv("SIMPREFETCH_HILOS", "2")
        en_paralelo = _runner().invoke(simprefetch, argumentos)
        assert en_paralelo.exit_code == 0
        assert en_paralelo.stdout == en_serie.stdout

    def test_markdown(self, traza_estride):
        resultado = _runner().invoke(simprefetch, ["comparar", str(traza_estride), "--formato", "markdown"])
        assert resultado.stdout.startswith("| variante |")


class TestSobrecarga:

    def test_json(self):
        resultado = _runner().invoke(simprefetch, ["sobrecarga", "--formato", "json"])
        filas = json.loads(resultado.stdout)
        assert [f["variante"] for f in filas] == ["S", "SP", "M", "MP"]
        assert filas[0]["ghb_bits"] == 512 * 54
        assert filas[0]["tabla_aceptacion_bits"] == 0


class TestValidarTraza:

    def test_reporta_todos_los_errores(self, tmp_path, capsys):
        ruta = tmp_path / "rota.txt"
        ruta.write_text("# ok\n400000 40 R\n400000 zz R\n400000 40 X\n400000 1000000000000 W\n")
        resultado = validar_traza.validar_archivo(ruta)
        assert resultado["registros"] == 1
        assert len(resultado["errores"]) == 3
        assert validar_traza.main([str(ruta)]) == 3
        assert "✗" in capsys.readouterr().out

    def test_traza_valida(self, traza_estride):
        assert validar_traza.main([str(traza_estride)]) == 0

    def test_gzip_truncado_es_error_critico(self, tmp_path):
        ruta = tmp_path / "truncada.txt.gz"
        escribir_traza([AccesoMemoria(0x400000, 64 * i) for i in range(5000)], ruta)
        datos = ruta.read_bytes()
        ruta.write_bytes(datos[: len(datos) // 2])
        resultado = validar_traza.validar_archivo(ruta)
        assert resultado["errores"][-1].startswith("Error Crítico")
