"""
Jerarquía de excepciones del simulador.

Todas derivan de ErrorSimulador; las que sustituyen a un error estándar
(ValueError, LookupError) heredan también de él para que el código que ya
captura esos tipos siga funcionando.
"""
from typing import Optional


class ErrorSimulador(Exception):
    """Raíz de todos los errores del dominio."""


class ErrorTraza(ErrorSimulador):
    """Errores al leer o interpretar una traza de accesos."""


class LineaMalformada(ErrorTraza, ValueError):
    """Una línea que no es comentario no respeta el formato `<pc> <dir> <R|W>`."""

    def __init__(self, numero_linea: int, contenido: str = ""):
        self.numero_linea = numero_linea
        self.contenido = contenido
        super().__init__(f"Línea {numero_linea} malformada: {contenido!r}")

    def __reduce__(self):
        return (type(self), (self.numero_linea, self.contenido))


class ValorFueraDeRango(ErrorTraza, ValueError):
    """Un PC o una dirección no cabe en el espacio virtual de 48 bits."""

    def __init__(self, valor: int, numero_linea: Optional[int] = None, campo: str = "direccion"):
        self.valor = valor
        self.numero_linea = numero_linea
        self.campo = campo
        ubicacion = f" en línea {numero_linea}" if numero_linea is not None else ""
        super().__init__(f"Valor de {campo} fuera de rango{ubicacion}: {valor:#x}")

    def __reduce__(self):
        return (type(self), (self.valor, self.numero_linea, self.campo))


class TrazaIlegible(ErrorTraza):
    """El contenido no se puede decodificar: UTF-8 inválido o gzip truncado."""

    def __init__(self, motivo: str, numero_linea: Optional[int] = None):
        self.motivo = motivo
        self.numero_linea = numero_linea
        ubicacion = f" tras la línea {numero_linea}" if numero_linea is not None else ""
        super().__init__(f"Traza ilegible{ubicacion}: {motivo}")

    def __reduce__(self):
        return (type(self), (self.motivo, self.numero_linea))


class EspecificacionInvalida(ErrorSimulador, ValueError):
    """Una especificación de traza sintética viola sus invariantes."""

    def __init__(self, mensaje: str, detalles: Optional[list] = None):
        self.detalles = detalles or []
        super().__init__(mensaje)

    def __reduce__(self):
        return (type(self), (str(self), self.detalles))


class ConfiguracionInvalida(ErrorSimulador, ValueError):
    """El archivo de configuración no pasa la validación."""

    def __init__(self, mensaje: str, detalles: Optional[list] = None):
        self.detalles = detalles or []
        super().__init__(mensaje)

    def __reduce__(self):
        return (type(self), (str(self), self.detalles))


class SinAccesos(ErrorSimulador, ValueError):
    """No hay accesos de demanda registrados para calcular el AMAT."""


class EntradaMuerta(ErrorSimulador, LookupError):
    """El índice pedido no corresponde a una entrada viva del GHB."""

    def __init__(self, indice: int):
        self.indice = indice
        super().__init__(f"La entrada {indice} del GHB no está viva")


class SinRellenos(ErrorSimulador, ValueError):
    """La ejecución no realizó ningún relleno por prebúsqueda."""


class SuiteVacia(ErrorSimulador, ValueError):
    """Se pidió un agregado sobre una colección vacía de ejecuciones."""
