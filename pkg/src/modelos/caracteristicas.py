from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

MINIMO_CUANTIZADO = -8
MAXIMO_CUANTIZADO = 8


@dataclass(frozen=True, slots=True)
class CaracteristicasCrudas:
    """
    Valores sin cuantizar de las cuatro características extraídas del GHB.

    f1: distancia mínima a la cabeza del bloque sugerido (capacidad si no está).
    f2: probabilidad de transición ponderada por recencia, racional en [0, 1].
    f3: 16 bits bajos de bloque XOR (pc >> 2).
    f4: número de entradas vivas con el bloque sugerido.
    """

    f1: int
    f2: Fraction
    f3: int
    f4: int


@dataclass(frozen=True, slots=True)
class VectorCaracteristicas:
    """Las cinco entradas del perceptrón; x5 es el sesgo constante."""

    x1: int
    x2: int
    x3: int
    x4: int
    x5: int = 1

    def __post_init__(self):
        for nombre in ("x1", "x2", "x3", "x4"):
            valor = getattr(self, nombre)
            if not MINIMO_CUANTIZADO <= valor <= MAXIMO_CUANTIZADO:
                raise ValueError(f"{nombre}={valor} fuera de [{MINIMO_CUANTIZADO}, {MAXIMO_CUANTIZADO}]")
        if self.x5 != 1:
            raise ValueError("x5 (sesgo) debe valer siempre 1")

    def como_tupla(self) -> Tuple[int, int, int, int, int]:
        return (self.x1, self.x2, self.x3, self.x4, self.x5)

    def empaquetar(self) -> int:
        """
        Empaqueta x1..x4 en una palabra de 20 bits.

        Cuatro campos de 5 bits, x1 en los más altos; cada valor se desplaza
        +8 hasta [0, 16]. El sesgo no se almacena. La tabla de aceptación
        reserva 32 bits por entrada.
        """
        palabra = 0
        for valor in (self.x1, self.x2, self.x3, self.x4):
            palabra = (palabra << 5) | (valor - MINIMO_CUANTIZADO)
        return palabra

    @classmethod
    def desempaquetar(cls, palabra: int) -> "VectorCaracteristicas":
        valores = []
        for _ in range(4):
            valores.append((palabra & 0x1F) + MINIMO_CUANTIZADO)
            palabra >>= 5
        x4, x3, x2, x1 = valores
        return cls(x1, x2, x3, x4)
