"""
Utilidades transversales: logging, cache de resultados, fábrica de variantes
y constructor de jerarquías. Se importan por módulo (src.utils.<modulo>) para
no crear ciclos con el núcleo del simulador.
"""
