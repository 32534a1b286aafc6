# =====================================================
# EXCEPCIONES - Errores del dominio del workbench
# =====================================================


class WorkbenchError(Exception):
    """Error base de todo el workbench"""


class MapError(WorkbenchError):
    """Mapa WKT invalido, desconectado o imposible de recorrer"""


class ConfigError(WorkbenchError):
    """Configuracion de escenario o de barrido invalida"""


class TrafficError(WorkbenchError):
    """Generador de trafico sin pares origen/destino validos"""


class MessageBufferError(WorkbenchError):
    """Operacion invalida sobre el buffer de un host"""


class DuplicateMessageError(MessageBufferError):
    """El mensaje ya esta en el buffer"""


class FeatureError(WorkbenchError):
    """Fallo al extraer features (indica un bug de logica, aborta la corrida)"""


class DatasetError(WorkbenchError):
    """Dataset de entrenamiento vacio, incompleto o de una sola clase"""


class ModelFormatError(WorkbenchError):
    """Archivo de modelo malformado o incompatible"""


class StatTestError(WorkbenchError):
    """Entrada invalida para una prueba estadistica"""


class DegenerateTestError(StatTestError):
    """Prueba degenerada (varianza nula o todas las diferencias en cero)"""


class ReportError(WorkbenchError):
    """No se puede calcular o escribir el reporte"""
