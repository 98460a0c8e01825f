"""
Jerarquía de errores de privplan

Cada error de dominio hereda también del builtin que se lanzaría en su lugar
(ValueError / RuntimeError), así el código que ya captura esos builtins sigue
funcionando.
"""

from typing import Optional


class PrivPlanError(Exception):
    """Error base de la librería"""


class DimensionError(PrivPlanError, ValueError):
    """La configuración no tiene la dimensión del robot"""

    def __init__(self, expected: int, got: int):
        super().__init__(f"config dimension mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class SceneParseError(PrivPlanError, ValueError):
    """Fichero de escena con sintaxis JSON incorrecta"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"scene parse error: {message}{location}")
        self.line = line
        self.column = column


class SceneValidationError(PrivPlanError, ValueError):
    """Escena bien formada pero con un campo inválido"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InfeasibleSceneError(PrivPlanError, RuntimeError):
    """No se encontraron configuraciones válidas dentro del presupuesto de muestreo"""

    def __init__(self, attempts: int):
        super().__init__(f"scene appears infeasible: no valid configuration after {attempts} rejections")
        self.attempts = attempts


class NoPathError(PrivPlanError, RuntimeError):
    """Inicio y objetivo en componentes desconectadas del roadmap"""

    def __init__(self, message: str = "no path between start and goal"):
        super().__init__(message)


class RoadmapFormatError(PrivPlanError, ValueError):
    """Fichero de roadmap ilegible"""


class RoadmapVersionError(RoadmapFormatError):
    """format_version no soportada"""


class RoadmapChecksumError(RoadmapFormatError):
    """El contenido no coincide con el checksum de la cabecera"""
