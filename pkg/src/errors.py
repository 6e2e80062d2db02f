"""
Иерархия исключений приложения.
Каждое семейство ошибок соответствует своему коду завершения CLI.
"""

from typing import Optional


class OrbBufError(Exception):
    """Базовое исключение для всех ошибок приложения."""

    exit_code = 1


class UsageError(OrbBufError, ValueError):
    """Некорректные флаги командной строки или значения конфигурации."""

    exit_code = 1


class DataError(OrbBufError, ValueError):
    """Ошибки входных и выходных данных: кадры, трассы, файлы результатов."""

    exit_code = 2


class FrameFormatError(DataError):
    """Файл кадра не соответствует поддерживаемому формату PGM."""


class PGMMagicError(FrameFormatError):
    """Сигнатура файла отличается от 'P5'."""


class PGMMaxvalError(FrameFormatError):
    """Значение maxval больше 255 (16-битные PGM не поддерживаются)."""


class PGMTruncatedError(FrameFormatError):
    """Заголовок или массив пикселей обрезан."""


class SequenceLoadError(DataError):
    """Не удалось загрузить последовательность кадров из директории."""


class TraceFormatError(DataError):
    """Файл трассы пропускной способности некорректен."""


class OutputError(DataError):
    """Не удалось записать файл результатов."""


class SimulationError(OrbBufError):
    """Ошибка во время симуляции или буферизации."""

    exit_code = 3


class OrderingError(SimulationError, ValueError):
    """Кадр поступил в буфер с идентификатором не больше уже имеющихся."""


class SweepRunError(SimulationError):
    """Ошибка одного прогона в серии экспериментов, с координатами прогона."""

    def __init__(self, policy: str, capacity: int, seed: int, cause: Optional[BaseException] = None):
        self.policy = policy
        self.capacity = capacity
        self.seed = seed
        self.cause = cause
        super().__init__(
            f"прогон policy={policy} capacity={capacity} seed={seed} завершился ошибкой: {cause}"
        )

    def __reduce__(self):
        return (SweepRunError, (self.policy, self.capacity, self.seed, self.cause))
