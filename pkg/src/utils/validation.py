"""
Модуль для валидации параметров командной строки и конфигурации.
Централизует разбор значений для избежания дублирования кода.
"""

import logging
import math
from typing import List, Sequence, Union

from src.errors import UsageError

logger = logging.getLogger(__name__)


def resolve_capacity(spec: Union[str, int], fps: float) -> int:
    """
    Переводит емкость буфера в кадры.

    Args:
        spec: число кадров ("25") или секунды с суффиксом s ("1s", "0.5s")
        fps: частота кадров

    Returns:
        int: емкость в кадрах, не меньше 1

    Examples:
        >>> resolve_capacity("1s", 25)
        25
        >>> resolve_capacity("0.1s", 25)
        3
        >>> resolve_capacity("7", 25)
        7
    """
    text = str(spec).strip().lower()
    try:
        if text.endswith('s'):
            # Погрешность представления 0.1 * 30 и т.п. не должна добавлять кадр
            frames = math.ceil(round(float(text[:-1]) * fps, 9))
        else:
            frames = int(text)
    except ValueError as e:
        raise UsageError(f"Некорректная емкость буфера '{spec}': ожидается число кадров или секунды ('1s')") from e

    if frames < 1:
        logger.debug(f"Validation failed: capacity {spec} -> {frames}")
        raise UsageError(f"Емкость буфера должна быть не меньше одного кадра: {spec}")
    return frames


def parse_int_list(text: Union[str, Sequence[int]], name: str = 'список') -> List[int]:
    """
    Разбирает список целых через запятую.

    Examples:
        >>> parse_int_list("5,10, 15")
        [5, 10, 15]
    """
    if not isinstance(text, str):
        return [int(v) for v in text]
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise UsageError(f"Параметр {name} не должен быть пустым")
    try:
        return [int(item) for item in items]
    except ValueError as e:
        raise UsageError(f"Некорректный {name}: '{text}'") from e


def parse_name_list(text: Union[str, Sequence[str]]) -> List[str]:
    """Разбирает список имен через запятую."""
    if not isinstance(text, str):
        return [str(v).strip() for v in text]
    return [item.strip() for item in text.split(',') if item.strip()]


def validate_range(value: float, name: str, min_val: float = None, max_val: float = None) -> float:
    """
    Проверяет, что значение лежит в заданном диапазоне (включительно).

    Returns:
        float: то же значение
    """
    if min_val is not None and value < min_val:
        raise UsageError(f"{name} должен быть не меньше {min_val}: {value}")
    if max_val is not None and value > max_val:
        raise UsageError(f"{name} должен быть не больше {max_val}: {value}")
    return value
