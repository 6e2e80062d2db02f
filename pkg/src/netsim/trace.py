"""
Трассы пропускной способности канала.
Загрузка CSV, кусочно-постоянная интерполяция, вставка прерываний
и точное время передачи сообщения в жидкостной модели.
"""

import bisect
import logging
import math
import os
from typing import List, Tuple, Union

import pandas as pd

from src.data.models import InterruptionSpec, LinkTrace
from src.errors import TraceFormatError

# Настройка логгирования
logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['t_ms', 'bytes_per_second']


def load_trace(path: Union[str, os.PathLike]) -> LinkTrace:
    """
    Загружает трассу из CSV со строками `t_ms,bytes_per_second`.

    Args:
        path: путь к файлу; строки, начинающиеся с '#', пропускаются

    Returns:
        LinkTrace: проверенная трасса
    """
    try:
        df = pd.read_csv(path, header=None, names=TRACE_COLUMNS, comment='#',
                         skipinitialspace=True, dtype=float)
    except FileNotFoundError as e:
        raise TraceFormatError(f"Файл трассы {path} не найден") from e
    except pd.errors.EmptyDataError as e:
        raise TraceFormatError(f"Файл трассы {path} пуст") from e
    except ValueError as e:
        raise TraceFormatError(f"Некорректное значение в трассе {path}: {e}") from e

    if df.empty:
        raise TraceFormatError(f"Файл трассы {path} пуст")
    if df.isna().any().any():
        raise TraceFormatError(f"В трассе {path} есть неполные строки")

    points = tuple((float(t), float(rate)) for t, rate in df.itertuples(index=False))
    trace = LinkTrace(points=points)
    logger.info(f"Загружена трасса {path}: {len(points)} точек")
    return trace


def constant_trace(bytes_per_second: float) -> LinkTrace:
    """Трасса с постоянной пропускной способностью."""
    return LinkTrace(points=((0.0, float(bytes_per_second)),))


def bandwidth_at(trace: LinkTrace, t_ms: float) -> float:
    """
    Пропускная способность в момент t_ms.

    Args:
        trace: трасса
        t_ms: время в мс

    Returns:
        float: значение последней точки с t <= t_ms; до первой точки - значение первой
    """
    index = bisect.bisect_right(trace.times, t_ms) - 1
    return trace.points[max(index, 0)][1]


def _normalize(points: List[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
    """Убирает точки, не меняющие значение пропускной способности."""
    result: List[Tuple[float, float]] = []
    for t_ms, rate in points:
        if result and result[-1][1] == rate:
            continue
        result.append((t_ms, rate))
    return tuple(result)


def apply_interruption(trace: LinkTrace, spec: InterruptionSpec, fps: float) -> LinkTrace:
    """
    Накладывает на трассу окно нулевой пропускной способности.

    Окно начинается в at_frame x 1000/fps и длится
    latency_ms + duration_frames x 1000/fps; после него трасса продолжается как была.

    Args:
        trace: исходная трасса
        spec: параметры прерывания
        fps: частота кадров

    Returns:
        LinkTrace: новая трасса
    """
    start, end = spec.window_ms(fps)
    if end <= start:
        return trace

    times = trace.times
    points: List[Tuple[float, float]] = []
    if start < times[0]:
        # Сохраняем продление первого значения влево от окна
        points.append((start - 1.0, trace.points[0][1]))
    points.extend(p for p in trace.points if p[0] < start)
    points.append((start, 0.0))
    points.append((end, bandwidth_at(trace, end)))
    points.extend(p for p in trace.points if p[0] > end)

    logger.debug(f"Прерывание канала в окне [{start:.1f}, {end:.1f}) мс")
    return LinkTrace(points=_normalize(points))


def transmit_finish_time(trace: LinkTrace, start_ms: float, size_bytes: float) -> float:
    """
    Момент окончания передачи сообщения, начатой в start_ms.

    Решает интеграл пропускной способности от start_ms до t, равный size_bytes,
    точно по каждому постоянному участку.

    Args:
        trace: трасса
        start_ms: время начала передачи
        size_bytes: размер сообщения

    Returns:
        float: время окончания в мс или math.inf, если передача никогда не завершится
    """
    remaining = float(size_bytes)
    if remaining <= 0:
        return start_ms
    times = trace.times
    index = max(bisect.bisect_right(times, start_ms) - 1, 0)
    t = start_ms
    while True:
        rate = trace.points[index][1]
        segment_end = times[index + 1] if index + 1 < len(times) else math.inf
        if rate > 0:
            finish = t + remaining * 1000.0 / rate
            if finish <= segment_end:
                return finish
            remaining -= rate * (segment_end - t) / 1000.0
        if math.isinf(segment_end):
            return math.inf
        t = segment_end
        index += 1
