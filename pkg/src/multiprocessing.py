"""
Модуль для выполнения независимых прогонов в отдельных процессах.
Позволяет использовать несколько ядер процессора для серий экспериментов.
"""

import logging
import concurrent.futures
from typing import Callable, Any, Dict, List, Optional, Sequence, Tuple, TypeVar
import os
import time
import traceback

import numpy as np
import psutil

# Настройка логгирования
logger = logging.getLogger(__name__)

# Тип возвращаемого значения для обобщенных функций
T = TypeVar('T')

# Максимальное количество рабочих процессов
MAX_WORKERS = max(2, os.cpu_count() or 2)

# Счетчик выполненных задач
_task_counter = 0
_task_times: Dict[str, List[float]] = {}

# Общие данные рабочего процесса, задаются инициализатором пула
_worker_context: Dict[str, Any] = {}


def set_worker_context(**context: Any) -> None:
    """
    Инициализатор рабочего процесса: сохраняет общие для задач данные.

    Крупные объекты (последовательность кадров, трасса) передаются один раз
    на процесс, а не с каждой задачей.
    """
    _worker_context.clear()
    _worker_context.update(context)


def worker_context() -> Dict[str, Any]:
    """Возвращает данные, заданные инициализатором текущего процесса."""
    return _worker_context


def _record_time(name: str, execution_time: float) -> None:
    global _task_counter
    _task_counter += 1
    _task_times.setdefault(name, []).append(execution_time)


def run_tasks(func: Callable[..., T], tasks: Sequence[Tuple], workers: int = 1,
              initializer: Optional[Callable[..., None]] = None,
              initargs: Tuple = (), initkwargs: Optional[Dict[str, Any]] = None) -> List[T]:
    """
    Выполняет func для каждого набора аргументов, сохраняя порядок результатов.

    Args:
        func: функция верхнего уровня модуля (должна сериализоваться pickle)
        tasks: наборы позиционных аргументов
        workers: число процессов; 1 - выполнение в текущем процессе
        initializer: инициализатор рабочего процесса
        initargs: позиционные аргументы инициализатора
        initkwargs: именованные аргументы инициализатора

    Returns:
        List[T]: результаты в порядке tasks
    """
    initkwargs = initkwargs or {}
    if workers <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs, **initkwargs)
        results = []
        for task_id, args in enumerate(tasks, start=1):
            start_time = time.time()
            results.append(func(*args))
            execution_time = time.time() - start_time
            _record_time(func.__name__, execution_time)
            logger.debug(f"Задача #{task_id}: Завершено {func.__name__} за {execution_time:.2f} сек")
        return results

    workers = min(workers, MAX_WORKERS, len(tasks))
    logger.info(f"Инициализирован пул процессов с {workers} рабочими для {len(tasks)} задач")
    results: List[Any] = [None] * len(tasks)
    start_times: Dict[int, float] = {}

    pool_initializer = None
    if initializer is not None:
        pool_initializer = _InitializerCall(initializer, initargs, initkwargs)

    with concurrent.futures.ProcessPoolExecutor(max_workers=workers, initializer=pool_initializer) as pool:
        futures = {}
        for position, args in enumerate(tasks):
            start_times[position] = time.time()
            futures[pool.submit(func, *args)] = position
        try:
            for future in concurrent.futures.as_completed(futures):
                position = futures[future]
                results[position] = future.result()
                execution_time = time.time() - start_times[position]
                _record_time(func.__name__, execution_time)
                logger.debug(f"Задача #{position + 1}: Завершено {func.__name__} за {execution_time:.2f} сек")
        except Exception as e:
            logger.error(f"Ошибка при выполнении функции {func.__name__}: {e}")
            logger.debug(f"Трассировка: {traceback.format_exc()}")
            for pending in futures:
                pending.cancel()
            raise

    log_process_stats()
    return results


class _InitializerCall:
    """Сериализуемая обертка инициализатора с именованными аргументами."""

    def __init__(self, func: Callable[..., None], args: Tuple, kwargs: Dict[str, Any]):
        self.func = func
        self.args = args
        self.kwargs = kwargs

    def __call__(self) -> None:
        self.func(*self.args, **self.kwargs)


def get_process_stats() -> Dict[str, Any]:
    """
    Сводка по выполненным задачам и ресурсам текущего процесса.

    Returns:
        Dict: total_tasks, function_stats (по имени функции) и system_resources
    """
    function_stats = {}
    for func_name, times in _task_times.items():
        if not times:
            continue
        durations = np.asarray(times)
        function_stats[func_name] = {
            "calls": int(durations.size),
            "avg_time": float(durations.mean()),
            "min_time": float(durations.min()),
            "max_time": float(durations.max()),
            "total_time": float(durations.sum()),
        }

    memory = psutil.virtual_memory()
    process = psutil.Process()
    return {
        "total_tasks": _task_counter,
        "function_stats": function_stats,
        "system_resources": {
            "cpu_percent": psutil.cpu_percent(interval=0.1),
            "memory_percent": memory.percent,
            "memory_available_mb": memory.available / (1024 * 1024),
            "process_rss_mb": process.memory_info().rss / (1024 * 1024),
        },
    }


def log_process_stats() -> None:
    """Пишет в лог сводку get_process_stats."""
    stats = get_process_stats()
    resources = stats["system_resources"]
    logger.info(
        f"Пул процессов: задач {stats['total_tasks']}, CPU {resources['cpu_percent']}%, "
        f"память {resources['memory_percent']}%, RSS {resources['process_rss_mb']:.0f} МБ"
    )
    for func_name, func_stats in stats["function_stats"].items():
        logger.info(
            f"  {func_name}: вызовов {func_stats['calls']}, среднее {func_stats['avg_time']:.2f} сек, "
            f"мин/макс {func_stats['min_time']:.2f}/{func_stats['max_time']:.2f} сек"
        )


def reset_process_stats() -> None:
    """Сбрасывает счетчики задач."""
    global _task_counter
    _task_counter = 0
    _task_times.clear()
