"""
Политики вытеснения для буфера отправки.
Drop-Oldest, Drop-Youngest, Random и ORBBuf (жадная максимизация
минимального сходства соседних кадров).
"""

import logging
from typing import Dict, Optional, Type

import numpy as np

from src.buffering.send_buffer import SendBuffer
from src.data.models import Frame
from src.errors import SimulationError, UsageError

# Настройка логгирования
logger = logging.getLogger(__name__)

DROP_OLDEST = 'drop-oldest'
DROP_YOUNGEST = 'drop-youngest'
RANDOM = 'random'
ORBBUF = 'orbbuf'

POLICY_NAMES = (DROP_OLDEST, DROP_YOUNGEST, RANDOM, ORBBUF)


def policy_random(buffer: SendBuffer, rng: np.random.Generator) -> int:
    """
    Случайная жертва, равномерно по всем записям буфера.

    Args:
        buffer: полный буфер
        rng: собственный генератор политики

    Returns:
        int: id вытесняемого кадра
    """
    ids = buffer.ids()
    if not ids:
        raise SimulationError("Нельзя выбрать жертву в пустом буфере")
    return ids[int(rng.integers(len(ids)))]


def policy_orbbuf(buffer: SendBuffer, incoming: Optional[Frame] = None) -> int:
    """
    Жертва ORBBuf: запись с максимальной оценкой среди вытесняемых.

    Удаление такой записи оставляет наибольшее сходство на месте разрыва.
    Хвост не вытесняется, пока есть другие кандидаты; при емкости 1
    он единственный.

    Args:
        buffer: полный буфер с отслеживанием оценок
        incoming: поступающий кадр (еще не добавлен)

    Returns:
        int: id вытесняемого кадра
    """
    if not buffer.track_scores:
        raise SimulationError("Политика orbbuf требует буфер с отслеживанием оценок")
    buffer.ensure_scores()
    victim = buffer.best_victim()
    if victim is None:
        victim = buffer.tail_id
    if victim is None:
        raise SimulationError("Нельзя выбрать жертву в пустом буфере")
    return victim


class DropOldestPolicy:
    """Вытесняет самую старую запись."""

    name = DROP_OLDEST
    uses_scores = False

    def select_victim(self, buffer: SendBuffer, incoming: Frame) -> int:
        return buffer.head_id


class DropYoungestPolicy:
    """Вытесняет самую новую запись буфера."""

    name = DROP_YOUNGEST
    uses_scores = False

    def select_victim(self, buffer: SendBuffer, incoming: Frame) -> int:
        return buffer.tail_id


class RandomPolicy:
    """Вытесняет равномерно случайную запись; генератор принадлежит политике."""

    name = RANDOM
    uses_scores = False

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def select_victim(self, buffer: SendBuffer, incoming: Frame) -> int:
        return policy_random(buffer, self._rng)


class OrbBufPolicy:
    """Жадная политика ORBBuf."""

    name = ORBBUF
    uses_scores = True

    def select_victim(self, buffer: SendBuffer, incoming: Frame) -> int:
        return policy_orbbuf(buffer, incoming)


_POLICIES: Dict[str, Type] = {
    DROP_OLDEST: DropOldestPolicy,
    DROP_YOUNGEST: DropYoungestPolicy,
    RANDOM: RandomPolicy,
    ORBBUF: OrbBufPolicy,
}


def make_policy(name: str, seed: int = 0):
    """
    Создает политику по имени.

    Args:
        name: одно из POLICY_NAMES
        seed: зерно генератора (используется только random)

    Returns:
        политика с методом select_victim
    """
    key = name.strip().lower()
    if key not in _POLICIES:
        raise UsageError(f"Неизвестная политика '{name}', допустимы: {', '.join(POLICY_NAMES)}")
    if key == RANDOM:
        return RandomPolicy(seed)
    return _POLICIES[key]()
