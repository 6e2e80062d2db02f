"""
Индексированная куча для оценок вытеснения.
Поддерживает вставку, изменение приоритета и удаление по ключу за O(log L).
"""

import enum
import logging
from typing import Dict, Hashable, Iterator, List, Optional, Tuple, Union

# Настройка логгирования
logger = logging.getLogger(__name__)


class ScoreSentinel(enum.Enum):
    """Особые значения оценки: FREE вытесняется первым, TAIL не вытесняется."""
    FREE = "free"
    TAIL = "tail"


Score = Union[int, ScoreSentinel]
Priority = Tuple[int, int, int]


class IndexedHeap:
    """
    Минимальная двоичная куча пар (приоритет, ключ) с индексом позиций.
    """

    __slots__ = ('_heap', '_positions')

    def __init__(self):
        self._heap: List[Tuple[Priority, Hashable]] = []
        self._positions: Dict[Hashable, int] = {}

    def __len__(self) -> int:
        return len(self._heap)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._positions

    def __iter__(self) -> Iterator[Hashable]:
        return iter(list(self._positions))

    def push(self, key: Hashable, priority: Priority) -> None:
        """Вставляет ключ или меняет приоритет существующего."""
        if key in self._positions:
            self.update(key, priority)
            return
        self._heap.append((priority, key))
        self._positions[key] = len(self._heap) - 1
        self._sift_up(len(self._heap) - 1)

    def update(self, key: Hashable, priority: Priority) -> None:
        pos = self._positions[key]
        old_priority = self._heap[pos][0]
        self._heap[pos] = (priority, key)
        if priority < old_priority:
            self._sift_up(pos)
        else:
            self._sift_down(pos)

    def remove(self, key: Hashable) -> None:
        """Удаляет ключ; отсутствующий ключ игнорируется."""
        pos = self._positions.pop(key, None)
        if pos is None:
            return
        last = self._heap.pop()
        if pos == len(self._heap):
            return
        self._heap[pos] = last
        self._positions[last[1]] = pos
        self._sift_up(pos)
        self._sift_down(self._positions[last[1]])

    def top(self) -> Optional[Hashable]:
        """Ключ с минимальным приоритетом или None для пустой кучи."""
        return self._heap[0][1] if self._heap else None

    def priority(self, key: Hashable) -> Priority:
        return self._heap[self._positions[key]][0]

    def clear(self) -> None:
        self._heap.clear()
        self._positions.clear()

    def _sift_up(self, pos: int) -> None:
        item = self._heap[pos]
        while pos > 0:
            parent = (pos - 1) // 2
            parent_item = self._heap[parent]
            if parent_item[0] <= item[0]:
                break
            self._heap[pos] = parent_item
            self._positions[parent_item[1]] = pos
            pos = parent
        self._heap[pos] = item
        self._positions[item[1]] = pos

    def _sift_down(self, pos: int) -> None:
        size = len(self._heap)
        item = self._heap[pos]
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            right = child + 1
            if right < size and self._heap[right][0] < self._heap[child][0]:
                child = right
            if self._heap[child][0] >= item[0]:
                break
            self._heap[pos] = self._heap[child]
            self._positions[self._heap[pos][1]] = pos
            pos = child
        self._heap[pos] = item
        self._positions[item[1]] = pos


def victim_priority(frame_id: int, score: Score) -> Priority:
    """
    Приоритет вытеснения: сначала FREE, затем максимальная оценка, затем самый старый кадр.

    Args:
        frame_id: идентификатор кадра
        score: оценка (не TAIL)

    Returns:
        Priority: ключ сортировки для минимальной кучи
    """
    if score is ScoreSentinel.FREE:
        return (0, 0, frame_id)
    if score is ScoreSentinel.TAIL:
        raise ValueError("Хвост буфера не участвует в выборе жертвы")
    return (1, -int(score), frame_id)


class ScoreIndex:
    """Индекс вытесняемых кадров буфера по их оценкам."""

    def __init__(self):
        self._heap = IndexedHeap()

    def __len__(self) -> int:
        return len(self._heap)

    def __contains__(self, frame_id: int) -> bool:
        return frame_id in self._heap

    def keys(self) -> List[int]:
        return sorted(self._heap)

    def set(self, frame_id: int, score: Score) -> None:
        """Записывает оценку кадра; TAIL удаляет кадр из индекса."""
        if score is ScoreSentinel.TAIL:
            self._heap.remove(frame_id)
        else:
            self._heap.push(frame_id, victim_priority(frame_id, score))

    def discard(self, frame_id: int) -> None:
        self._heap.remove(frame_id)

    def priority(self, frame_id: int) -> Priority:
        return self._heap.priority(frame_id)

    def best(self) -> Optional[int]:
        """Кадр, который следует вытеснить, или None."""
        return self._heap.top()

    def clear(self) -> None:
        self._heap.clear()
