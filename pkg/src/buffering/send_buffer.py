"""
Ограниченный буфер отправки кадров.

Каждая запись хранит оценку вытеснения: сходство ее предыдущего и следующего
соседей. Последняя запись помечена TAIL, голова без отправленного
предшественника - FREE. Оценки пересчитываются локально, не более трех раз
на каждый пришедший кадр.

Оценки считаются лениво: пока политике не понадобилась жертва, признаки не
извлекаются. Первый запрос жертвы (ensure_scores) оценивает весь буфер,
дальше оценки поддерживаются локально, пока буфер снова не опустеет.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Protocol, Set, Tuple

from src.buffering.score_index import Score, ScoreIndex, ScoreSentinel, victim_priority
from src.data.models import Frame
from src.errors import OrderingError, SimulationError, UsageError

# Настройка логгирования
logger = logging.getLogger(__name__)

# Порог размера кеша попарных сходств, после которого он чистится
MEMO_SLACK = 8


class SimilarityModel(Protocol):
    """Модель сходства: признаки кадра и сравнение двух наборов признаков."""

    def features(self, frame: Frame) -> Any:
        ...

    def compare(self, a: Any, b: Any) -> int:
        ...


class BufferPolicy(Protocol):
    name: str
    uses_scores: bool

    def select_victim(self, buffer: 'SendBuffer', incoming: Frame) -> int:
        ...


@dataclass(eq=False)
class BufferEntry:
    """Запись буфера: кадр, лениво вычисляемые признаки и оценка вытеснения."""
    frame: Frame
    score: Optional[Score] = None
    features: Any = field(default=None, repr=False)
    prev: Optional['BufferEntry'] = field(default=None, repr=False)
    next: Optional['BufferEntry'] = field(default=None, repr=False)

    @property
    def frame_id(self) -> int:
        return self.frame.id


@dataclass(frozen=True)
class EnqueueOutcome:
    """Итог поступления кадра в буфер."""
    inserted: int
    dropped: Optional[int]
    updates_performed: int


class SendBuffer:
    """
    Буфер отправки емкостью capacity кадров.

    Все изменения выполняются под одной блокировкой; производитель (enqueue)
    и отправитель (dequeue_for_send) могут работать из разных потоков.
    """

    def __init__(self, capacity: int, model: Optional[SimilarityModel] = None,
                 track_scores: bool = True, use_index: bool = True):
        if capacity < 1:
            raise UsageError(f"Емкость буфера должна быть не меньше 1: {capacity}")
        if track_scores and model is None:
            raise UsageError("Для отслеживания оценок нужна модель сходства")
        self.capacity = capacity
        self.model = model
        self.track_scores = track_scores
        self.use_index = use_index

        self._entries: Dict[int, BufferEntry] = {}
        self._head: Optional[BufferEntry] = None
        self._tail: Optional[BufferEntry] = None
        self._last_sent: Optional[BufferEntry] = None
        self._index = ScoreIndex()
        self._memo: Dict[Tuple[int, int], int] = {}
        self._lock = threading.RLock()
        self._scores_active = False

        # Кадры, признаки которых понадобились буферу
        self.extracted_ids: Set[int] = set()
        self.total_updates = 0
        # Оценки, посчитанные при включении отслеживания (не входят в updates_performed)
        self.initial_scores = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[BufferEntry]:
        return iter(self.entries())

    @property
    def is_full(self) -> bool:
        return len(self._entries) >= self.capacity

    @property
    def head_id(self) -> Optional[int]:
        return self._head.frame_id if self._head else None

    @property
    def tail_id(self) -> Optional[int]:
        return self._tail.frame_id if self._tail else None

    @property
    def last_sent(self) -> Optional[Frame]:
        """Последний отправленный кадр, предшественник головы."""
        return self._last_sent.frame if self._last_sent else None

    def entries(self) -> List[BufferEntry]:
        """Записи от самой старой к самой новой."""
        with self._lock:
            result = []
            node = self._head
            while node is not None:
                result.append(node)
                node = node.next
            return result

    def ids(self) -> List[int]:
        return [entry.frame_id for entry in self.entries()]

    def frames(self) -> List[Frame]:
        return [entry.frame for entry in self.entries()]

    def entry(self, frame_id: int) -> BufferEntry:
        return self._entries[frame_id]

    def score_of(self, frame_id: int) -> Optional[Score]:
        return self._entries[frame_id].score

    def index_keys(self) -> List[int]:
        return self._index.keys()

    @property
    def scores_active(self) -> bool:
        return self._scores_active

    def ensure_scores(self) -> None:
        """
        Включает поддержку оценок, если она еще не включена.

        Оценивает все записи одним проходом; вызывается политикой, которой
        нужна жертва по оценкам.
        """
        with self._lock:
            if not self.track_scores:
                raise SimulationError("Буфер создан без отслеживания оценок")
            if self._scores_active:
                return
            self._scores_active = True
            scored = 0
            for entry in self.entries():
                score = self._expected_score(entry)
                self._set_score(entry, score)
                if not isinstance(score, ScoreSentinel):
                    scored += 1
            self.initial_scores += scored
            logger.debug(f"Включены оценки вытеснения: {len(self._entries)} записей, сравнений {scored}")

    def enqueue(self, frame: Frame, policy: BufferPolicy) -> EnqueueOutcome:
        """
        Добавляет кадр в буфер, при переполнении вытесняя одну запись.

        Args:
            frame: новый кадр
            policy: политика вытеснения

        Returns:
            EnqueueOutcome: id вставленного и вытесненного кадров, число пересчетов оценок
        """
        with self._lock:
            self._check_order(frame)
            updates = 0
            dropped = None

            if self.is_full:
                victim_id = policy.select_victim(self, frame)
                if victim_id not in self._entries:
                    raise SimulationError(f"Политика {policy.name} выбрала отсутствующий кадр {victim_id}")
                updates += self._unlink(self._entries[victim_id])
                dropped = victim_id
                logger.debug(f"Политика {policy.name}: вытеснен кадр {victim_id} при поступлении {frame.id}")

            updates += self._append(frame)
            self._prune_memo()
            self.total_updates += updates
            return EnqueueOutcome(inserted=frame.id, dropped=dropped, updates_performed=updates)

    def dequeue_for_send(self) -> Optional[Frame]:
        """
        Извлекает самый старый кадр для передачи.

        Returns:
            Optional[Frame]: кадр или None для пустого буфера
        """
        with self._lock:
            head = self._head
            if head is None:
                return None
            self._unlink_head(head)
            self._last_sent = head
            # Новая голова получает предшественником отправленный кадр
            if self._scores_active and self._head is not None and self._head is not self._tail:
                self._set_score(self._head, self._head_score(self._head))
                self.total_updates += 1
            self._prune_memo()
            return head.frame

    def verify_scores(self) -> bool:
        """Проверяет, что все оценки и индекс совпадают с полным пересчетом."""
        with self._lock:
            entries = self.entries()
            if not self._scores_active:
                return all(entry.score is None for entry in entries) and len(self._index) == 0

            for entry in entries:
                if entry.score != self._expected_score(entry, use_memo=False):
                    logger.debug(f"Оценка кадра {entry.frame_id} не совпадает с пересчетом")
                    return False

            evictable = sorted(e.frame_id for e in entries if e.score is not ScoreSentinel.TAIL)
            if evictable != self._index.keys():
                return False
            return all(
                self._index_priority_matches(entry) for entry in entries
                if entry.score is not ScoreSentinel.TAIL
            )

    def best_victim(self) -> Optional[int]:
        """
        Запись с максимальной оценкой среди вытесняемых (FREE выше любого числа,
        при равенстве - самая старая); None, если вытеснять можно только хвост.
        """
        with self._lock:
            if self.use_index:
                return self._index.best()
            candidates = [e for e in self.entries() if e.score not in (None, ScoreSentinel.TAIL)]
            if not candidates:
                return None
            return min(candidates, key=lambda e: victim_priority(e.frame_id, e.score)).frame_id

    def similarity(self, a: Frame, b: Frame) -> int:
        """Сходство двух кадров через модель с кешированием по паре id."""
        key = (a.id, b.id) if a.id <= b.id else (b.id, a.id)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        value = int(self.model.compare(self._features_of(a), self._features_of(b)))
        self._memo[key] = value
        return value

    def _features_of(self, frame: Frame) -> Any:
        entry = self._entries.get(frame.id)
        if entry is None and self._last_sent is not None and self._last_sent.frame_id == frame.id:
            entry = self._last_sent
        if entry is not None and entry.features is not None:
            return entry.features
        features = self.model.features(frame)
        self.extracted_ids.add(frame.id)
        if entry is not None:
            entry.features = features
        return features

    def _check_order(self, frame: Frame) -> None:
        if self._tail is not None and frame.id <= self._tail.frame_id:
            raise OrderingError(f"Кадр {frame.id} поступил после кадра {self._tail.frame_id}")
        if self._last_sent is not None and frame.id <= self._last_sent.frame_id:
            raise OrderingError(f"Кадр {frame.id} поступил после отправленного кадра {self._last_sent.frame_id}")

    def _append(self, frame: Frame) -> int:
        entry = BufferEntry(frame=frame)
        former_tail = self._tail
        entry.prev = former_tail
        if former_tail is None:
            self._head = entry
        else:
            former_tail.next = entry
        self._tail = entry
        self._entries[frame.id] = entry

        if not self._scores_active:
            return 0
        self._set_score(entry, ScoreSentinel.TAIL)
        if former_tail is None:
            return 0
        score = self._expected_score(former_tail)
        self._set_score(former_tail, score)
        return 0 if isinstance(score, ScoreSentinel) else 1

    def _unlink(self, entry: BufferEntry) -> int:
        """Удаляет запись и пересчитывает оценки ее бывших соседей."""
        if entry is self._head:
            self._unlink_head(entry)
            neighbours = [self._head]
        else:
            prev, nxt = entry.prev, entry.next
            prev.next = nxt
            if nxt is None:
                self._tail = prev
            else:
                nxt.prev = prev
            del self._entries[entry.frame_id]
            self._index.discard(entry.frame_id)
            neighbours = [prev, nxt]
        entry.prev = entry.next = None

        if not self._scores_active:
            return 0
        updates = 0
        for neighbour in neighbours:
            if neighbour is None:
                continue
            score = self._expected_score(neighbour)
            self._set_score(neighbour, score)
            if not isinstance(score, ScoreSentinel):
                updates += 1
        return updates

    def _unlink_head(self, head: BufferEntry) -> None:
        self._head = head.next
        if self._head is None:
            self._tail = None
        else:
            self._head.prev = None
        head.next = None
        del self._entries[head.frame_id]
        self._index.discard(head.frame_id)
        if not self._entries:
            # Пустой буфер: до следующего запроса жертвы признаки не нужны
            self._scores_active = False

    def _head_score(self, entry: BufferEntry) -> Score:
        if self._last_sent is None:
            return ScoreSentinel.FREE
        return self.similarity(self._last_sent.frame, entry.next.frame)

    def _expected_score(self, entry: BufferEntry, use_memo: bool = True) -> Score:
        if entry.next is None:
            return ScoreSentinel.TAIL
        if entry.prev is None:
            if self._last_sent is None:
                return ScoreSentinel.FREE
            prev_frame = self._last_sent.frame
        else:
            prev_frame = entry.prev.frame
        if use_memo:
            return self.similarity(prev_frame, entry.next.frame)
        return int(self.model.compare(self.model.features(prev_frame), self.model.features(entry.next.frame)))

    def _set_score(self, entry: BufferEntry, score: Score) -> None:
        entry.score = score
        self._index.set(entry.frame_id, score)

    def _index_priority_matches(self, entry: BufferEntry) -> bool:
        return (entry.frame_id in self._index
                and self._index.priority(entry.frame_id) == victim_priority(entry.frame_id, entry.score))

    def _prune_memo(self) -> None:
        if len(self._memo) <= 4 * self.capacity + MEMO_SLACK:
            return
        live = set(self._entries)
        if self._last_sent is not None:
            live.add(self._last_sent.frame_id)
        self._memo = {key: value for key, value in self._memo.items() if key[0] in live and key[1] in live}
