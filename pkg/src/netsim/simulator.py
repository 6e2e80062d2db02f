"""
Событийный симулятор конвейера производитель -> буфер -> канал -> приемник.

Одно соединение передает одно сообщение за раз, остальные ждут в буфере.
События двух видов: генерация кадра и окончание передачи; при равном времени
генерация обрабатывается раньше.
"""

import heapq
import logging
import math
import time
from typing import Callable, List, Optional, Tuple, Union

import pandas as pd

from src.buffering.policies import make_policy
from src.buffering.send_buffer import SendBuffer, SimilarityModel
from src.data.models import Frame, FrameSequence, LinkTrace, SimResult
from src.errors import SimulationError, UsageError
from src.features.orb import OrbSimilarityModel
from src.netsim.trace import transmit_finish_time

# Настройка логгирования
logger = logging.getLogger(__name__)

# Виды событий; меньшее значение обрабатывается раньше при равном времени
GENERATION = 0
COMPLETION = 1

EVENT_COLUMNS = ['event', 'frame_id', 'time_ms']


def _frame_size(frame: Frame) -> int:
    return frame.encoded_size


def simulate(sequence: FrameSequence, trace: LinkTrace, policy, capacity: int,
             size_model: Optional[Callable[[Frame], int]] = None, seed: int = 0,
             model: Optional[SimilarityModel] = None,
             track_scores: Optional[bool] = None) -> SimResult:
    """
    Прогоняет последовательность через буфер и канал.

    Args:
        sequence: кадры
        trace: пропускная способность канала
        policy: имя политики или объект политики
        capacity: емкость буфера в кадрах
        size_model: размер сообщения кадра; по умолчанию frame.encoded_size
        seed: зерно генератора политики random (если policy задана именем)
        model: модель сходства для буфера
        track_scores: отслеживать оценки; по умолчанию - если политика их использует

    Returns:
        SimResult: полученные, вытесненные, оставшиеся кадры и число извлечений
    """
    if capacity < 1:
        raise UsageError(f"Емкость буфера должна быть не меньше 1: {capacity}")
    if isinstance(policy, str):
        policy = make_policy(policy, seed)
    if track_scores is None:
        track_scores = policy.uses_scores
    if policy.uses_scores and not track_scores:
        raise UsageError(f"Политика {policy.name} требует отслеживания оценок")
    if track_scores and model is None:
        model = OrbSimilarityModel()
    size_of = size_model or _frame_size

    buffer = SendBuffer(capacity, model=model, track_scores=track_scores)
    events: List[Tuple[float, int, int, Frame]] = []
    sequence_number = 0
    for frame in sequence.frames:
        events.append((frame.t_gen, GENERATION, sequence_number, frame))
        sequence_number += 1
    heapq.heapify(events)

    received: List[Tuple[int, float]] = []
    dropped: List[Tuple[int, float]] = []
    enqueue_times: List[float] = []
    in_flight: Optional[Frame] = None

    def start_next(now: float) -> Optional[Frame]:
        nonlocal sequence_number
        frame = buffer.dequeue_for_send()
        if frame is None:
            return None
        size = size_of(frame)
        if size <= 0:
            raise SimulationError(f"Размер сообщения кадра {frame.id} должен быть положительным: {size}")
        finish = transmit_finish_time(trace, now, size)
        if not math.isinf(finish):
            heapq.heappush(events, (finish, COMPLETION, sequence_number, frame))
            sequence_number += 1
        return frame

    while events:
        now, kind, _, frame = heapq.heappop(events)
        if kind == GENERATION:
            started = time.perf_counter()
            outcome = buffer.enqueue(frame, policy)
            enqueue_times.append((time.perf_counter() - started) * 1000.0)
            if outcome.dropped is not None:
                dropped.append((outcome.dropped, now))
            if in_flight is None:
                in_flight = start_next(now)
        else:
            received.append((frame.id, now))
            in_flight = start_next(now)

    result = SimResult(
        received=received,
        dropped=dropped,
        extraction_count=len(buffer.extracted_ids),
        in_flight=in_flight.id if in_flight is not None else None,
        buffered=buffer.ids(),
        enqueue_times=enqueue_times,
    )
    logger.info(
        f"Симуляция {policy.name} (L={capacity}) завершена: получено {len(received)}, "
        f"вытеснено {len(dropped)}, извлечений признаков {result.extraction_count}"
    )
    return result


def events_table(result: SimResult) -> pd.DataFrame:
    """
    Таблица событий прогона, одна строка на кадр.

    Args:
        result: результат симуляции

    Returns:
        pd.DataFrame: столбцы event, frame_id, time_ms
    """
    rows = [('received', frame_id, t) for frame_id, t in result.received]
    rows += [('dropped', frame_id, t) for frame_id, t in result.dropped]
    rows += [('buffered', frame_id, float('nan')) for frame_id in result.buffered]
    if result.in_flight is not None:
        rows.append(('in_flight', result.in_flight, float('nan')))
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def message_loss_probability(p_packet: float, n_packets: Union[int, float]) -> float:
    """
    Вероятность, что сообщение из n пакетов будет неполным при потере пакетов p.

    Args:
        p_packet: вероятность потери пакета, [0, 1]
        n_packets: число пакетов в сообщении, >= 0

    Returns:
        float: 1 - (1 - p)^n
    """
    if not 0 <= p_packet <= 1:
        raise UsageError(f"Вероятность потери пакета должна лежать в [0, 1]: {p_packet}")
    if n_packets < 0:
        raise UsageError(f"Число пакетов не может быть отрицательным: {n_packets}")
    return 1.0 - (1.0 - p_packet) ** n_packets
