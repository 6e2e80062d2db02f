"""
Метрики качества прогона: сходство соседних полученных кадров,
серии потерь, гистограмма расстояний и сводные таблицы.
"""

import logging
from collections import Counter
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.data.models import ExperimentReport, FeatureConfig, FrameSequence, SimResult
from src.errors import DataError
from src.features.orb import OrbSimilarityModel

# Настройка логгирования
logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['metric', 'value']
COMPARE_COLUMNS = [
    'policy', 'received', 'dropped', 'min_similarity', 'log_product_similarity',
    'zero_similarity_count', 'max_loss_run', 'extraction_count',
]


def max_loss_run(received_ids: Sequence[int]) -> int:
    """
    Самая длинная серия подряд идущих отсутствующих id.

    Учитываются разрывы между полученными кадрами и разрыв перед первым
    полученным кадром; хвост после последнего полученного не считается.

    Args:
        received_ids: полученные id по возрастанию

    Returns:
        int: длина серии
    """
    if not received_ids:
        return 0
    longest = received_ids[0]
    for previous, current in zip(received_ids, received_ids[1:]):
        longest = max(longest, current - previous - 1)
    return longest


def distance_histogram(received_ids: Sequence[int]) -> Dict[int, int]:
    """Сколько раз встречается каждый шаг между соседними полученными id."""
    gaps = Counter(b - a for a, b in zip(received_ids, received_ids[1:]))
    return dict(sorted(gaps.items()))


def log_product(similarities: Sequence[int]) -> Tuple[float, int]:
    """
    Логарифм произведения сходств и число нулевых сходств.

    Нули не входят в сумму и считаются отдельно.

    Returns:
        Tuple[float, int]: (сумма log(max(s, 1)), число нулей)
    """
    values = np.asarray(similarities, dtype=np.float64)
    zeros = int(np.count_nonzero(values == 0))
    total = float(np.log(np.maximum(values, 1.0)).sum()) if len(values) else 0.0
    return total, zeros


def build_report(result: SimResult, sequence: FrameSequence,
                 model: Union[OrbSimilarityModel, FeatureConfig, None] = None,
                 policy: str = '') -> ExperimentReport:
    """
    Строит отчет по результату симуляции.

    Args:
        result: результат симуляции на этой последовательности
        sequence: исходная последовательность
        model: модель сходства или параметры признаков
        policy: имя политики для отчета

    Returns:
        ExperimentReport: метрики прогона
    """
    if model is None or isinstance(model, FeatureConfig):
        model = OrbSimilarityModel(model)

    by_id = {frame.id: frame for frame in sequence.frames}
    received_ids = result.received_ids
    missing = [frame_id for frame_id in received_ids if frame_id not in by_id]
    if missing:
        raise DataError(f"Полученные кадры {missing[:5]} отсутствуют в последовательности")

    frames = [by_id[frame_id] for frame_id in received_ids]
    similarities = model.similarities(frames)
    total, zeros = log_product(similarities)
    times = result.enqueue_times

    report = ExperimentReport(
        policy=policy,
        received_ids=list(received_ids),
        adjacent_similarities=similarities,
        min_similarity=min(similarities) if similarities else None,
        log_product_similarity=total,
        zero_similarity_count=zeros,
        max_loss_run=max_loss_run(received_ids),
        distance_histogram=distance_histogram(received_ids),
        extraction_count=result.extraction_count,
        dropped_count=len(result.dropped),
        mean_enqueue_ms=float(np.mean(times)) if times else 0.0,
        max_enqueue_ms=float(np.max(times)) if times else 0.0,
        enqueue_times=list(times),
    )
    if len(received_ids) < 2:
        logger.warning(f"Политика {policy}: получено меньше двух кадров, профиль сходства пуст")
    return report


def report_table(report: ExperimentReport) -> pd.DataFrame:
    """
    Отчет в виде таблицы metric,value (одна строка на метрику).

    Время enqueue по настенным часам сюда не входит.
    """
    rows = [
        ('policy', report.policy),
        ('received', len(report.received_ids)),
        ('dropped', report.dropped_count),
        ('min_similarity', '' if report.min_similarity is None else report.min_similarity),
        ('log_product_similarity', f"{report.log_product_similarity:.6f}"),
        ('zero_similarity_count', report.zero_similarity_count),
        ('max_loss_run', report.max_loss_run),
        ('extraction_count', report.extraction_count),
        ('received_ids', ' '.join(str(i) for i in report.received_ids)),
        ('adjacent_similarities', ' '.join(str(s) for s in report.adjacent_similarities)),
        ('distance_histogram', ' '.join(f"{d}:{c}" for d, c in report.distance_histogram.items())),
    ]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def timing_table(report: ExperimentReport) -> pd.DataFrame:
    """Время enqueue по каждому поступлению, мс."""
    return pd.DataFrame({
        'arrival': np.arange(len(report.enqueue_times)),
        'enqueue_ms': report.enqueue_times,
    })


def compare_table(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    """Сравнительная таблица: одна строка на политику."""
    return pd.DataFrame([report.summary() for report in reports], columns=COMPARE_COLUMNS)
