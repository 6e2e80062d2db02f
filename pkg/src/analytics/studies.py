"""
Исследования на последовательностях кадров:
зависимость сходства от расстояния, устойчивость к потере интервалов
и серия прогонов с разными размерами буфера.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.analytics.metrics import build_report
from src.data.models import (
    DistanceStudyRow, FeatureConfig, FrameSequence, LinkTrace, LossToleranceRow,
)
from src.errors import SweepRunError, UsageError
from src.features.orb import OrbSimilarityModel
from src.multiprocessing import run_tasks, set_worker_context, worker_context
from src.netsim.simulator import simulate

# Настройка логгирования
logger = logging.getLogger(__name__)

# Доля медианы самосходства, ниже которой кадр считается потерянным для трекинга
DEFAULT_LOSS_FRACTION = 0.25

SWEEP_COLUMNS = [
    'policy', 'capacity', 'seed', 'received', 'dropped', 'min_similarity',
    'log_product_similarity', 'zero_similarity_count', 'max_loss_run', 'extraction_count',
]


def distance_similarity_study(sequence: FrameSequence, lo: int, hi: int,
                              model: Optional[OrbSimilarityModel] = None) -> List[DistanceStudyRow]:
    """
    Сходство для каждой неупорядоченной пары кадров с индексами в [lo, hi].

    Args:
        sequence: последовательность
        lo: первый индекс диапазона
        hi: последний индекс диапазона (включительно)
        model: модель сходства

    Returns:
        List[DistanceStudyRow]: строки, отсортированные по (расстояние, первый id)
    """
    if lo < 0 or hi >= len(sequence):
        raise UsageError(f"Диапазон [{lo}, {hi}] выходит за пределы последовательности из {len(sequence)} кадров")
    if hi - lo < 2:
        raise UsageError(f"Диапазон [{lo}, {hi}] слишком мал: нужно не меньше трех кадров")
    model = model or OrbSimilarityModel()

    frames = sequence.frames[lo:hi + 1]
    rows = []
    for i, first in enumerate(frames):
        for second in frames[i + 1:]:
            rows.append(DistanceStudyRow(
                distance=second.id - first.id,
                first_id=first.id,
                second_id=second.id,
                similarity=model.similarity(first, second),
            ))
    rows.sort(key=lambda row: (row.distance, row.first_id))
    logger.info(f"Исследование расстояний: {len(rows)} пар кадров в [{lo}, {hi}]")
    return rows


def distance_table(rows: Sequence[DistanceStudyRow]) -> pd.DataFrame:
    """Строки исследования расстояний в виде таблицы."""
    return pd.DataFrame(
        [(r.distance, r.first_id, r.second_id, r.similarity, r.product) for r in rows],
        columns=['distance', 'first_id', 'second_id', 'similarity', 'product'],
    )


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Ранговая корреляция Спирмена (средние ранги для равных значений)."""
    # DataFrame.corr считает spearman без scipy, в отличие от Series.corr
    frame = pd.DataFrame({'x': list(x), 'y': list(y)}, dtype=float)
    if len(frame) < 2:
        return math.nan
    return float(frame.corr(method='spearman').at['x', 'y'])


def distance_similarity_correlation(rows: Sequence[DistanceStudyRow],
                                    max_distance: int = 30) -> Tuple[float, pd.DataFrame]:
    """
    Корреляция расстояния и среднего сходства.

    Args:
        rows: строки исследования расстояний
        max_distance: наибольшее учитываемое расстояние

    Returns:
        Tuple[float, pd.DataFrame]: коэффициент Спирмена и таблица distance, mean_similarity
    """
    table = distance_table(rows)
    table = table[table['distance'] <= max_distance]
    means = table.groupby('distance', sort=True)['similarity'].mean().reset_index()
    means.columns = ['distance', 'mean_similarity']
    rho = spearman(means['distance'], means['mean_similarity'])
    logger.info(f"Корреляция Спирмена расстояние-сходство: {rho:.3f}")
    return rho, means


def self_similarity_threshold(sequence: FrameSequence, model: OrbSimilarityModel,
                              fraction: float = DEFAULT_LOSS_FRACTION) -> float:
    """Порог по умолчанию: доля медианы самосходства кадров."""
    values = [model.similarity(frame, frame) for frame in sequence.frames]
    return fraction * float(np.median(values)) if values else 0.0


def loss_tolerance_study(sequence: FrameSequence, max_k: int,
                         model: Optional[OrbSimilarityModel] = None,
                         threshold: Optional[float] = None) -> List[LossToleranceRow]:
    """
    Для каждой позиции i - наименьшая длина k потерянного интервала [i, i+k),
    при которой сходство кадров i-1 и i+k падает ниже порога.

    Args:
        sequence: последовательность
        max_k: наибольшая проверяемая длина интервала
        model: модель сходства
        threshold: порог; по умолчанию 25% медианы самосходства

    Returns:
        List[LossToleranceRow]: по строке на позицию 1..n-max_k-1
    """
    if max_k < 1:
        raise UsageError(f"max_k должен быть положительным: {max_k}")
    n = len(sequence)
    if n <= max_k + 2:
        raise UsageError(f"Последовательность из {n} кадров слишком коротка для max_k={max_k}")
    model = model or OrbSimilarityModel()
    if threshold is None:
        threshold = self_similarity_threshold(sequence, model)

    frames = sequence.frames
    rows = []
    for start in range(1, n - max_k):
        breaking = None
        for k in range(1, max_k + 1):
            if model.similarity(frames[start - 1], frames[start + k]) < threshold:
                breaking = k
                break
        rows.append(LossToleranceRow(start=frames[start].id, breaking_k=breaking))

    tolerant = sum(1 for row in rows if row.tolerant)
    logger.info(f"Исследование потерь: {len(rows)} позиций, устойчивых {tolerant}, порог {threshold:.1f}")
    return rows


def loss_table(rows: Sequence[LossToleranceRow]) -> pd.DataFrame:
    """Строки исследования потерь; устойчивые позиции имеют пустой breaking_k."""
    return pd.DataFrame(
        {'start': [r.start for r in rows],
         'breaking_k': pd.array([r.breaking_k for r in rows], dtype='Int64')},
    )


def _sweep_run(policy: str, capacity: int, seed: int) -> Dict[str, object]:
    """Один прогон серии; данные берутся из контекста рабочего процесса."""
    context = worker_context()
    sequence = context['sequence']
    model = context.get('model')
    if model is None:
        model = OrbSimilarityModel(context['feature_config'])
        context['model'] = model
    try:
        result = simulate(sequence, context['trace'], policy, capacity,
                          size_model=context.get('size_model'), seed=seed, model=model)
        report = build_report(result, sequence, model, policy=policy)
    except Exception as e:
        raise SweepRunError(policy, capacity, seed, e) from e
    row = report.summary()
    row.update(capacity=capacity, seed=seed)
    return row


def buffer_size_sweep(sequence: FrameSequence, trace: LinkTrace, policies: Sequence[str],
                      capacities: Sequence[int], seeds: Sequence[int],
                      feature_config: Optional[FeatureConfig] = None,
                      size_model=None, workers: int = 1) -> pd.DataFrame:
    """
    Полный перебор (политика, емкость, зерно).

    Args:
        sequence: последовательность
        trace: трасса канала
        policies: имена политик
        capacities: емкости буфера
        seeds: зерна
        feature_config: параметры признаков
        size_model: модель размера сообщения (функция верхнего уровня модуля)
        workers: число процессов

    Returns:
        pd.DataFrame: одна строка на прогон
    """
    if not policies or not capacities or not seeds:
        raise UsageError("Списки политик, емкостей и зерен не должны быть пустыми")
    tasks = [(policy, int(capacity), int(seed))
             for policy in policies for capacity in capacities for seed in seeds]
    logger.info(f"Серия прогонов: {len(tasks)} комбинаций, процессов {workers}")

    rows = run_tasks(
        _sweep_run, tasks, workers=workers,
        initializer=set_worker_context,
        initkwargs=dict(sequence=sequence, trace=trace,
                        feature_config=feature_config or FeatureConfig(),
                        size_model=size_model),
    )
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    table['min_similarity'] = pd.to_numeric(table['min_similarity'])
    return table


def capacity_reaching(table: pd.DataFrame, policy: str, fraction: float = 0.9) -> Optional[int]:
    """
    Наименьшая емкость, на которой медиана минимального сходства политики
    достигает доли fraction от значения при наибольшей емкости.

    Args:
        table: результат buffer_size_sweep
        policy: имя политики
        fraction: доля

    Returns:
        Optional[int]: емкость или None, если данных нет
    """
    subset = table[table['policy'] == policy]
    if subset.empty:
        return None
    medians = subset.groupby('capacity')['min_similarity'].median().sort_index()
    target = fraction * medians.iloc[-1]
    reaching = medians[medians >= target]
    if reaching.empty:
        return None
    return int(reaching.index[0])


def sweep_medians(table: pd.DataFrame) -> pd.DataFrame:
    """Медиана минимального сходства по (политика, емкость)."""
    return (table.groupby(['policy', 'capacity'], sort=True)['min_similarity']
            .median().reset_index())
