"""
Модуль с функциями для форматирования вывода результатов.
"""

import pandas as pd
from typing import Dict, Optional

from src.data.models import ExperimentReport

METRIC_NAMES: Dict[str, str] = {
    'policy': 'Политика',
    'received': 'Получено кадров',
    'dropped': 'Вытеснено кадров',
    'min_similarity': 'Мин. сходство',
    'log_product_similarity': 'Лог. произведения сходств',
    'zero_similarity_count': 'Нулевых сходств',
    'max_loss_run': 'Макс. серия потерь',
    'extraction_count': 'Извлечений признаков',
    'capacity': 'Емкость',
    'seed': 'Зерно',
}


def get_metric_name(metric: str) -> str:
    """
    Возвращает русское название метрики.

    Args:
        metric: имя столбца

    Returns:
        str: название для вывода или само имя, если перевода нет
    """
    return METRIC_NAMES.get(metric, metric)


def _format_value(value) -> str:
    if value is None or (isinstance(value, float) and pd.isna(value)):
        return '-'
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def format_report_summary(report: ExperimentReport, run_dir: Optional[str] = None) -> str:
    """
    Форматирует сводку одного прогона для вывода в консоль.

    Args:
        report: отчет
        run_dir: директория с файлами прогона

    Returns:
        str: многострочная сводка
    """
    summary = f"📊 Прогон политики {report.policy}\n"
    for key, value in report.summary().items():
        if key == 'policy':
            continue
        summary += f"  {get_metric_name(key)}: {_format_value(value)}\n"
    if report.enqueue_times:
        summary += f"  Среднее/макс. время enqueue: {report.mean_enqueue_ms:.3f}/{report.max_enqueue_ms:.3f} мс\n"
    if run_dir:
        summary += f"📁 Результаты: {run_dir}\n"
    return summary


def format_table(table: pd.DataFrame) -> str:
    """
    Форматирует таблицу сравнения или серии прогонов.

    Args:
        table: таблица с английскими именами столбцов

    Returns:
        str: таблица с русскими заголовками
    """
    if table.empty:
        return "Нет данных"
    renamed = table.rename(columns=get_metric_name)
    return renamed.to_string(index=False, na_rep='-', float_format=lambda v: f"{v:.2f}")
