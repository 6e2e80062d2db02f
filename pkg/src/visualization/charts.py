"""
Модуль для построения SVG-графиков по результатам экспериментов.
Одинаковые входные данные дают побайтно одинаковые файлы.
"""

import logging
import os
from typing import Sequence, Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns

from src.data.models import DistanceStudyRow, ExperimentReport, LossToleranceRow
from src.errors import OutputError

# Настройка логгирования
logger = logging.getLogger(__name__)

# Настройка стиля matplotlib
plt.style.use('ggplot')

# Фиксированная соль идентификаторов SVG и текст как текст, а не кривые
plt.rcParams['svg.hashsalt'] = 'orbbuf'
plt.rcParams['svg.fonttype'] = 'none'

NO_DATA_TEXT = 'нет данных'
FIGSIZE = (10, 6)

PathLike = Union[str, os.PathLike]


def _annotate_no_data(ax) -> None:
    ax.text(0.5, 0.5, NO_DATA_TEXT, transform=ax.transAxes, ha='center', va='center',
            fontsize=14, color='gray', gid='no-data')


def save_svg(fig, path: PathLike) -> None:
    """
    Сохраняет фигуру в SVG без даты создания и закрывает ее.

    Args:
        fig: фигура matplotlib
        path: путь к файлу
    """
    try:
        fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        raise OutputError(f"Не удалось записать график {path}: {e}") from e
    finally:
        plt.close(fig)
    logger.debug(f"График сохранен: {path}")


def similarity_profile_figure(reports: Sequence[ExperimentReport]):
    """
    Профиль сходства соседних полученных кадров, линия на политику.

    По оси X - id второго кадра пары, по оси Y - сходство.
    """
    fig, ax = plt.subplots(figsize=FIGSIZE)
    plotted = False
    for report in reports:
        if not report.adjacent_similarities:
            continue
        ax.plot(report.received_ids[1:], report.adjacent_similarities,
                linestyle='-', linewidth=1.2, label=report.policy, gid=f"profile-{report.policy}")
        plotted = True

    ax.set_title('Сходство соседних полученных кадров')
    ax.set_xlabel('Кадр')
    ax.set_ylabel('Сходство (число совпадений)')
    if plotted:
        ax.legend()
    else:
        _annotate_no_data(ax)
    ax.grid(True)
    fig.tight_layout()
    return fig


def plot_similarity_profile(reports: Sequence[ExperimentReport], path: PathLike) -> None:
    save_svg(similarity_profile_figure(reports), path)


def plot_enqueue_times(reports: Sequence[ExperimentReport], path: PathLike) -> None:
    """Время обработки поступления кадра по настенным часам, мс."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    plotted = False
    for report in reports:
        if report.enqueue_times:
            ax.plot(range(len(report.enqueue_times)), report.enqueue_times,
                    linewidth=0.8, label=report.policy)
            plotted = True
    ax.set_title('Время enqueue')
    ax.set_xlabel('Поступивший кадр')
    ax.set_ylabel('мс')
    if plotted:
        ax.legend()
    else:
        _annotate_no_data(ax)
    fig.tight_layout()
    save_svg(fig, path)


def plot_distance_study(rows: Sequence[DistanceStudyRow], path: PathLike) -> None:
    """
    Разброс сходства по расстоянию и гистограмма произведения расстояния на сходство.
    """
    fig, (ax_scatter, ax_hist) = plt.subplots(1, 2, figsize=(14, 6))
    if rows:
        df = pd.DataFrame({
            'distance': [r.distance for r in rows],
            'similarity': [r.similarity for r in rows],
            'product': [r.product for r in rows],
        })
        sns.scatterplot(data=df, x='distance', y='similarity', ax=ax_scatter, s=12)
        sns.histplot(data=df, x='product', bins=30, ax=ax_hist)
    else:
        _annotate_no_data(ax_scatter)
        _annotate_no_data(ax_hist)
    ax_scatter.set_title('Сходство и расстояние между кадрами')
    ax_scatter.set_xlabel('Расстояние (кадры)')
    ax_scatter.set_ylabel('Сходство')
    ax_hist.set_title('Произведение расстояния и сходства')
    ax_hist.set_xlabel('Расстояние x сходство')
    ax_hist.set_ylabel('Число пар')
    fig.tight_layout()
    save_svg(fig, path)


def plot_loss_tolerance(rows: Sequence[LossToleranceRow], max_k: int, path: PathLike) -> None:
    """Наименьшая длина потерянного интервала по позициям; устойчивые позиции - выше max_k."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if rows:
        starts = [r.start for r in rows]
        values = [r.breaking_k if r.breaking_k is not None else max_k + 1 for r in rows]
        ax.plot(starts, values, drawstyle='steps-mid', linewidth=1.0)
        ax.axhline(max_k + 1, color='gray', linestyle='--', linewidth=0.8, label='устойчиво')
        ax.legend()
    else:
        _annotate_no_data(ax)
    ax.set_title('Устойчивость к потере интервала кадров')
    ax.set_xlabel('Начало интервала')
    ax.set_ylabel('Длина интервала')
    fig.tight_layout()
    save_svg(fig, path)


def plot_buffer_sweep(medians: pd.DataFrame, path: PathLike) -> None:
    """
    Медиана минимального сходства по емкости буфера, линия на политику.

    Args:
        medians: столбцы policy, capacity, min_similarity
        path: путь к файлу
    """
    fig, ax = plt.subplots(figsize=FIGSIZE)
    data = medians.dropna(subset=['min_similarity'])
    if not data.empty:
        sns.lineplot(data=data, x='capacity', y='min_similarity', hue='policy',
                     marker='o', errorbar=None, ax=ax)
    else:
        _annotate_no_data(ax)
    ax.set_title('Влияние размера буфера')
    ax.set_xlabel('Емкость буфера (кадры)')
    ax.set_ylabel('Медиана минимального сходства')
    fig.tight_layout()
    save_svg(fig, path)
