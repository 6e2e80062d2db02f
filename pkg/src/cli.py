"""
Интерфейс командной строки.
Подкоманды gen, run, compare и study; результаты пишутся в <out>/<run_id>/.

Коды завершения: 0 - успех, 1 - ошибка использования, 2 - ошибка данных,
3 - ошибка симуляции.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from src.analytics.metrics import build_report, compare_table, report_table, timing_table
from src.analytics.studies import (
    buffer_size_sweep, capacity_reaching, distance_similarity_correlation, distance_similarity_study,
    distance_table, loss_table, loss_tolerance_study, sweep_medians,
)
from src.config import BUILTIN_DEFAULTS, RunConfig, component_seed, load_run_config, write_effective_config
from src.data.frame_io import gen_synthetic, load_sequence, sustaining_rate, write_pgm
from src.data.models import ExperimentReport, FrameSequence, LinkTrace
from src.errors import OrbBufError, OutputError, UsageError
from src.features.orb import OrbSimilarityModel, build_pattern, dump_pattern
from src.netsim.simulator import events_table, simulate
from src.netsim.trace import apply_interruption, constant_trace, load_trace
from src.utils.formatters import format_report_summary, format_table
from src.visualization.charts import (
    plot_buffer_sweep, plot_distance_study, plot_enqueue_times, plot_loss_tolerance, plot_similarity_profile,
)

# Настройка логгирования
logger = logging.getLogger(__name__)

STUDY_KINDS = ('distance', 'loss', 'buffer-size')
PARAMS_SIDECAR = 'params.env'


class CliArgumentParser(argparse.ArgumentParser):
    """Парсер, сообщающий об ошибке разбора исключением UsageError."""

    def error(self, message):
        raise UsageError(message)


def _flag(key: str) -> str:
    return '--' + key.replace('_', '-')


def build_parser() -> argparse.ArgumentParser:
    """
    Создает парсер аргументов.

    Каждый ключ конфигурации доступен флагом с тем же именем
    (fast_threshold <-> --fast-threshold).
    """
    common = CliArgumentParser(add_help=False)
    common.add_argument('--config', help='файл конфигурации key = value')
    common.add_argument('--verbose', action='store_true', help='подробный вывод (DEBUG)')
    for key, default in BUILTIN_DEFAULTS.items():
        common.add_argument(_flag(key), dest=key, default=None, metavar=key.upper(),
                            help=f"по умолчанию '{default}'")

    parser = CliArgumentParser(prog='orbbuf', description='Буферизация кадров с учетом сходства')
    subparsers = parser.add_subparsers(dest='command', parser_class=CliArgumentParser)
    subparsers.required = True
    subparsers.add_parser('gen', parents=[common], help='записать синтетическую последовательность в PGM')
    subparsers.add_parser('run', parents=[common], help='один прогон политики')
    subparsers.add_parser('compare', parents=[common], help='сравнение политик на одном сценарии')
    study = subparsers.add_parser('study', parents=[common], help='исследования')
    study.add_argument('kind', choices=STUDY_KINDS)
    return parser


def flag_values(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    """Значения флагов-ключей конфигурации; None - флаг не задан."""
    return {key: getattr(args, key, None) for key in BUILTIN_DEFAULTS}


def _run_dir(config: RunConfig, command: str) -> Path:
    run_dir = Path(config.out) / config.run_id(command)
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Не удалось создать директорию {run_dir}: {e}") from e
    return run_dir


def _write_csv(table: pd.DataFrame, path: Path) -> None:
    try:
        table.to_csv(path, index=False, lineterminator='\n')
    except OSError as e:
        raise OutputError(f"Не удалось записать {path}: {e}") from e
    logger.debug(f"Записан файл {path}")


def load_input_sequence(config: RunConfig) -> FrameSequence:
    """Последовательность из директории или синтетическая."""
    if config.sequence_dir:
        return load_sequence(config.sequence_dir, config.fps, config.compression_ratio)
    return gen_synthetic(config.synthetic, config.fps, config.compression_ratio)


def build_trace(config: RunConfig, sequence: FrameSequence) -> LinkTrace:
    """
    Трасса канала с наложенным прерыванием.

    Без файла трассы канал постоянный: link_rate, а если он не задан -
    link_factor x скорость, покрывающая поток кадров.
    """
    if config.trace:
        trace = load_trace(config.trace)
    else:
        rate = config.link_rate or config.link_factor * sustaining_rate(sequence)
        if rate <= 0:
            raise UsageError("Скорость канала должна быть положительной: задайте link_rate или trace")
        trace = constant_trace(rate)
    return apply_interruption(trace, config.interruption, config.fps)


def cmd_gen(config: RunConfig) -> Path:
    """
    Записывает синтетическую последовательность в директорию out.

    Файлы 000000.pgm, 000001.pgm, ... и параметры генерации в params.env.
    """
    if config.sequence_dir:
        raise UsageError("gen создает синтетическую последовательность, sequence_dir не нужен")
    out_dir = Path(config.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Не удалось создать директорию {out_dir}: {e}") from e

    sequence = gen_synthetic(config.synthetic, config.fps)
    for frame in sequence.frames:
        write_pgm(out_dir / f"{frame.id:06d}.pgm", frame)

    params = dict(config.synthetic.to_dict(), fps=config.fps)
    try:
        (out_dir / PARAMS_SIDECAR).write_text(
            "".join(f"{key} = {value}\n" for key, value in params.items()), encoding='utf-8')
    except OSError as e:
        raise OutputError(f"Не удалось записать {out_dir / PARAMS_SIDECAR}: {e}") from e

    logger.info(f"Записано {len(sequence)} кадров в {out_dir}")
    return out_dir


def _simulate_report(config: RunConfig, sequence: FrameSequence, trace: LinkTrace, policy: str,
                     model: OrbSimilarityModel):
    result = simulate(sequence, trace, policy, config.capacity,
                      seed=component_seed(config.seed, 'policy'), model=model)
    return result, build_report(result, sequence, model, policy=policy)


def cmd_run(config: RunConfig) -> ExperimentReport:
    """Один прогон: симуляция, отчет, CSV и SVG."""
    sequence = load_input_sequence(config)
    trace = build_trace(config, sequence)
    model = OrbSimilarityModel(config.features)
    run_dir = _run_dir(config, 'run')

    result, report = _simulate_report(config, sequence, trace, config.policy, model)

    _write_csv(report_table(report), run_dir / 'report.csv')
    _write_csv(events_table(result), run_dir / 'events.csv')
    _write_csv(timing_table(report), run_dir / 'timing.csv')
    plot_similarity_profile([report], run_dir / 'similarity.svg')
    plot_enqueue_times([report], run_dir / 'enqueue_times.svg')
    dump_pattern(build_pattern(config.features.pattern_seed, config.features.moment_radius),
                 run_dir / 'brief_pattern.txt')
    write_effective_config(config, run_dir)

    print(format_report_summary(report, str(run_dir)))
    return report


def cmd_compare(config: RunConfig) -> pd.DataFrame:
    """Сравнение политик на одной последовательности, трассе и зерне."""
    if len(config.policies) < 2:
        raise UsageError(f"Для сравнения нужно не меньше двух политик: {', '.join(config.policies)}")
    sequence = load_input_sequence(config)
    trace = build_trace(config, sequence)
    model = OrbSimilarityModel(config.features)
    run_dir = _run_dir(config, 'compare')

    reports: List[ExperimentReport] = []
    for policy in config.policies:
        _, report = _simulate_report(config, sequence, trace, policy, model)
        reports.append(report)

    table = compare_table(reports)
    _write_csv(table, run_dir / 'compare.csv')
    plot_similarity_profile(reports, run_dir / 'similarity.svg')
    write_effective_config(config, run_dir)

    print(format_table(table))
    print(f"📁 Результаты: {run_dir}")
    return table


def cmd_study(kind: str, config: RunConfig) -> pd.DataFrame:
    """Исследование distance, loss или buffer-size."""
    if kind not in STUDY_KINDS:
        raise UsageError(f"Неизвестное исследование '{kind}', допустимы: {', '.join(STUDY_KINDS)}")
    sequence = load_input_sequence(config)
    run_dir = _run_dir(config, f"study-{kind}")
    model = OrbSimilarityModel(config.features)

    if kind == 'distance':
        rows = distance_similarity_study(sequence, config.lo, config.hi, model)
        table = distance_table(rows)
        rho, means = distance_similarity_correlation(rows)
        _write_csv(table, run_dir / 'distance.csv')
        _write_csv(means, run_dir / 'distance_means.csv')
        plot_distance_study(rows, run_dir / 'distance.svg')
        print(f"Корреляция Спирмена (расстояние 1..30): {rho:.3f}")
    elif kind == 'loss':
        rows = loss_tolerance_study(sequence, config.max_k, model, threshold=config.loss_threshold)
        table = loss_table(rows)
        _write_csv(table, run_dir / 'loss.csv')
        plot_loss_tolerance(rows, config.max_k, run_dir / 'loss.svg')
        tolerant = int(table['breaking_k'].isna().sum())
        print(f"Позиций: {len(rows)}, устойчивых к потере {config.max_k} кадров: {tolerant}")
    else:
        trace = build_trace(config, sequence)
        table = buffer_size_sweep(sequence, trace, config.policies, config.capacities, config.seeds,
                                  feature_config=config.features, workers=config.workers)
        medians = sweep_medians(table)
        _write_csv(table, run_dir / 'buffer_size.csv')
        _write_csv(medians, run_dir / 'buffer_size_medians.csv')
        plot_buffer_sweep(medians, run_dir / 'buffer_size.svg')
        for policy in config.policies:
            print(f"{policy}: 90% уровня наибольшей емкости при L = {capacity_reaching(table, policy)}")

    write_effective_config(config, run_dir)
    print(f"📁 Результаты: {run_dir}")
    return table


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Разбирает аргументы, выполняет подкоманду и возвращает код завершения.

    Args:
        argv: аргументы без имени программы; по умолчанию sys.argv[1:]

    Returns:
        int: код завершения
    """
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        config = load_run_config(args.config, flag_values(args))
        logger.info(f"Команда {args.command}, run id {config.run_id(args.command)}")

        if args.command == 'gen':
            cmd_gen(config)
        elif args.command == 'run':
            cmd_run(config)
        elif args.command == 'compare':
            cmd_compare(config)
        else:
            cmd_study(args.kind, config)
        return 0
    except OrbBufError as e:
        logger.debug(f"Ошибка выполнения команды: {e}", exc_info=True)
        print(f"Ошибка: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Непредвиденная ошибка: {e}", exc_info=True)
        print(f"Ошибка: {e}", file=sys.stderr)
        return 1
