"""
Конфигурационный модуль.
Управляет значениями по умолчанию, переменными окружения ORBBUF_*,
файлом конфигурации `key = value` и итоговой конфигурацией прогона.

Приоритет: флаги командной строки > файл конфигурации > окружение > встроенные значения.
"""

import os
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from dotenv import load_dotenv, dotenv_values

from src.data.models import FeatureConfig, InterruptionSpec, SyntheticParams
from src.errors import OutputError, UsageError
from src.utils.validation import parse_int_list, parse_name_list, resolve_capacity, validate_range

# Настройка логгирования
logger = logging.getLogger(__name__)

# Загрузка переменных окружения из .env
load_dotenv()

ENV_PREFIX = 'ORBBUF_'

# Встроенные значения по умолчанию (строки, как в файле конфигурации)
BUILTIN_DEFAULTS: Dict[str, str] = {
    'sequence_dir': '',
    'width': '160',
    'height': '120',
    'n_frames': '1000',
    'dot_density': '0.02',
    'shift_px_per_frame': '1',
    'noise_sigma': '0.0',
    'fps': '25',
    'policy': 'orbbuf',
    'policies': 'drop-oldest,drop-youngest,random,orbbuf',
    'capacity': '1s',
    'capacities': '5,10,15,20,25,30,35',
    'trace': '',
    'link_rate': '0',
    'link_factor': '1.05',
    'intr_frame': '500',
    'intr_latency_ms': '1000',
    'intr_duration_frames': '50',
    'fast_threshold': '20',
    'max_keypoints': '500',
    'patch_radius': '18',
    'match_max_hamming': '64',
    'pattern_seed': '1234',
    'compression_ratio': '1.0',
    'seed': '0',
    'seeds': '0,1,2,3,4,5,6,7,8,9',
    'lo': '0',
    'hi': '100',
    'max_k': '30',
    'loss_threshold': '',
    'workers': '1',
    'out': 'results',
}

# Значения по умолчанию с учетом переменных окружения
DEFAULTS: Dict[str, str] = {
    key: os.getenv(f"{ENV_PREFIX}{key.upper()}", value) for key, value in BUILTIN_DEFAULTS.items()
}

SYNTHETIC_KEYS = ('width', 'height', 'n_frames', 'dot_density', 'shift_px_per_frame', 'noise_sigma')

# Компоненты, получающие собственное зерно из корневого
SEED_COMPONENTS = {'synthetic': 1, 'policy': 2}


def component_seed(root_seed: int, component: str) -> int:
    """
    Детерминированно выводит зерно компонента из корневого зерна.

    Args:
        root_seed: корневое зерно конфигурации
        component: 'synthetic' или 'policy'

    Returns:
        int: 32-битное зерно
    """
    sequence = np.random.SeedSequence([int(root_seed), SEED_COMPONENTS[component]])
    return int(sequence.generate_state(1)[0])


def read_config_file(path: str) -> Dict[str, str]:
    """
    Читает файл конфигурации `key = value`.

    Args:
        path: путь к файлу

    Returns:
        Dict[str, str]: значения по известным ключам
    """
    if not Path(path).is_file():
        raise UsageError(f"Файл конфигурации {path} не найден")
    raw = dotenv_values(path)
    values = {}
    for key, value in raw.items():
        normalized = key.strip().lower()
        if normalized not in BUILTIN_DEFAULTS:
            raise UsageError(f"Неизвестный ключ '{key}' в файле конфигурации {path}")
        values[normalized] = '' if value is None else value.strip()
    logger.debug(f"Прочитано {len(values)} значений из {path}")
    return values


def layer_values(file_values: Optional[Dict[str, str]] = None,
                 flag_values: Optional[Dict[str, Any]] = None) -> Tuple[Dict[str, str], set]:
    """
    Накладывает файл конфигурации и флаги на значения по умолчанию.

    Returns:
        Tuple[Dict[str, str], set]: итоговые значения и ключи, заданные явно
    """
    values = dict(DEFAULTS)
    explicit = set()
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in BUILTIN_DEFAULTS:
                raise UsageError(f"Неизвестный параметр '{key}'")
            values[key] = value if isinstance(value, str) else str(value)
            explicit.add(key)
    return values, explicit


def _parse(values: Dict[str, str], key: str, kind):
    text = values[key].strip()
    try:
        return kind(text)
    except ValueError as e:
        raise UsageError(f"Некорректное значение {key} = '{values[key]}'") from e


def _optional_float(text: str) -> Optional[float]:
    return float(text) if text.strip() else None


@dataclass(frozen=True)
class RunConfig:
    """Итоговая конфигурация прогона."""
    sequence_dir: str
    synthetic: SyntheticParams
    fps: float
    policy: str
    policies: Tuple[str, ...]
    capacity: int
    capacity_spec: str
    capacities: Tuple[int, ...]
    trace: str
    link_rate: float
    link_factor: float
    interruption: InterruptionSpec
    features: FeatureConfig
    compression_ratio: float
    seed: int
    seeds: Tuple[int, ...]
    lo: int
    hi: int
    max_k: int
    loss_threshold: Optional[float]
    workers: int
    out: str
    values: Tuple[Tuple[str, str], ...]

    @classmethod
    def from_values(cls, values: Dict[str, str], explicit: Iterable[str] = ()) -> 'RunConfig':
        """
        Строит конфигурацию из строковых значений.

        Args:
            values: значения по всем ключам
            explicit: ключи, заданные файлом или флагами

        Returns:
            RunConfig: проверенная конфигурация
        """
        explicit = set(explicit)
        sequence_dir = values['sequence_dir'].strip()
        clashing = sorted(explicit.intersection(SYNTHETIC_KEYS))
        if sequence_dir and clashing:
            raise UsageError(
                f"Источник последовательности должен быть один: sequence_dir задан вместе с {', '.join(clashing)}"
            )

        fps = validate_range(_parse(values, 'fps', float), 'fps', min_val=1e-9)
        seed = _parse(values, 'seed', int)
        synthetic = SyntheticParams(
            width=_parse(values, 'width', int),
            height=_parse(values, 'height', int),
            n_frames=_parse(values, 'n_frames', int),
            dot_density=_parse(values, 'dot_density', float),
            shift_px_per_frame=_parse(values, 'shift_px_per_frame', int),
            noise_sigma=_parse(values, 'noise_sigma', float),
            seed=component_seed(seed, 'synthetic'),
        )
        features = FeatureConfig(
            fast_threshold=_parse(values, 'fast_threshold', int),
            max_keypoints=_parse(values, 'max_keypoints', int),
            patch_radius=_parse(values, 'patch_radius', int),
            match_max_hamming=_parse(values, 'match_max_hamming', int),
            pattern_seed=_parse(values, 'pattern_seed', int),
        )
        interruption = InterruptionSpec(
            at_frame=_parse(values, 'intr_frame', int),
            latency_ms=_parse(values, 'intr_latency_ms', float),
            duration_frames=_parse(values, 'intr_duration_frames', int),
        )

        from src.buffering.policies import POLICY_NAMES
        policy = values['policy'].strip().lower()
        policies = tuple(p.lower() for p in parse_name_list(values['policies']))
        for name in (policy,) + policies:
            if name not in POLICY_NAMES:
                raise UsageError(f"Неизвестная политика '{name}', допустимы: {', '.join(POLICY_NAMES)}")

        compression_ratio = _parse(values, 'compression_ratio', float)
        validate_range(compression_ratio, 'compression_ratio', min_val=1e-9, max_val=1.0)
        link_rate = validate_range(_parse(values, 'link_rate', float), 'link_rate', min_val=0.0)
        link_factor = validate_range(_parse(values, 'link_factor', float), 'link_factor', min_val=1e-9)
        capacities = tuple(parse_int_list(values['capacities'], 'capacities'))
        if any(c < 1 for c in capacities):
            raise UsageError(f"Емкости буфера должны быть не меньше 1: {values['capacities']}")
        workers = validate_range(_parse(values, 'workers', int), 'workers', min_val=1)

        return cls(
            sequence_dir=sequence_dir,
            synthetic=synthetic,
            fps=fps,
            policy=policy,
            policies=policies,
            capacity=resolve_capacity(values['capacity'], fps),
            capacity_spec=values['capacity'].strip(),
            capacities=capacities,
            trace=values['trace'].strip(),
            link_rate=link_rate,
            link_factor=link_factor,
            interruption=interruption,
            features=features,
            compression_ratio=compression_ratio,
            seed=seed,
            seeds=tuple(parse_int_list(values['seeds'], 'seeds')),
            lo=_parse(values, 'lo', int),
            hi=_parse(values, 'hi', int),
            max_k=_parse(values, 'max_k', int),
            loss_threshold=_parse(values, 'loss_threshold', _optional_float),
            workers=workers,
            out=values['out'].strip() or 'results',
            values=tuple(sorted((k, v.strip()) for k, v in values.items())),
        )

    def effective_items(self) -> List[Tuple[str, str]]:
        """Итоговые значения без каталога результатов, по алфавиту."""
        return [(key, value) for key, value in self.values if key != 'out']

    def run_id(self, command: str = '') -> str:
        """
        Идентификатор прогона: первые 12 символов SHA-256 итоговой конфигурации.

        Args:
            command: имя подкоманды (входит в хеш)
        """
        lines = [f"command={command}"] + [f"{key}={value}" for key, value in self.effective_items()]
        return hashlib.sha256("\n".join(lines).encode('utf-8')).hexdigest()[:12]

    def to_env_text(self) -> str:
        """Итоговая конфигурация в формате файла конфигурации."""
        return "".join(f"{key} = {value}\n" for key, value in self.effective_items())


def load_run_config(config_path: Optional[str] = None,
                    flag_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Собирает итоговую конфигурацию из всех источников.

    Args:
        config_path: путь к файлу конфигурации
        flag_values: значения флагов (None - флаг не задан)

    Returns:
        RunConfig: итоговая конфигурация
    """
    file_values = read_config_file(config_path) if config_path else {}
    values, explicit = layer_values(file_values, flag_values)
    return RunConfig.from_values(values, explicit)


def write_effective_config(config: RunConfig, run_dir: Path) -> Path:
    """Записывает итоговую конфигурацию в effective_config.env."""
    path = Path(run_dir) / 'effective_config.env'
    try:
        path.write_text(config.to_env_text(), encoding='utf-8')
    except OSError as e:
        raise OutputError(f"Не удалось записать {path}: {e}") from e
    return path


