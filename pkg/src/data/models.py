"""
Модуль с определениями структур данных.
Содержит классы для кадров, признаков, трасс сети и результатов экспериментов.
"""

import math
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Any, Tuple

import numpy as np

from src.errors import DataError, TraceFormatError, UsageError

# Длина дескриптора в битах и байтах
DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = DESCRIPTOR_BITS // 8


@dataclass(frozen=True, eq=False)
class Frame:
    """Один полутоновый кадр с моделируемым размером сообщения."""
    id: int
    t_gen: float  # мс
    width: int
    height: int
    pixels: np.ndarray  # uint8, форма (height, width)
    encoded_size: int  # байты

    def __post_init__(self):
        if self.id < 0:
            raise DataError(f"Идентификатор кадра должен быть неотрицательным: {self.id}")
        if self.pixels.shape != (self.height, self.width):
            raise DataError(
                f"Размер массива пикселей {self.pixels.shape} не равен {self.height}x{self.width}"
            )
        if self.encoded_size <= 0:
            raise DataError(f"encoded_size должен быть положительным: {self.encoded_size}")

    def same_pixels(self, other: 'Frame') -> bool:
        """Проверяет попиксельное совпадение двух кадров."""
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Упорядоченная последовательность кадров с частотой fps."""
    frames: Tuple[Frame, ...]
    fps: float

    def __post_init__(self):
        if self.fps <= 0:
            raise DataError(f"fps должен быть положительным: {self.fps}")
        period = 1000.0 / self.fps
        previous = -1
        for frame in self.frames:
            if frame.id <= previous:
                raise DataError(f"Идентификаторы кадров должны строго возрастать: {frame.id} после {previous}")
            if not math.isclose(frame.t_gen, frame.id * period, rel_tol=1e-9, abs_tol=1e-9):
                raise DataError(f"t_gen кадра {frame.id} не равен id x 1000/fps")
            previous = frame.id

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]

    @property
    def period_ms(self) -> float:
        """Интервал между кадрами в миллисекундах."""
        return 1000.0 / self.fps

    def ids(self) -> List[int]:
        return [frame.id for frame in self.frames]


@dataclass(frozen=True)
class SyntheticParams:
    """Параметры генератора синтетической последовательности со сдвигом."""
    width: int = 160
    height: int = 120
    n_frames: int = 300
    dot_density: float = 0.02
    shift_px_per_frame: int = 1
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise UsageError(f"Размер кадра должен быть положительным: {self.width}x{self.height}")
        if self.n_frames <= 0:
            raise UsageError(f"n_frames должен быть положительным: {self.n_frames}")
        if not 0 < self.dot_density < 1:
            raise UsageError(f"dot_density должен лежать в (0, 1): {self.dot_density}")
        if self.shift_px_per_frame < 0 or self.noise_sigma < 0:
            raise UsageError("Сдвиг и уровень шума не могут быть отрицательными")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SyntheticParams':
        """Создает экземпляр класса из словаря (значения могут быть строками)."""
        defaults = cls()
        return cls(
            width=int(data.get('width', defaults.width)),
            height=int(data.get('height', defaults.height)),
            n_frames=int(data.get('n_frames', defaults.n_frames)),
            dot_density=float(data.get('dot_density', defaults.dot_density)),
            shift_px_per_frame=int(data.get('shift_px_per_frame', defaults.shift_px_per_frame)),
            noise_sigma=float(data.get('noise_sigma', defaults.noise_sigma)),
            seed=int(data.get('seed', defaults.seed)),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Преобразует экземпляр класса в словарь."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Keypoint:
    """Угловая точка FAST с ориентацией."""
    x: int
    y: int
    response: float  # сумма модулей разностей по непрерывной дуге
    angle: float = 0.0  # радианы, (-pi, pi]


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Ключевые точки кадра и параллельный массив 256-битных дескрипторов."""
    frame_id: int
    keypoints: Tuple[Keypoint, ...]
    descriptors: np.ndarray  # uint8, форма (n, 32)

    def __post_init__(self):
        if self.descriptors.shape != (len(self.keypoints), DESCRIPTOR_BYTES):
            raise DataError(
                f"Число дескрипторов {self.descriptors.shape} не соответствует числу точек {len(self.keypoints)}"
            )

    def __len__(self) -> int:
        return len(self.keypoints)


@dataclass(frozen=True)
class FeatureConfig:
    """Параметры детектора FAST и сопоставления дескрипторов."""
    fast_threshold: int = 20
    max_keypoints: int = 500
    patch_radius: int = 18
    match_max_hamming: int = 64
    pattern_seed: int = 1234

    def __post_init__(self):
        if self.fast_threshold <= 0:
            raise UsageError(f"fast_threshold должен быть положительным: {self.fast_threshold}")
        if self.max_keypoints <= 0:
            raise UsageError(f"max_keypoints должен быть положительным: {self.max_keypoints}")
        if self.patch_radius < 6:
            raise UsageError(f"patch_radius слишком мал: {self.patch_radius}")
        if not 0 <= self.match_max_hamming <= DESCRIPTOR_BITS:
            raise UsageError(f"match_max_hamming должен лежать в [0, 256]: {self.match_max_hamming}")

    @property
    def moment_radius(self) -> int:
        """Радиус круга, по которому считаются моменты и тестовые точки."""
        return self.patch_radius - 3

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FeatureConfig':
        """Создает экземпляр класса из словаря."""
        defaults = cls()
        return cls(
            fast_threshold=int(data.get('fast_threshold', defaults.fast_threshold)),
            max_keypoints=int(data.get('max_keypoints', defaults.max_keypoints)),
            patch_radius=int(data.get('patch_radius', defaults.patch_radius)),
            match_max_hamming=int(data.get('match_max_hamming', defaults.match_max_hamming)),
            pattern_seed=int(data.get('pattern_seed', defaults.pattern_seed)),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Преобразует экземпляр класса в словарь."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class LinkTrace:
    """Кусочно-постоянная пропускная способность канала (t_ms, байт/с)."""
    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise TraceFormatError("Трасса не содержит ни одной точки")
        previous = None
        for t_ms, rate in self.points:
            if previous is not None and t_ms <= previous:
                raise TraceFormatError(f"Время в трассе должно строго возрастать: {t_ms} после {previous}")
            if rate < 0:
                raise TraceFormatError(f"Отрицательная пропускная способность {rate} в момент {t_ms}")
            previous = t_ms

    @property
    def times(self) -> List[float]:
        return [t for t, _ in self.points]


@dataclass(frozen=True)
class InterruptionSpec:
    """Прерывание сети: начало на кадре at_frame, задержка T и длительность L кадров."""
    at_frame: int
    latency_ms: float
    duration_frames: int

    def __post_init__(self):
        if self.at_frame < 0 or self.latency_ms < 0 or self.duration_frames < 0:
            raise UsageError("Параметры прерывания должны быть неотрицательными")

    def window_ms(self, fps: float) -> Tuple[float, float]:
        """Возвращает полуинтервал [t0, t1) нулевой пропускной способности."""
        period = 1000.0 / fps
        start = self.at_frame * period
        return start, start + self.latency_ms + self.duration_frames * period


@dataclass
class SimResult:
    """Результат одного прогона симулятора."""
    received: List[Tuple[int, float]]  # (id кадра, время прибытия, мс)
    dropped: List[Tuple[int, float]]  # (id кадра, время вытеснения, мс)
    extraction_count: int
    in_flight: Optional[int] = None
    buffered: List[int] = field(default_factory=list)
    # Время работы enqueue по настенным часам, мс; не участвует в сравнении
    enqueue_times: List[float] = field(default_factory=list, compare=False)

    @property
    def received_ids(self) -> List[int]:
        return [frame_id for frame_id, _ in self.received]

    @property
    def dropped_ids(self) -> List[int]:
        return [frame_id for frame_id, _ in self.dropped]


@dataclass
class ExperimentReport:
    """Метрики качества одного прогона."""
    policy: str
    received_ids: List[int]
    adjacent_similarities: List[int]
    min_similarity: Optional[int]  # None, если получено меньше двух кадров
    log_product_similarity: float
    zero_similarity_count: int
    max_loss_run: int
    distance_histogram: Dict[int, int]
    extraction_count: int
    dropped_count: int
    mean_enqueue_ms: float = 0.0
    max_enqueue_ms: float = 0.0
    enqueue_times: List[float] = field(default_factory=list, compare=False)

    def summary(self) -> Dict[str, Any]:
        """Краткая сводка для таблиц сравнения и серий экспериментов."""
        return {
            'policy': self.policy,
            'received': len(self.received_ids),
            'dropped': self.dropped_count,
            'min_similarity': self.min_similarity,
            'log_product_similarity': self.log_product_similarity,
            'zero_similarity_count': self.zero_similarity_count,
            'max_loss_run': self.max_loss_run,
            'extraction_count': self.extraction_count,
        }


@dataclass(frozen=True)
class DistanceStudyRow:
    """Пара кадров в исследовании расстояние-сходство."""
    distance: int
    first_id: int
    second_id: int
    similarity: int

    @property
    def product(self) -> int:
        return self.distance * self.similarity


@dataclass(frozen=True)
class LossToleranceRow:
    """Минимальная длина потерянного интервала, нарушающая порог сходства."""
    start: int
    breaking_k: Optional[int]  # None - позиция устойчива до max_k

    @property
    def tolerant(self) -> bool:
        return self.breaking_k is None
