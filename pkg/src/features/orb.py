"""
ORB-подобные признаки: ориентация по центроиду яркости, управляемый BRIEF,
сопоставление дескрипторов по расстоянию Хэмминга и метрика сходства кадров.
"""

import logging
import threading
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from src.data.models import DESCRIPTOR_BITS, DESCRIPTOR_BYTES, FeatureConfig, FeatureSet, Frame, Keypoint
from src.errors import OutputError
from src.features.fast import detect_fast

# Настройка логгирования
logger = logging.getLogger(__name__)

# Полуразмер окна усреднения для тестов BRIEF (окно 5x5)
BOX_HALF = 2

# Таблица популяционного счета для numpy без bitwise_count
_POPCOUNT_TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


@lru_cache(maxsize=None)
def _disc_offsets(radius: int) -> np.ndarray:
    """Смещения (dy, dx) всех пикселей круга заданного радиуса."""
    ys, xs = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    inside = xs * xs + ys * ys <= radius * radius
    offsets = np.stack([ys[inside], xs[inside]], axis=1).astype(np.int64)
    offsets.setflags(write=False)
    return offsets


@lru_cache(maxsize=None)
def build_pattern(seed: int, radius: int) -> np.ndarray:
    """
    Строит шаблон из 256 пар тестовых точек BRIEF.

    Точки берутся из изотропного нормального распределения и отбрасываются
    вне круга радиуса radius, так что любой поворот оставляет их внутри.

    Args:
        seed: зерно генератора
        radius: радиус круга

    Returns:
        np.ndarray: int64 (256, 4) со столбцами x1, y1, x2, y2
    """
    rng = np.random.default_rng(seed)
    sigma = 2.0 * radius / 5.0
    pairs: List[np.ndarray] = []
    while len(pairs) < DESCRIPTOR_BITS:
        candidate = np.rint(rng.normal(0.0, sigma, 4)).astype(np.int64)
        p, q = candidate[:2], candidate[2:]
        if p @ p > radius * radius or q @ q > radius * radius:
            continue
        if np.array_equal(p, q):
            continue
        pairs.append(candidate)
    pattern = np.stack(pairs)
    pattern.setflags(write=False)
    return pattern


def dump_pattern(pattern: np.ndarray, path: Union[str, Path]) -> None:
    """Записывает шаблон BRIEF в текстовый файл, по одной паре на строку."""
    lines = ["# x1 y1 x2 y2"] + [" ".join(str(int(v)) for v in row) for row in pattern]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Не удалось записать шаблон BRIEF в {path}: {e}") from e


def orientations(pixels: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: int) -> np.ndarray:
    """
    Ориентация по центроиду яркости для набора точек.

    angle = atan2(m01, m10), моменты считаются по кругу радиуса radius
    в координатах относительно точки; нулевые моменты дают 0.

    Args:
        pixels: массив uint8 (h, w)
        xs, ys: координаты точек
        radius: радиус круга моментов

    Returns:
        np.ndarray: углы в (-pi, pi]
    """
    if len(xs) == 0:
        return np.zeros(0, dtype=np.float64)
    offsets = _disc_offsets(radius)
    dy = offsets[:, 0]
    dx = offsets[:, 1]
    patches = pixels[ys[:, None] + dy[None, :], xs[:, None] + dx[None, :]].astype(np.float64)
    m10 = patches @ dx.astype(np.float64)
    m01 = patches @ dy.astype(np.float64)
    angles = np.arctan2(m01, m10)
    angles[(m10 == 0) & (m01 == 0)] = 0.0
    angles[angles <= -np.pi] += 2 * np.pi
    return angles


def compute_orientation(frame: Frame, keypoint: Keypoint, patch_radius: int) -> float:
    """
    Ориентация одной точки.

    Ось y направлена вниз (строки изображения), поэтому угол растет по
    часовой стрелке на экране: поворот изображения на 90 градусов против
    часовой стрелки (np.rot90) уменьшает угол на pi/2.

    Args:
        frame: кадр
        keypoint: точка
        patch_radius: отступ детектора; круг моментов имеет радиус patch_radius - 3

    Returns:
        float: угол в радианах
    """
    angles = orientations(frame.pixels, np.array([keypoint.x]), np.array([keypoint.y]), patch_radius - 3)
    return float(angles[0])


def _integral_image(pixels: np.ndarray) -> np.ndarray:
    integral = np.zeros((pixels.shape[0] + 1, pixels.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = pixels.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    return integral


def _box_sums(integral: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Суммы по окну 5x5 с центрами (ys, xs)."""
    y0, y1 = ys - BOX_HALF, ys + BOX_HALF + 1
    x0, x1 = xs - BOX_HALF, xs + BOX_HALF + 1
    return integral[y1, x1] - integral[y0, x1] - integral[y1, x0] + integral[y0, x0]


def descriptors(pixels: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                angles: np.ndarray, pattern: np.ndarray) -> np.ndarray:
    """
    Управляемые дескрипторы BRIEF для набора точек.

    Шаблон поворачивается на угол точки, бит k равен 1, если среднее окна 5x5
    в p_k меньше среднего в q_k.

    Args:
        pixels: массив uint8 (h, w)
        xs, ys: координаты точек
        angles: ориентации точек
        pattern: шаблон (256, 4)

    Returns:
        np.ndarray: uint8 (n, 32)
    """
    n = len(xs)
    if n == 0:
        return np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8)

    integral = _integral_image(pixels)
    cos = np.cos(angles)[:, None]
    sin = np.sin(angles)[:, None]

    def steer(px: np.ndarray, py: np.ndarray):
        rx = np.rint(px[None, :] * cos - py[None, :] * sin).astype(np.int64)
        ry = np.rint(px[None, :] * sin + py[None, :] * cos).astype(np.int64)
        return xs[:, None] + rx, ys[:, None] + ry

    p_x, p_y = steer(pattern[:, 0], pattern[:, 1])
    q_x, q_y = steer(pattern[:, 2], pattern[:, 3])
    bits = _box_sums(integral, p_y, p_x) < _box_sums(integral, q_y, q_x)
    return np.packbits(bits, axis=1, bitorder='little')


def compute_descriptor(frame: Frame, keypoint: Keypoint, pattern: np.ndarray) -> np.ndarray:
    """
    Дескриптор одной точки.

    Args:
        frame: кадр
        keypoint: точка с ориентацией
        pattern: шаблон BRIEF

    Returns:
        np.ndarray: 32 байта (256 бит)
    """
    result = descriptors(frame.pixels, np.array([keypoint.x]), np.array([keypoint.y]),
                         np.array([keypoint.angle], dtype=np.float64), pattern)
    return result[0]


def extract(frame: Frame, config: FeatureConfig) -> FeatureSet:
    """
    Извлекает ORB-подобные признаки кадра.

    Args:
        frame: кадр
        config: параметры признаков

    Returns:
        FeatureSet: точки с ориентацией и параллельные дескрипторы
    """
    detected = detect_fast(frame, config)
    if not detected:
        logger.debug(f"Кадр {frame.id}: ключевые точки не найдены")
        return FeatureSet(frame_id=frame.id, keypoints=(),
                          descriptors=np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8))

    xs = np.array([kp.x for kp in detected], dtype=np.int64)
    ys = np.array([kp.y for kp in detected], dtype=np.int64)
    angles = orientations(frame.pixels, xs, ys, config.moment_radius)
    pattern = build_pattern(config.pattern_seed, config.moment_radius)
    packed = descriptors(frame.pixels, xs, ys, angles, pattern)
    packed.setflags(write=False)

    keypoints = tuple(
        Keypoint(x=kp.x, y=kp.y, response=kp.response, angle=float(angle))
        for kp, angle in zip(detected, angles)
    )
    return FeatureSet(frame_id=frame.id, keypoints=keypoints, descriptors=packed)


def popcount(values: np.ndarray) -> np.ndarray:
    """Число единичных бит в каждом элементе массива беззнаковых целых."""
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(values)
    as_bytes = values.view(np.uint8).reshape(values.shape + (values.dtype.itemsize,))
    return _POPCOUNT_TABLE[as_bytes].sum(axis=-1)


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Матрица расстояний Хэмминга между двумя наборами дескрипторов.

    Args:
        a: uint8 (n, 32)
        b: uint8 (m, 32)

    Returns:
        np.ndarray: int64 (n, m)
    """
    words_a = np.ascontiguousarray(a).view(np.uint64)
    words_b = np.ascontiguousarray(b).view(np.uint64)
    xor = words_a[:, None, :] ^ words_b[None, :, :]
    return popcount(xor).astype(np.int64).sum(axis=-1)


def mutual_matches(a: FeatureSet, b: FeatureSet, max_hamming: int) -> List[tuple]:
    """
    Взаимные ближайшие соседи с расстоянием не больше max_hamming.

    Ничьи в ближайшем соседе разрешаются в пользу меньшего индекса.

    Returns:
        List[tuple]: пары индексов (i в a, j в b), по возрастанию i
    """
    if len(a) == 0 or len(b) == 0:
        return []
    distances = hamming_matrix(a.descriptors, b.descriptors)
    nearest_ab = np.argmin(distances, axis=1)
    nearest_ba = np.argmin(distances, axis=0)
    rows = np.arange(len(a))
    mutual = (nearest_ba[nearest_ab] == rows) & (distances[rows, nearest_ab] <= max_hamming)
    return [(int(i), int(nearest_ab[i])) for i in rows[mutual]]


def similarity(a: FeatureSet, b: FeatureSet, config: FeatureConfig) -> int:
    """
    Сходство кадров: число взаимно сопоставленных дескрипторов.

    Args:
        a: признаки первого кадра
        b: признаки второго кадра
        config: параметры (используется match_max_hamming)

    Returns:
        int: число совпадений, 0 <= result <= min(|a|, |b|)
    """
    return len(mutual_matches(a, b, config.match_max_hamming))


class OrbSimilarityModel:
    """
    Метрика сходства кадров с кешем признаков по id кадра.

    Кеш общий для буфера, симулятора и отчетов; extractions считает
    фактические извлечения (промахи кеша).
    """

    def __init__(self, config: Optional[FeatureConfig] = None):
        self.config = config or FeatureConfig()
        self.extractions = 0
        self._cache: Dict[int, FeatureSet] = {}
        self._lock = threading.RLock()

    def features(self, frame: Frame) -> FeatureSet:
        """Возвращает признаки кадра, извлекая их при первом обращении."""
        with self._lock:
            cached = self._cache.get(frame.id)
            if cached is not None:
                return cached
            feature_set = extract(frame, self.config)
            self._cache[frame.id] = feature_set
            self.extractions += 1
            if len(feature_set) == 0:
                logger.warning(f"Кадр {frame.id} не содержит ключевых точек")
            return feature_set

    def compare(self, a: FeatureSet, b: FeatureSet) -> int:
        """Сходство двух наборов признаков."""
        return similarity(a, b, self.config)

    def similarity(self, a: Frame, b: Frame) -> int:
        """Сходство двух кадров."""
        return self.compare(self.features(a), self.features(b))

    def similarities(self, frames: Sequence[Frame]) -> List[int]:
        """Сходства соседних кадров в порядке следования."""
        return [self.similarity(a, b) for a, b in zip(frames, frames[1:])]

    def is_cached(self, frame_id: int) -> bool:
        with self._lock:
            return frame_id in self._cache

    def reset_counter(self) -> None:
        """Обнуляет счетчик извлечений, не трогая кеш."""
        with self._lock:
            self.extractions = 0

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self.extractions = 0
