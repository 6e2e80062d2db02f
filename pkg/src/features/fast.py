"""
Детектор углов FAST-9/16.
Сегментный тест по 16-пиксельной окружности Брезенхэма радиуса 3,
отклик - сумма модулей разностей по непрерывной дуге, подавление немаксимумов 3x3.
"""

import logging
from typing import List

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.data.models import FeatureConfig, Frame, Keypoint

# Настройка логгирования
logger = logging.getLogger(__name__)

# Смещения (dy, dx) окружности по часовой стрелке, начиная сверху
CIRCLE_OFFSETS = np.array([
    (-3, 0), (-3, 1), (-2, 2), (-1, 3), (0, 3), (1, 3), (2, 2), (3, 1),
    (3, 0), (3, -1), (2, -2), (1, -3), (0, -3), (-1, -3), (-2, -2), (-3, -1),
], dtype=np.int64)

ARC_LENGTH = 9
CIRCLE_RADIUS = 3


def _arc_mask(flags: np.ndarray) -> np.ndarray:
    """
    Отмечает точки окружности, входящие хотя бы в одну непрерывную дугу длины 9.

    Args:
        flags: булев массив (16, h, w) - точка светлее (или темнее) центра

    Returns:
        np.ndarray: булев массив той же формы
    """
    # starts[k]: дуга из 9 точек, начинающаяся с k, целиком выполнена
    starts = np.ones_like(flags)
    for j in range(ARC_LENGTH):
        starts &= np.roll(flags, -j, axis=0)
    in_arc = np.zeros_like(flags)
    for j in range(ARC_LENGTH):
        in_arc |= np.roll(starts, j, axis=0)
    return in_arc


def corner_responses(pixels: np.ndarray, threshold: int) -> np.ndarray:
    """
    Считает отклик FAST для каждого пикселя изображения.

    Args:
        pixels: массив uint8 (h, w)
        threshold: порог яркости

    Returns:
        np.ndarray: int64 (h, w); 0 там, где сегментный тест не пройден
            или окружность выходит за границу
    """
    height, width = pixels.shape
    responses = np.zeros((height, width), dtype=np.int64)
    if height <= 2 * CIRCLE_RADIUS or width <= 2 * CIRCLE_RADIUS:
        return responses

    img = pixels.astype(np.int64)
    r = CIRCLE_RADIUS
    center = img[r:height - r, r:width - r]
    ring = np.stack([
        img[r + dy:height - r + dy, r + dx:width - r + dx] for dy, dx in CIRCLE_OFFSETS
    ])
    diff = np.abs(ring - center)

    brighter = ring > center + threshold
    darker = ring < center - threshold
    arc = _arc_mask(brighter) | _arc_mask(darker)

    responses[r:height - r, r:width - r] = np.where(arc, diff, 0).sum(axis=0)
    return responses


def suppress_non_maxima(responses: np.ndarray) -> np.ndarray:
    """
    Оставляет пиксели, отклик которых не меньше всех 8 соседей.

    Args:
        responses: массив откликов (h, w)

    Returns:
        np.ndarray: булева маска сохраненных пикселей с ненулевым откликом
    """
    padded = np.pad(responses, 1, mode='constant', constant_values=0)
    local_max = sliding_window_view(padded, (3, 3)).max(axis=(2, 3))
    return (responses > 0) & (responses >= local_max)


def detect_fast(frame: Frame, config: FeatureConfig) -> List[Keypoint]:
    """
    Находит углы FAST-9/16 на кадре.

    Args:
        frame: кадр
        config: параметры детектора

    Returns:
        List[Keypoint]: точки, отсортированные по (отклик по убыванию, y, x),
            не ближе patch_radius к границам, не более max_keypoints
    """
    radius = config.patch_radius
    if frame.width < 2 * radius + 1 or frame.height < 2 * radius + 1:
        logger.debug(f"Кадр {frame.id} слишком мал для детектора ({frame.width}x{frame.height})")
        return []

    responses = corner_responses(frame.pixels, config.fast_threshold)
    keep = suppress_non_maxima(responses)

    # Отступ от границ
    keep[:radius, :] = False
    keep[frame.height - radius:, :] = False
    keep[:, :radius] = False
    keep[:, frame.width - radius:] = False

    ys, xs = np.nonzero(keep)
    values = responses[ys, xs]
    order = np.lexsort((xs, ys, -values))[:config.max_keypoints]

    return [
        Keypoint(x=int(xs[i]), y=int(ys[i]), response=float(values[i]))
        for i in order
    ]
