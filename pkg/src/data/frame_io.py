"""
Модуль ввода-вывода кадров.
Чтение и запись бинарных PGM, загрузка последовательностей из директории,
генерация синтетических последовательностей и модель размера сообщения.
"""

import os
import logging
from pathlib import Path
from typing import Callable, List, Tuple, Union

import numpy as np

from src.data.models import Frame, FrameSequence, SyntheticParams
from src.errors import (
    FrameFormatError, OutputError, PGMMagicError, PGMMaxvalError,
    PGMTruncatedError, SequenceLoadError, UsageError,
)

# Настройка логгирования
logger = logging.getLogger(__name__)

# Коэффициенты сжатия, пересчитанные из потоков ~3 МБ/с и ~0.5 МБ/с
# для кадров 1280x1024 при 25 кадрах/с
CALIBRATION_HIGH_RATIO = 0.0916
CALIBRATION_LOW_RATIO = 0.01526

PGM_MAGIC = b"P5"
PGM_WHITESPACE = b" \t\r\n\v\f"

PathLike = Union[str, os.PathLike]
SizeModel = Callable[[Frame], int]


def _read_header(data: bytes) -> Tuple[List[int], int]:
    """
    Разбирает заголовок PGM после сигнатуры.

    Args:
        data: содержимое файла целиком

    Returns:
        Tuple[List[int], int]: (width, height, maxval) и смещение начала пикселей
    """
    values: List[int] = []
    pos = len(PGM_MAGIC)
    while len(values) < 3:
        if pos >= len(data):
            raise PGMTruncatedError("Заголовок PGM обрезан")
        byte = data[pos:pos + 1]
        if byte in PGM_WHITESPACE:
            pos += 1
        elif byte == b"#":
            # Комментарий до конца строки
            end = data.find(b"\n", pos)
            if end < 0:
                raise PGMTruncatedError("Заголовок PGM обрезан внутри комментария")
            pos = end + 1
        else:
            start = pos
            while pos < len(data) and data[pos:pos + 1] not in PGM_WHITESPACE and data[pos:pos + 1] != b"#":
                pos += 1
            token = data[start:pos]
            if not token.isdigit():
                raise FrameFormatError(f"Некорректное значение в заголовке PGM: {token!r}")
            values.append(int(token))

    # После maxval ровно один пробельный символ
    if pos >= len(data) or data[pos:pos + 1] not in PGM_WHITESPACE:
        raise PGMTruncatedError("После maxval отсутствует разделитель")
    return values, pos + 1


def load_pgm(path: PathLike, frame_id: int = 0, t_gen: float = 0.0) -> Frame:
    """
    Загружает бинарный PGM (P5) с maxval не больше 255.

    Args:
        path: путь к файлу
        frame_id: идентификатор кадра, назначаемый вызывающей стороной
        t_gen: время генерации кадра в мс

    Returns:
        Frame: кадр с пикселями в точности как в файле, encoded_size = width x height
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FrameFormatError(f"Не удалось прочитать файл {path}: {e}") from e

    if not data.startswith(PGM_MAGIC):
        raise PGMMagicError(f"Файл {path} не является бинарным PGM (сигнатура {data[:2]!r})")

    (width, height, maxval), offset = _read_header(data)
    if maxval > 255:
        raise PGMMaxvalError(f"maxval={maxval} в файле {path} не поддерживается")
    if maxval <= 0 or width <= 0 or height <= 0:
        raise FrameFormatError(f"Некорректный заголовок PGM в файле {path}")

    expected = width * height
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise PGMTruncatedError(
            f"В файле {path} {len(payload)} байт пикселей вместо {expected}"
        )

    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    pixels.setflags(write=False)
    return Frame(id=frame_id, t_gen=t_gen, width=width, height=height,
                 pixels=pixels, encoded_size=expected)


def write_pgm(path: PathLike, frame: Frame) -> None:
    """
    Записывает кадр в бинарный PGM с maxval 255.

    Args:
        path: путь к файлу
        frame: кадр для записи
    """
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(np.ascontiguousarray(frame.pixels, dtype=np.uint8).tobytes())
    except OSError as e:
        raise OutputError(f"Не удалось записать {path}: {e}") from e


def load_sequence(directory: PathLike, fps: float, compression_ratio: float = 1.0) -> FrameSequence:
    """
    Загружает все .pgm файлы директории в лексикографическом порядке имен.

    Args:
        directory: директория с кадрами
        fps: частота кадров
        compression_ratio: коэффициент модели размера сообщения

    Returns:
        FrameSequence: кадры с id 0..n-1 и t_gen = id x 1000/fps
    """
    if fps <= 0:
        raise UsageError(f"fps должен быть положительным: {fps}")
    root = Path(directory)
    if not root.is_dir():
        raise SequenceLoadError(f"Директория {directory} не найдена")

    paths = sorted(p for p in root.iterdir() if p.suffix == ".pgm" and p.is_file())
    if not paths:
        raise SequenceLoadError(f"В директории {directory} нет файлов .pgm")

    period = 1000.0 / fps
    frames = []
    for index, path in enumerate(paths):
        try:
            frame = load_pgm(path, frame_id=index, t_gen=index * period)
        except FrameFormatError as e:
            raise SequenceLoadError(f"{path.name}: {e}") from e
        frames.append(_with_size(frame, model_encoded_size(frame, compression_ratio)))

    logger.info(f"Загружено {len(frames)} кадров из {directory}")
    return FrameSequence(frames=tuple(frames), fps=fps)


def gen_synthetic(params: SyntheticParams, fps: float = 25.0, compression_ratio: float = 1.0) -> FrameSequence:
    """
    Генерирует последовательность случайного поля точек с горизонтальным сдвигом.

    Кадр 0 - поле точек яркости 255 на фоне 0; кадр i - кадр 0, циклически
    сдвинутый вправо на i x shift_px_per_frame, с собственным гауссовским шумом.

    Args:
        params: параметры генератора
        fps: частота кадров
        compression_ratio: коэффициент модели размера сообщения

    Returns:
        FrameSequence: последовательность, полностью определяемая params
    """
    rng = np.random.default_rng(params.seed)
    base = np.where(rng.random((params.height, params.width)) < params.dot_density, 255.0, 0.0)
    period = 1000.0 / fps

    frames = []
    for i in range(params.n_frames):
        shifted = np.roll(base, i * params.shift_px_per_frame, axis=1)
        if params.noise_sigma > 0:
            shifted = shifted + rng.normal(0.0, params.noise_sigma, shifted.shape)
        pixels = np.clip(np.rint(shifted), 0, 255).astype(np.uint8)
        pixels.setflags(write=False)
        frame = Frame(id=i, t_gen=i * period, width=params.width, height=params.height,
                      pixels=pixels, encoded_size=1)
        frames.append(_with_size(frame, model_encoded_size(frame, compression_ratio)))

    logger.debug(f"Сгенерировано {params.n_frames} синтетических кадров (seed={params.seed})")
    return FrameSequence(frames=tuple(frames), fps=fps)


def model_encoded_size(frame: Frame, compression_ratio: float) -> int:
    """
    Моделирует размер закодированного кадра: round(width x height x ratio), минимум 1.

    Args:
        frame: кадр
        compression_ratio: коэффициент сжатия в (0, 1]

    Returns:
        int: размер сообщения в байтах
    """
    if not 0 < compression_ratio <= 1:
        raise UsageError(f"compression_ratio должен лежать в (0, 1]: {compression_ratio}")
    return max(1, int(round(frame.width * frame.height * compression_ratio)))


def ratio_size_model(compression_ratio: float) -> SizeModel:
    """Возвращает модель размера с фиксированным коэффициентом сжатия."""
    if not 0 < compression_ratio <= 1:
        raise UsageError(f"compression_ratio должен лежать в (0, 1]: {compression_ratio}")

    def size_model(frame: Frame) -> int:
        return model_encoded_size(frame, compression_ratio)

    return size_model


def with_encoded_sizes(sequence: FrameSequence, compression_ratio: float) -> FrameSequence:
    """Пересобирает последовательность с размерами сообщений по модели."""
    frames = tuple(_with_size(f, model_encoded_size(f, compression_ratio)) for f in sequence.frames)
    return FrameSequence(frames=frames, fps=sequence.fps)


def sustaining_rate(sequence: FrameSequence) -> float:
    """
    Скорость канала, ровно покрывающая поток кадров.

    Args:
        sequence: последовательность кадров

    Returns:
        float: средний размер сообщения x fps, байт/с
    """
    if len(sequence) == 0:
        return 0.0
    mean_size = float(np.mean([f.encoded_size for f in sequence.frames]))
    return mean_size * sequence.fps


def _with_size(frame: Frame, encoded_size: int) -> Frame:
    return Frame(id=frame.id, t_gen=frame.t_gen, width=frame.width, height=frame.height,
                 pixels=frame.pixels, encoded_size=encoded_size)
