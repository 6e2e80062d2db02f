"""
Пакет для структур данных и ввода-вывода кадров.
"""

# Импорт подмодулей для упрощения общего импорта
from src.data import models, frame_io
