"""
Пакет для извлечения признаков и метрики сходства кадров.
"""
