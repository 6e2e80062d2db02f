"""
Пакет для визуализации результатов экспериментов.
"""
