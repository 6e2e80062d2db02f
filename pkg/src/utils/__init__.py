"""
Пакет вспомогательных утилит: валидация параметров и форматирование вывода.
"""
