"""
Пакет для отчетов по прогонам и исследований последовательностей.
"""
