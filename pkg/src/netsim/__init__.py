"""
Пакет для трасс пропускной способности и событийного симулятора канала.
"""
