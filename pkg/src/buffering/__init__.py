"""
Пакет для буфера отправки и политик вытеснения.
"""
