"""
ORBBuf - буферизация кадров с учетом их сходства для удаленного визуального SLAM.
"""

__version__ = '1.0.0'
