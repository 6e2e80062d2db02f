#!/usr/bin/env python
"""
ORBBuf - точка входа.
Симуляция буферизации кадров с учетом сходства при обрывах сети.
"""

import logging
import sys

from src.cli import main

# Настройка логгирования
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(module)s - %(message)s',
    level=logging.INFO
)


if __name__ == '__main__':
    sys.exit(main())
