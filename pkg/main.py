#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Точка входа для анализа потерь в сверхпроводящих резонаторах.
"""

import os
import sys

from dotenv import load_dotenv

from src.app import ResLabApp


def main():
    """Главная функция запуска."""
    # Загружаем переменные окружения (CONFIG_FILE, RESLAB_SEED)
    load_dotenv()

    config_file = os.getenv('CONFIG_FILE', 'config/analysis_config.json')

    app = ResLabApp(config_file)
    sys.exit(app.run(sys.argv[1:]))


if __name__ == '__main__':
    main()
