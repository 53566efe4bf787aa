"""Утилиты: логирование, отчёты, время."""
