"""Обработчики команд командной строки."""
