"""Конфигурация лаборатории."""
