"""Вычислительные сервисы лаборатории."""
