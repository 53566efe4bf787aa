"""Тесты лаборатории."""
