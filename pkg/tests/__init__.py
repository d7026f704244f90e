"""Тесты для reslab."""
