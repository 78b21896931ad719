"""Shared constants, errors and file helpers."""
