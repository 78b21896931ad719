"""Correlation and regression over per-language scores."""
