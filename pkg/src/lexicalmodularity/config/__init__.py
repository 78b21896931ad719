"""Run settings and logging configuration."""
