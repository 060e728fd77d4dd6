"""Shared helpers, run configuration and error types for the multiplier lab."""
