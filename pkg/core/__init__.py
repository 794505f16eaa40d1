"""Configuration, errors and the numeric foundations (extended arithmetic, map sequences)."""
