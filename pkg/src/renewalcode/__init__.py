"""Renewal processes, exponential return-time tails and marker constructions."""
