"""Screener/trainer bias decomposition and audit toolkit."""
__version__ = "0.1.0"
