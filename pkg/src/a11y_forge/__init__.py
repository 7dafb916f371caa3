"""a11y-forge: accessibility static analysis and LLM-assisted fixing for web code."""

__version__ = "0.1.0"
