"""Phrase-based automatic post-editing with particle-aware error analysis."""

__version__ = "0.1.0"
