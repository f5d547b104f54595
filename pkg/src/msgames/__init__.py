"""Multi-structural games on linear orders and bit strings."""

__version__ = "0.1.0"
