"""Data distribution-based curriculum learning for tabular classifiers."""

__version__ = "0.1.0"
