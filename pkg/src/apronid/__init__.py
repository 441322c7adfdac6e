"""Aircraft type identification from instance masks."""
__version__ = "0.1.0"
