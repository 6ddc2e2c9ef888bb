"""Package version, kept separate to avoid import cycles."""

__version__ = "0.1.0"
