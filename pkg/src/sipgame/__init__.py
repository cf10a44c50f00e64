"""Loop-invariant discovery game: language, engine, solver and service."""

__version__ = "0.1.0"
