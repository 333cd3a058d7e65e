"""Shared exception types for the fdpb package."""


class ConfigError(ValueError):
    """Invalid configuration value or unusable argument combination."""


class ParseError(ValueError):
    """Malformed input file (dataset CSV or experiment config)."""


class ProtocolError(RuntimeError):
    """Knowledge-exchange contract violated (missing client, empty round)."""
