"""Error type shared by every module.

All failures raised by the library carry a short machine-readable ``code``
(``DOMAIN_EMPTY``, ``BAD_CYLINDER``, ``NOT_MIXING`` ...) so that callers and
the CLI can branch on it without parsing messages.
"""

from __future__ import annotations


class LabError(Exception):
    """A contract violation detected by one of the operations."""

    def __init__(self, code: str, message: str = "", **details):
        self.code = code
        self.details = details
        super().__init__(f"{code}: {message}" if message else code)


class ConfigError(LabError):
    """Invalid scenario configuration; ``errors`` holds ``(field_path, message)`` pairs."""

    def __init__(self, code: str, errors, **details):
        self.errors = list(errors)
        text = "; ".join(f"{path or '<root>'}: {msg}" for path, msg in self.errors)
        super().__init__(code, text, **details)
