"""Structured errors shared by all modules.

Every error carries a (module, check) pair so the CLI can emit
machine-parsable diagnostics of the form ``E:<module>:<check>: message``.
"""

from __future__ import annotations


class WhitneyError(Exception):
    """Base error with a machine-parsable prefix."""

    def __init__(self, module: str, check: str, message: str):
        self.module = module
        self.check = check
        self.message = message
        super().__init__(f"E:{module}:{check}: {message}")


class ValidationError(WhitneyError):
    """Bad argument or configuration value."""


class GuardError(WhitneyError):
    """A resource cap or numeric guard rail was hit."""
