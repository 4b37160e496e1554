"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class QuasiSierpinskiError(Exception):
    """Base class; ``code`` is the machine-readable tag the CLI reports."""

    code = "error"


class DomainError(QuasiSierpinskiError, ValueError):
    code = "domain"


class ValidationError(QuasiSierpinskiError, ValueError):
    """Invalid configuration. ``messages`` lists every violated rule."""

    code = "validation"

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class NonCompressiveSupportError(ValidationError):
    """Some support displacement is not strictly downward."""

    code = "non_compressive_support"

    def __init__(self, supports, delta):
        self.supports = list(supports)
        self.delta = list(delta)
        listing = ", ".join(f"{i} (delta={delta[i - 1]:.6g})" for i in self.supports)
        super().__init__([f"non-compressive support displacement at supports: {listing}"])


class AssemblyError(QuasiSierpinskiError):
    code = "assembly"


class SolverError(QuasiSierpinskiError):
    """Factorization failed: mechanism or invalid restraint."""

    code = "solver"
