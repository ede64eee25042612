"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: VerificationError -> 1,
InputError -> 2, StateCapError -> 3.
"""


class SiplabError(Exception):
    """Base class for all siplab errors."""


class InputError(SiplabError):
    """Malformed or inconsistent user input (graph files, presets, flags)."""


class StateCapError(SiplabError):
    """A requested state space exceeds the configured size cap."""


class VerificationError(SiplabError):
    """A checked identity or inequality failed beyond tolerance."""


class EigensolverError(SiplabError):
    """The dense symmetric eigensolve failed or left a large residual."""
