"""Exception hierarchy.

``InputError`` subclasses describe bad or insufficient input and map to
CLI exit code 65; anything else escaping a command is an internal error.
"""

from __future__ import annotations


class JSJError(Exception):
    pass


class InputError(JSJError):
    pass


class SchemaError(InputError):
    pass


class BipartiteError(InputError):
    pass


class InfiniteCylinderValence(InputError):
    pass


class DanglingReference(InputError):
    pass


class MissingLength(InputError):
    pass


class DifferentCylinders(InputError):
    pass


class ModeDataMissing(InputError):
    pass


class OracleMissing(InputError):
    pass


class IllPosedQuery(InputError):
    pass


class InfiniteMultiplicity(InputError):
    pass


class NotStable(JSJError):
    """A class of a supposedly stable decoration has inconsistent counts."""
