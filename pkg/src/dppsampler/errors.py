"""Exception types shared across the library and the CLI."""


class SpaceError(ValueError):
    """Base class for search-space definition problems."""


class SpaceSyntaxError(SpaceError):
    """The space-config document is not well-formed (position-reported)."""


class SpaceSemanticError(SpaceError):
    """The document parses but violates a schema rule (bounds, scales, names...)."""


class UnsupportedSpaceError(ValueError):
    """A sampler was asked to run on a space it is not defined for.

    Grid and Sobol sequences exist only on hypercube-like spaces (numeric,
    non-conditional dimensions), so tree-structured or categorical spaces
    are rejected with this error.
    """


class DegeneratePoolError(RuntimeError):
    """Every candidate in a sequential-sampling pool had (numerically) zero
    posterior variance, so no selection probability can be formed."""


class DegenerateSetError(RuntimeError):
    """A selected-point kernel matrix is singular beyond jitter rescue."""
