"""Exceptions raised by prunetree.

Every error carries a message naming the invariant that was violated;
the command line front end prints it verbatim.
"""


__all__ = (
    'PruneTreeError', 'InvalidTreeError', 'TreeSizeError', 'ExcursionError',
    'NonMonotoneFunctionalError', 'NoClosedFormError', 'GenericityError',
    'AdmissibilityError', 'DomainError', 'InsufficientSamplesError',
)


class PruneTreeError(Exception):
    pass


class InvalidTreeError(PruneTreeError):
    """A tree or a point inside a tree is malformed."""


class TreeSizeError(PruneTreeError):
    """A node cap or a search size limit was exceeded."""


class ExcursionError(PruneTreeError):
    """An extrema sequence does not describe a valid excursion."""


class NonMonotoneFunctionalError(PruneTreeError):
    pass


class NoClosedFormError(PruneTreeError):
    pass


class GenericityError(PruneTreeError):
    """Ties between minima, maxima or basin lengths.

    Tied values produce simultaneous events whose resolution is not
    defined, so they are rejected instead of merged within a tolerance.
    """


class AdmissibilityError(PruneTreeError):
    """A mass tree is not t-admissible, or a potential not t-consistent."""


class DomainError(PruneTreeError, ValueError):
    pass


class InsufficientSamplesError(PruneTreeError):
    pass
