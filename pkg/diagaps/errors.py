# -*- coding: utf-8 -*-


class DiagapsError(Exception):
    """
    Base class for everything this package raises deliberately.
    """


class DomainError(DiagapsError, ValueError):
    """
    Raised when an input falls outside the domain an operation is valid on,
    e.g. a prime in the wrong residue class or a form that is exceptional.
    """


class CertificateError(DiagapsError, RuntimeError):
    """
    Raised when an exact recomputation disagrees with a stored or expected
    value. This always indicates a tampered artefact or a bug, never bad
    luck.
    """


class CacheError(DiagapsError, OSError):
    """
    Raised when a scan cache file cannot be used, e.g. it was written by an
    incompatible version.
    """
