"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`PhmmError`,
so callers (and the command line) can separate modelling failures from bugs.
"""

from __future__ import annotations

__all__ = [
    "PhmmError",
    "DimensionError",
    "InvariantError",
    "SingularMatrix",
    "NoConvergence",
    "SpectrumClash",
    "SpectrumProductClash",
    "PoleHit",
    "NonPositiveParameter",
    "SingularGram",
    "SingularE",
    "RankDeficientBasis",
    "KindMismatch",
    "CertificateInvalid",
    "UnstablePlant",
    "DegenerateStep",
    "FlagsMissing",
    "SchemaError",
]


class PhmmError(Exception):
    """Base class for all library errors."""


class DimensionError(PhmmError, ValueError):
    """Operand shapes are inconsistent."""


class InvariantError(PhmmError, ValueError):
    """A structural invariant of a domain type is violated."""


class SingularMatrix(PhmmError, ArithmeticError):
    """A pivot fell below the singularity threshold."""


class NoConvergence(PhmmError, ArithmeticError):
    """The eigenvalue iteration failed to converge."""


class SpectrumClash(PhmmError, ValueError):
    """Spectra that must be disjoint intersect."""


class SpectrumProductClash(SpectrumClash):
    """An eigenvalue product equals one, so a Markov-type equation is singular."""


class PoleHit(PhmmError, ArithmeticError):
    """A transfer function was evaluated at (or numerically on) a pole."""


class NonPositiveParameter(PhmmError, ValueError):
    """A physical parameter that must be positive is not."""


class SingularGram(PhmmError, ArithmeticError):
    """A Gram matrix needed for a structure-preserving reduction is singular."""


class SingularE(PhmmError, ArithmeticError):
    """The descriptor matrix E is singular for the chosen free parameter."""


class RankDeficientBasis(PhmmError, ValueError):
    """A projection basis does not have full column rank."""


class KindMismatch(PhmmError, ValueError):
    """A certificate kind does not fit the model or generator it is checked with."""


class CertificateInvalid(PhmmError, ValueError):
    """A supplied certificate fails its defining identities or inequality."""


class UnstablePlant(PhmmError, ValueError):
    """Simulation requires a Hurwitz plant matrix."""


class DegenerateStep(PhmmError, ValueError):
    """The integration step exceeds the explicit Runge-Kutta stability bound."""


class FlagsMissing(PhmmError, ValueError):
    """Required positivity flags are not set on a system."""


class SchemaError(PhmmError, ValueError):
    """A serialized document does not follow the expected schema."""
