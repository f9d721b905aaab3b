"""Exception types raised across the package."""

from __future__ import annotations


class SoergelError(Exception):
    """Base class for every error raised by this package."""


class NonSymmetric(SoergelError):
    pass


class DiagonalNotOne(SoergelError):
    pass


class BondTooSmall(SoergelError):
    pass


class NotExtraLarge(SoergelError):
    pass


class InfiniteBondUnsupported(SoergelError):
    pass


class FieldMissingConstant(SoergelError):
    pass


class NotReduced(SoergelError):
    pass


class InternalDivisionFailure(SoergelError):
    pass


class SingularPairing(SoergelError):
    pass


class TruncationInsufficient(SoergelError):
    pass


class CoverageFailure(SoergelError):
    pass


class ShapeMismatch(SoergelError):
    pass


class NotBimoduleMap(SoergelError):
    pass


class ZeroNormalizer(SoergelError):
    pass


class NotIdempotent(SoergelError):
    pass


class SelectionAmbiguous(SoergelError):
    pass


class DifferentElements(SoergelError):
    pass


class TriangularityViolation(SoergelError):
    pass


class NegativeCoefficient(SoergelError):
    pass


class IndexNotBruhatClosed(SoergelError):
    pass


class ConfigError(SoergelError):
    pass
