"""Exception hierarchy. Every library error derives from EfcgError."""


class EfcgError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConstraint(EfcgError):
    """A hard constraint violates its field invariants."""


class SchemaError(EfcgError):
    """A serialized record does not match the expected schema."""


class NoHardConstraints(EfcgError):
    """verify_all was called on a set without hard attributes."""


class EmptyInput(EfcgError):
    """An aggregation received no data."""


class OutOfRange(EfcgError):
    """A numeric argument is outside its documented range."""


class DimensionMismatch(EfcgError):
    """Two vectors of different dimensionality were combined."""


class ZeroNorm(EfcgError):
    """A zero-norm vector cannot participate in similarity."""


class SpaceMismatch(EfcgError):
    """Vectors from different representation spaces were combined."""


class UnknownId(EfcgError):
    """An attribute id was not found in the store or pool."""


class UnknownSeed(UnknownId):
    """An expansion seed id was not found in the pool."""


class MissingVector(EfcgError):
    """An attribute lacks a vector in a required space."""


class PoolTooSmall(EfcgError):
    """The attribute pool cannot support the requested operation."""


class EmptySet(EfcgError):
    """An attribute set with no attributes where at least one is required."""


class EmptySoftList(EfcgError):
    """A judge prompt needs at least one soft attribute."""


class EmptyText(EfcgError):
    """A document-consuming operation received empty text."""


class NoAttributesFound(EfcgError):
    """A decomposition reply contained no usable attribute lines."""


class CountMismatch(EfcgError):
    """A judge reply contained the wrong number of scores."""


class MalformedScore(EfcgError):
    """A judge reply score line was not binary."""


class ClientError(EfcgError):
    """An HTTP endpoint failed after all retries."""


class GeneratorError(ClientError):
    """The generation endpoint failed."""


class JudgeError(ClientError):
    """The judge endpoint failed."""


class DegenerateSet(EfcgError):
    """Pair building needs both hard and soft attributes in the set."""


class PositionOutOfRange(EfcgError):
    """A probe insertion index does not fit the attribute set."""
