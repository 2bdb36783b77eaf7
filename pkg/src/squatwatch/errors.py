"""Exception hierarchy shared across the detector."""


class SquatwatchError(Exception):
    """Base class for all squatwatch errors."""


class UnknownRegistry(SquatwatchError):
    """Registry string is not one of the seven supported registries."""


class MalformedName(SquatwatchError):
    """Package name violates its registry's naming grammar."""


class IoFailure(SquatwatchError):
    """Underlying file or stream operation failed."""


class EmptySnapshot(SquatwatchError):
    """An ingested snapshot contained zero valid records."""


class NoSnapshot(SquatwatchError):
    """No snapshot has been ingested for the requested registry."""


class SignalMissing(SquatwatchError):
    """Neither popularity signal is present on both sides of a comparison."""


class EmptyCorpus(SquatwatchError):
    """Training corpus contains no names."""


class InvalidParams(SquatwatchError):
    """Training or search parameters fail validation."""


class MissingComponent(SquatwatchError):
    """A hierarchical name component was requested on a flat name."""


class DimensionMismatch(SquatwatchError):
    """Vector dimensions do not agree."""


class FormatVersionMismatch(SquatwatchError):
    """Persisted file has an unknown magic or format version."""


class EmptyInput(SquatwatchError):
    """An index build received no items."""


class EmptyIndex(SquatwatchError):
    """Search was attempted on an index with no entries."""


class EmptyString(SquatwatchError):
    """A similarity function received an empty string."""


class IndexNotBuilt(SquatwatchError):
    """Confusion search requires an ANN index that has not been built."""


class UnknownSuspect(SquatwatchError):
    """The scanned package is not present in the metadata store."""


class JudgeUnavailable(SquatwatchError):
    """The external judge endpoint could not be reached."""


class MalformedJudgeOutput(SquatwatchError):
    """The external judge returned output that could not be parsed."""


class DegenerateLabels(SquatwatchError):
    """Weight fitting requires both classes in the labeled data."""


class EmptyDataset(SquatwatchError):
    """An evaluation dataset contained no records."""


class MissingInfrastructure(SquatwatchError):
    """A pipeline run requires store, model, or index that is absent."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing infrastructure: {', '.join(self.missing)}")


class PortInUse(SquatwatchError):
    """The configured server port is already bound."""
