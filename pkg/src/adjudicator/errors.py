"""Exception hierarchy shared across the package."""


class AdjudicatorError(Exception):
    """Base class for all package errors."""


class SchemaError(AdjudicatorError):
    """A serialized record does not match the expected schema."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message} (at {path})" if path else message)
        self.path = path


class VersionError(SchemaError):
    """A record declares an unknown schema version."""


class LabelParseError(AdjudicatorError):
    """No verdict label could be extracted from an engine response."""


class ProviderError(AdjudicatorError):
    """A remote embedding / chat provider failed after retries."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class FingerprintMismatchError(AdjudicatorError):
    """Graphs embedded under different provider configs were mixed."""


class IndexBuildError(AdjudicatorError):
    """Corpus records failed validation during index construction."""

    def __init__(self, message: str, graph_ids: list[str] | None = None):
        super().__init__(message)
        self.graph_ids = graph_ids or []


class ExtractionError(AdjudicatorError):
    """Provider output did not conform to the graph schema after retry."""

    def __init__(self, message: str, raw_output: str = ""):
        super().__init__(message)
        self.raw_output = raw_output


class NormalizationError(AdjudicatorError):
    """A deny-listed token survived style normalization."""


class DuplicateRecordError(AdjudicatorError):
    """An already-ingested id was submitted again."""


class DuplicateProposalError(AdjudicatorError):
    """The counterfactual generator repeated an action twice in a row."""
