"""Exception hierarchy for the toolkit.

Every error raised by this package derives from SeoAuditError, so callers can
catch one base class. The CLI maps these to exit code 2 (data error), except
IoFailure which maps to 3 (I/O error).
"""


class SeoAuditError(Exception):
    """Base class for all toolkit errors."""


# --- page model ---

class EmptyDocument(SeoAuditError):
    """No element node or visible text could be recovered from the input."""


class InvalidBaseUrl(SeoAuditError):
    """The base URL is not absolute."""


# --- text scoring ---

class UninitializedScorer(SeoAuditError):
    """The text scorer was used before being trained/loaded."""


# --- detectors ---

class BlankPage(SeoAuditError):
    """Page has too little visible text to classify (< 10 tokens)."""


class NoRedirection(SeoAuditError):
    """A redirect chain with a single hop has no redirection to judge."""


class BlankView(SeoAuditError):
    """One of the snapshot views is blank; similarity comparison aborted."""


class BlankEvidence(SeoAuditError):
    """Cloaking evidence was built from blank views and cannot be judged."""


class MissingSiteStats(SeoAuditError):
    """Site-level subpage statistics are unavailable for the domain."""


class EmptyLinkSet(SeoAuditError):
    """A link-farm visit produced an empty hyperlink set."""


# --- metrics ---

class EmptyInput(SeoAuditError):
    """An aggregate was requested over an empty collection."""


class OutOfRange(SeoAuditError):
    """A value lies outside its documented range."""


class EmptyMatrix(SeoAuditError):
    """All four confusion-matrix cells are zero."""


class EmptyString(SeoAuditError):
    """Distance requested over an empty string."""


class BadEdges(SeoAuditError):
    """Bucket edges must be strictly increasing with at least two entries."""


# --- attack generation ---

class MissingParams(SeoAuditError):
    """A technique parameter required by the transform is absent."""


class TooFewSites(SeoAuditError):
    """Mutual linking needs at least two sites."""


class NonEmptyOutputDir(SeoAuditError):
    """Refusing to write a corpus into a non-empty directory without force."""


class IoFailure(SeoAuditError):
    """Filesystem operation failed (wraps the underlying OSError)."""


# --- pipeline ---

class EmptyQuery(SeoAuditError):
    """The user query is empty or whitespace-only."""


class EmptyIndex(SeoAuditError):
    """Retrieval requested against an index with no documents."""


# --- network I/O ---

class FetchFailure(SeoAuditError):
    """A fetch failed; carries the view and the underlying cause."""

    def __init__(self, view: str, cause: str):
        super().__init__(f"fetch failed for {view} view: {cause}")
        self.view = view
        self.cause = cause


class TimeoutExceeded(FetchFailure):
    """A fetch exceeded its time budget."""


class ResolverFailure(SeoAuditError):
    """DNS resolution failed for a reason other than a clean NXDOMAIN."""


# --- harness ---

class DatasetEmpty(SeoAuditError):
    """The benchmark dataset contains no pairs."""


class IndexMissing(SeoAuditError):
    """A corpus index is required but was not provided or found."""


class ManifestMissing(SeoAuditError):
    """The corpus manifest file is absent."""


class UnsupportedFormat(SeoAuditError):
    """Unknown report output format."""


class SchemaError(SeoAuditError):
    """A versioned input file does not match its documented schema."""
