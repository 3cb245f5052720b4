"""Exception types shared across the pipeline stages."""


class FunnelError(Exception):
    """Base class for all pipeline errors."""


class MissingField(FunnelError):
    """A required field is absent from an input record."""

    def __init__(self, field: str):
        super().__init__(f"required field missing: {field}")
        self.field = field


class MalformedTimestamp(FunnelError):
    """created_at could not be parsed or is out of range."""


class EmptyKeywordList(FunnelError):
    """A topic was given no keywords to match against."""


class SourceUnreadable(FunnelError):
    """The underlying stream source failed mid-read."""


class ZeroShards(FunnelError):
    """Routing was asked to distribute over fewer than one shard."""


class UnknownTopic(FunnelError):
    """Operation against a topic that was never registered."""


class ShardCountMismatch(FunnelError):
    """A store root was opened with a shard count that contradicts its manifest."""


class IOFailure(FunnelError):
    """Storage I/O failed; the underlying cause is chained."""


class InvalidRange(FunnelError):
    """A half-open time range with t0 >= t1."""


class InvalidWidth(FunnelError):
    """A non-positive bucket width."""


class DuplicateTweetId(FunnelError):
    """The same tweet id arrived with a different author (corrupt input)."""


class MalformedXml(FunnelError):
    """Input document is not well-formed XML."""


class UnknownNodeReference(FunnelError):
    """An edge references a node id that was never declared."""


class MissingKindAttribute(FunnelError):
    """A node or edge element lacks the mandatory kind attribute."""


class EigenvectorNonConvergence(Warning):
    """Power iteration hit the iteration cap before reaching tolerance."""
