"""Exception hierarchy shared by the codec modules and the CLI."""


class CvcError(Exception):
    """Base class for all codec errors."""


class ParameterError(CvcError, ValueError):
    """A user-supplied parameter is outside its legal range."""


class DimensionError(CvcError, ValueError):
    """Array shapes disagree or violate the padding contract."""


class FormatError(CvcError):
    """An input/output video file (Y4M, rgb24) is malformed."""


class StreamError(CvcError):
    """A .cvc stream is malformed, truncated or used out of order."""
