"""Exception types shared by every stage of the codec."""


class CodecError(Exception):
    """Base class for all errors raised by zsqhdr."""


class FormatError(CodecError, ValueError):
    """Input bytes or files do not follow the expected syntax."""


class IntegrityError(CodecError):
    """Container data is structurally valid but incomplete or corrupted."""
