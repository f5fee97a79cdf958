"""Exception types shared across the package."""


class MaskSeqError(Exception):
    """Base class for all maskseq errors."""


class EmptyMaskError(MaskSeqError):
    """Raised when an operation needs foreground pixels and finds none."""


class ParseError(MaskSeqError):
    """Grounding-string parse failure, with the byte offset of the problem.

    `offset` is the UTF-8 byte offset into the original input string.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.message = message
        self.offset = offset
