"""Exception types shared across the toolkit."""

from __future__ import annotations


class MedspanError(ValueError):
    """Base class for contract violations raised by this package."""


class FormatError(MedspanError):
    """Malformed input file or stream.

    Carries the offending location so command-line tools can point at the
    exact line that broke the contract.
    """

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        source: str | None = None,
    ) -> None:
        self.bare_message = message
        self.line = line
        self.source = source
        prefix = ""
        if source is not None:
            prefix += f"{source}: "
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)

    def with_source(self, source: str) -> FormatError:
        return FormatError(self.bare_message, line=self.line, source=source)
