"""
Exceptions raised by the stain toolkit.

All input-related errors derive from :class:`ValueError`, hence callers that are only interested
in "the input was wrong" can catch :class:`ValueError`.
"""
import typing


class InvalidInputError(ValueError):
    """
    The input has a wrong shape, is out of range, or is empty.
    """
    pass


class InsufficientTissueError(ValueError):
    """
    The image has too few tissue pixels to estimate the stains.
    """

    def __init__(self, n_tissue: int, n_required: int):
        super().__init__(f'Found {n_tissue:,d} tissue pixels but at least {n_required:,d} are required')
        self._n_tissue = n_tissue
        self._n_required = n_required

    @property
    def n_tissue(self) -> int:
        return self._n_tissue

    @property
    def n_required(self) -> int:
        return self._n_required


class FormatError(ValueError):
    """
    The file is not an image/mask we can read (not an image, truncated, unsupported bit depth).
    """
    pass


class ParseError(ValueError):
    """
    A malformed line of a tabular input, such as a manifest.
    """

    def __init__(self, message: str, line_number: typing.Optional[int] = None):
        if line_number is not None:
            message = f'Line {line_number}: {message}'
        super().__init__(message)
        self._line_number = line_number

    @property
    def line_number(self) -> typing.Optional[int]:
        """
        Get the 1-based number of the offending line or `None` if not known.
        """
        return self._line_number


class DuplicateIdError(ParseError):

    def __init__(self, identifier: str, line_number: typing.Optional[int] = None):
        super().__init__(f'Duplicate id {identifier!r}', line_number)
        self._identifier = identifier

    @property
    def identifier(self) -> str:
        return self._identifier


class MissingColumnError(ParseError):

    def __init__(self, column: str, line_number: typing.Optional[int] = None):
        super().__init__(f'Missing required column {column!r}', line_number)
        self._column = column

    @property
    def column(self) -> str:
        return self._column


class NonFiniteLossError(ArithmeticError):
    """
    Training produced a `NaN` or infinite loss.
    """

    def __init__(self, step: int):
        super().__init__(f'Non-finite loss at step {step}')
        self._step = step

    @property
    def step(self) -> int:
        return self._step
