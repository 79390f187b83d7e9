"""Error types for bad or incomplete input directories."""


class FigureInputError(Exception):
    """The input directory is missing something a figure needs."""


class MissingColumnError(FigureInputError):
    """A CSV artifact lacks a required column; the message names it."""
