"""Publication-style figures rendered from ftlab run directories.

The renderers read only the CSV and JSON artifacts that `ftlab run`
writes; they never recompute model output.  Rendering is read-only and
deterministic: the same input directory produces byte-identical images.
"""

from .errors import FigureInputError, MissingColumnError
from .figures import FIGURE_IDS, render

__version__ = "0.1.0"

__all__ = ["FIGURE_IDS", "FigureInputError", "MissingColumnError", "render"]
