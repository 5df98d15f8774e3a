"""Figure rendering for simulator run directories (file contract only)."""

from .contract import ContractError
from .figures import FIGURE_KINDS, FigureSpec, StyleOptions, render

__all__ = [
    "ContractError",
    "FIGURE_KINDS",
    "FigureSpec",
    "StyleOptions",
    "render",
]
