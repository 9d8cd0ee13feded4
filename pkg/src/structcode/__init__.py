"""structcode: concrete codings between graphs, orders and arithmetic."""

__version__ = "0.1.0"
