"""Series solutions of linear ODEs with variable coefficients, in exact arithmetic."""

__version__ = "0.1.0"
