"""Language-agnostic taint analysis over a unified AST."""

__version__ = "0.1.0"
