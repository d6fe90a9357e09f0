"""Function-name generation from AST path contexts with a hierarchical copy decoder."""

__version__ = "0.1.0"
