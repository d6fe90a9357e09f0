"""Exception hierarchy shared by every stage of the pipeline."""


class NamegenError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(NamegenError):
    def __init__(self, op, *shapes, detail=""):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        msg = f"{op}: incompatible shapes " + ", ".join(str(s) for s in self.shapes)
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ParseError(NamegenError):
    def __init__(self, message, line, column, origin="<input>"):
        self.line = line
        self.column = column
        self.origin = origin
        super().__init__(f"{origin}:{line}:{column}: {message}")


class ValidationError(NamegenError):
    """Structurally invalid data (AST records, prepared examples, config)."""


class DataError(NamegenError):
    """Input data is missing, empty or inconsistent with an upstream stage."""


class CheckpointError(NamegenError):
    """Checkpoint file is corrupt, truncated or has an unsupported version."""


class InvariantError(NamegenError):
    """An internal pipeline invariant was violated."""
