"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class ResourceError(MemoryError):
    """An instance exceeds a size guard (dense matrices, flow solvers)."""


class InputError(ValueError):
    """Malformed external input. Carries the offending row when known."""

    def __init__(self, message, row=None, path=None):
        self.row = row
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
