class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class SamplingError(RuntimeError):
    """Rejection sampling gave up before finding an admissible point."""


class ConfigError(ValueError):
    """Inconsistent or incomplete run configuration."""


class DataError(ValueError):
    """Malformed or invalid input data."""


class ParseError(DataError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
