"""Exception types raised by the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its precondition."""


class DivergenceError(RuntimeError):
    """An iteration produced non-finite values."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key and line when known."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class RegistrationError(ValueError):
    """A rule name was registered twice."""
