"""Exception hierarchy shared by all solver modules."""


class SolverError(Exception):
    """Base class; ``kind`` is the machine-readable tag used by the CLI."""

    kind = "solver_error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class DomainError(SolverError, ValueError):
    kind = "domain_error"


class ChokingError(SolverError):
    """The steady flow reached the sonic margin before the end of the duct."""

    kind = "choking_error"

    def __init__(self, message, x_choke=None):
        super().__init__(message)
        self.x_choke = x_choke


class InstabilityError(SolverError):
    """A state left the subsonic guard region (or a slope bound was exceeded)."""

    kind = "instability_error"


class ConvergenceError(SolverError):
    kind = "convergence_error"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UsageError(SolverError, ValueError):
    kind = "usage_error"


class ConfigError(SolverError, ValueError):
    """Bad configuration file; carries the key path or line number when known."""

    kind = "config_error"

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        full = f"{', '.join(where)}: {message}" if where else message
        super().__init__(full)
        self.key = key
        self.line = line

    def to_dict(self):
        d = super().to_dict()
        d["key"] = self.key
        d["line"] = self.line
        return d
