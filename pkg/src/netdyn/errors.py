"""Exception types shared across netdyn.

Messages are prefixed with the module that raised them (``graph: ...``,
``eep: ...``) so the CLI can surface them verbatim.
"""


class NetdynError(Exception):
    """Base class for all library errors."""

    module = "netdyn"

    def __init__(self, message, module=None):
        if module is not None:
            self.module = module
        super().__init__(f"{self.module}: {message}")


class InputError(NetdynError, ValueError):
    """Malformed or contract-violating input (CLI exit code 2)."""


class NumericalError(NetdynError, ArithmeticError):
    """A numerical procedure failed or produced non-finite output (exit code 3)."""


class NotEEPError(InputError):
    """Raised when a partition is required to be externally equitable but is not."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"partition is not an external equitable partition "
            f"(max violation {report.max_violation:.3g}, witness {report.witness})",
            module="eep",
        )


class UnbalancedGraphError(InputError):
    """A structurally balanced graph was required; the signed consensus limit is 0."""

    def __init__(self, result):
        self.result = result
        super().__init__(
            f"graph is not structurally balanced "
            f"({len(result.frustrated_edges)} frustrated edge(s)); consensus limit is 0",
            module="balance",
        )
