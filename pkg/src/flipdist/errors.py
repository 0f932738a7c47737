"""Exception taxonomy shared across the library and mapped to CLI exit codes."""


class FlipdistError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class ValidationError(FlipdistError):
    """An object violates a structural invariant; `report` lists violations."""

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or [message]


class DomainMismatchError(FlipdistError):
    exit_code = 2


class IllegalFlipError(FlipdistError):
    exit_code = 2


class IllegalScriptError(FlipdistError):
    """A flip script fails to replay; `index` is the first failing move."""

    exit_code = 2

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptyRegionError(FlipdistError):
    exit_code = 3


class InfeasibleSagError(FlipdistError):
    exit_code = 3


class SharpVertexError(FlipdistError):
    exit_code = 3


class EmptyFeasibleRegionError(FlipdistError):
    """A gadget point has no admissible placement; `constraints` names the set."""

    exit_code = 3

    def __init__(self, message, constraints=None):
        super().__init__(message)
        self.constraints = constraints


class NotPlanarError(FlipdistError):
    exit_code = 2


class Not3ConnectedError(FlipdistError):
    exit_code = 2


class InvalidOuterFaceError(FlipdistError):
    exit_code = 2


class NotACoverError(FlipdistError):
    """`edge` is a witness edge left uncovered."""

    exit_code = 2

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class CapExceededError(FlipdistError):
    exit_code = 4
