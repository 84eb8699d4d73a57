"""
Error Types
Exception hierarchy shared by all services and mapped to CLI exit codes
"""


class QiupError(Exception):
    """Base class for all simulator errors"""
    exit_code = 1


class ValidationError(QiupError):
    """Invalid parameters, configuration or input files"""
    exit_code = 2


class NumericalPreconditionError(QiupError):
    """A numerical method cannot be applied safely to the given inputs"""
    exit_code = 3


class OracleMismatchError(QiupError):
    """Closed-form rates disagree with the state-vector oracle"""
    exit_code = 1

    def __init__(self, message: str, report: dict = None):
        super().__init__(message)
        self.report = report or {}
