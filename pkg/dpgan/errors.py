#!/usr/bin/env python3
"""
Exception hierarchy for the dp-GAN toolkit

Every error carries the process exit code the CLI returns for it:
1 config/usage, 2 data, 3 numeric failure.
"""


class DpganError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1


class ConfigError(DpganError):
    """Invalid configuration, parameter range or checkpoint version"""
    exit_code = 1


class GraphError(DpganError, ValueError):
    """Misuse of a compute graph (missing feed, unreachable node, non-scalar target)"""
    exit_code = 1


class ShapeError(GraphError):
    """Operand shapes are incompatible with the requested operation"""


class DataError(DpganError):
    """Unreadable or invalid input data"""
    exit_code = 2


class SchemaError(DataError):
    """Malformed schema or a model layout that does not fit the schema"""


class NumericError(DpganError):
    """Numeric failure"""
    exit_code = 3


class NonFiniteError(NumericError):
    """A value became NaN or infinite"""


class QuadratureError(NumericError):
    """Numerical integration did not meet its tail or convergence tolerance"""


class DegenerateOutputError(NumericError):
    """Generated data cannot be used for the requested evaluation"""


class TrainingDivergedError(NumericError):
    """Training produced a non-finite loss

    Attributes:
        last_good_model: model state from the last completed generator iteration
        iteration: generator iteration at which training diverged
    """

    def __init__(self, message, last_good_model=None, iteration=None):
        super().__init__(message)
        self.last_good_model = last_good_model
        self.iteration = iteration
