"""Exception types."""


class PyrsegError(Exception):
    """Base for all package errors."""


class ModelConfigError(PyrsegError):
    """Invalid network configuration."""


class DataError(PyrsegError):
    """Manifest or image data problem."""


class TrainingError(PyrsegError):
    """Training failure (divergence, bad hyperparameters)."""


class EvalError(PyrsegError):
    """Evaluation or prediction-export failure."""
