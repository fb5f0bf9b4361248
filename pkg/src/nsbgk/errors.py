class NumericalFailure(RuntimeError):
    """Base class for failures that abort a simulation."""


class NewtonConvergenceError(NumericalFailure):
    pass


class StepSizeError(NumericalFailure):
    pass


class BlowUpError(NumericalFailure):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class PicardNotConverged(NumericalFailure):
    def __init__(self, message, traces):
        super().__init__(message)
        self.traces = traces


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where += f"key '{key}'"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}" if where else message)
        self.key = key
        self.line = line
