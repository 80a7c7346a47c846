class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


class NumericalError(RuntimeError):
    """A numerical stage failed (CLI exit code 2).

    ``stage`` names the pipeline stage, e.g. ``"evolve"`` or ``"decompose"``.
    """

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg
