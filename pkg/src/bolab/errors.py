"""Exception types shared across the package."""


class BolabError(Exception):
    """Base class for run-level failures."""


class ConfigError(BolabError):
    """Invalid scenario configuration (maps to exit code 2)."""


class InstabilityError(BolabError):
    """Non-finite state produced during time stepping (exit code 3)."""

    def __init__(self, message, step=None, t=None):
        super().__init__(message)
        self.step = step
        self.t = t


class ContaminationError(BolabError):
    """Solution content at the periodic boundary exceeds the allowed
    ratio, so line-on-torus diagnostics are no longer valid (exit code 4)."""

    def __init__(self, message, ratio=None, threshold=None):
        super().__init__(message)
        self.ratio = ratio
        self.threshold = threshold
