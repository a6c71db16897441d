from typing import List, Optional

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ANALYSIS_FATAL = 2
EXIT_THRESHOLD_FAILURE = 3


class RecoveryError(Exception):
    """Base class for every fatal error raised by the recovery pipeline"""

    exit_code = EXIT_ANALYSIS_FATAL


class InputError(RecoveryError):
    """Raised when an input path or artifact is missing or unreadable"""

    exit_code = EXIT_INPUT_ERROR


class MissingArtifactError(InputError):
    """Raised when a stage needs an artifact an upstream stage has not written"""

    def __init__(self, artifact: str, producer: str):
        super().__init__(
            f"Missing upstream artifact '{artifact}'; run the '{producer}' subcommand first"
        )
        self.artifact = artifact
        self.producer = producer


class AnalysisError(RecoveryError):
    """Raised when analysis cannot produce a valid artifact"""

    exit_code = EXIT_ANALYSIS_FATAL


class IncludeCycleError(AnalysisError):
    """Raised when launch files include each other in a cycle"""

    def __init__(self, cycle: List[str]):
        super().__init__(f"Launch include cycle: {'→'.join(cycle)}")
        self.cycle = cycle


class ModelValidationError(AnalysisError):
    """Raised when an artifact violates its invariants and must not be emitted"""

    def __init__(self, what: str, violations: list):
        summary = "; ".join(f"{v.element}: {v.message}" for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"{what} failed validation: {summary}{more}")
        self.violations = violations


class PlantUMLParseError(AnalysisError):
    """Raised when a PlantUML model has unbalanced block structure"""

    def __init__(self, message: str, line: int, source: Optional[str] = None):
        location = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"{location}: {message}")
        self.line = line
        self.source = source


class NameResolutionError(RecoveryError):
    """Raised when a ROS name cannot be resolved"""


class UnknownTemplateError(RecoveryError):
    """Raised when a prompt template name is not registered"""

    exit_code = EXIT_INPUT_ERROR

    def __init__(self, name: str, available: List[str]):
        super().__init__(
            f"Template '{name}' not found. Available templates: {', '.join(available)}"
        )
        self.available = available


class ThresholdError(RecoveryError):
    """Raised when an evaluation falls below the requested F1 threshold"""

    exit_code = EXIT_THRESHOLD_FAILURE
