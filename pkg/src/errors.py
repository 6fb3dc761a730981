"""Exception types raised by the triage pipeline."""


class TriageError(Exception):
    """Base class for every error the pipeline reports to the user."""


class DatasetFormatError(TriageError):
    """Dataset file could not be parsed."""


class DatasetEntryError(TriageError):
    """A dataset entry is missing a required field or has a bad label."""

    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"entry {index}: {message}")


class SplitError(TriageError):
    """Split protocol cannot be applied to the given records."""


class UnknownProjectError(SplitError):
    """A requested project does not occur in the corpus."""

    def __init__(self, project: str, available):
        self.project = project
        self.available = sorted(available)
        super().__init__(
            f"unknown project {project!r}; available projects: {', '.join(self.available) or '(none)'}"
        )


class FitError(TriageError):
    """A feature transformer could not be fitted."""


class AssemblyError(TriageError):
    """Feature blocks do not match the requested variant."""


class ClassWeightError(TriageError):
    """Class weights need both classes to be present."""


class TrainingError(TriageError):
    """Classifier training failed."""


class EvaluationError(TriageError):
    """A metric is undefined for the given scored set."""


class ModelFormatError(TriageError):
    """A serialized model bundle is malformed."""


class ConfigError(TriageError, ValueError):
    """Experiment configuration is invalid."""
