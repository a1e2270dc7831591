"""Exception hierarchy shared by all fakedet modules."""


class FakedetError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(FakedetError):
    """An operation received data violating its preconditions."""


class InvalidConfigError(FakedetError):
    """A configuration object violates its invariants."""


class IngestionError(FakedetError):
    """A dataset directory or image file could not be ingested."""


class AugmentationError(FakedetError):
    """A pixel-domain perturbation failed (typically a codec error)."""


class TrainingError(FakedetError):
    """Training could not proceed (e.g. empty dataset)."""


class EvaluationError(FakedetError):
    """Evaluation could not proceed (e.g. empty dataset)."""
